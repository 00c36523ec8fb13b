#!/usr/bin/env python3
"""
Entry point for the damped beam decay lab.

Usage:
    python beamlab.py simulate --config configs/linear.env
    python beamlab.py verify [identities|hardy|convergence|coefficients|decay|all]
    python beamlab.py sweep --config configs/sweep.env --alpha=-1:1:5 --beta=-0.5:0.5:3
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
