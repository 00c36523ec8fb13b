"""
Exception hierarchy for the beam decay lab.

Every error carries the process exit code the command line maps it to.
Validation errors also derive from ValueError.
"""

from typing import Optional


class BeamLabError(Exception):
    """Base class for all lab errors."""

    exit_code = 4


class InvalidConfigError(BeamLabError, ValueError):
    """A run-config key is unknown, unparsable or out of range."""

    exit_code = 2


class InvalidCoefficientError(BeamLabError, ValueError):
    """Coefficient model produced nonpositive or non-monotone values."""

    exit_code = 2


class InvalidModelError(BeamLabError, ValueError):
    """Nonlinearity model violates its admissibility conditions."""

    exit_code = 2


class OutOfRegionError(BeamLabError, ValueError):
    """Exponent formulas requested outside the region where they are defined."""

    exit_code = 2


class SchemaVersionError(BeamLabError, ValueError):
    """A result file carries a schema major version this reader does not know."""

    exit_code = 2


class NumericalIntegrationError(BeamLabError):
    """Quadrature or root finding did not converge."""


class NumericalOverflowError(BeamLabError):
    """NaN or Inf appeared while evaluating a field."""

    def __init__(self, message: str, step: Optional[str] = None):
        super().__init__(message)
        self.step = step


class StiffnessFailureError(BeamLabError):
    """Adaptive step size fell below the minimum."""

    def __init__(self, message: str, t: float, dt: float, state=None):
        super().__init__(message)
        self.t = t
        self.dt = dt
        self.state = state


class BlowUpDetectedError(BeamLabError):
    """Solution sup-norm exceeded the blow-up threshold or became non-finite."""

    exit_code = 3

    def __init__(self, message: str, t: float, sup_norm: float):
        super().__init__(message)
        self.t = t
        self.sup_norm = sup_norm


class ZeroMeanViolationError(BeamLabError):
    """A field expected to integrate to zero does not."""


class InsufficientDataError(BeamLabError, ValueError):
    """Too few (or irregular) samples for a finite-difference or fit operation."""


class UndefinedProfileError(BeamLabError, ValueError):
    """Heat kernel requested at time zero."""


class LogDomainError(BeamLabError, ValueError):
    """Nonpositive value passed to a logarithmic fit."""
