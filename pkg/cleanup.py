#!/usr/bin/env python3
"""
Cleanup script to remove all generated result files of the beam decay lab.
"""

import os
import glob
import argparse

PATTERNS = [
    "snapshots.csv",
    "energy.csv",
    "identities.csv",
    "mass.csv",
    "profile_error.csv",
    "scaled_residuals.csv",
    "sweep_map.csv",
    "summary.json",
    "sweep_summary.json",
    "metadata.json",
    "verify_report.json",
    "results.xlsx",
    "sweep.xlsx",
    "*_debug.txt",
]


def find_generated(out_dir="output"):
    """
    List generated files in an output directory.

    Args:
        out_dir (str): Directory to scan

    Returns:
        list: Sorted paths of generated files
    """
    files = []
    for pattern in PATTERNS:
        files.extend(glob.glob(os.path.join(out_dir, pattern)))
    return sorted(set(files))


def cleanup(out_dir="output", dry_run=False):
    """
    Remove all generated files.

    Args:
        out_dir (str): Directory holding the results
        dry_run (bool): If True, only print the files that would be removed without actually removing them.

    Returns:
        int: Number of files removed (0 in dry run mode)
    """
    files_to_remove = find_generated(out_dir)

    if not files_to_remove:
        print("No generated files found to remove.")
        return 0

    print(f"Found {len(files_to_remove)} generated files to remove:")
    for file in files_to_remove:
        print(f"  - {file}")

    if dry_run:
        print("\nDry run mode: No files were actually removed.")
        return 0

    removed_count = 0
    for file in files_to_remove:
        try:
            os.remove(file)
            removed_count += 1
        except OSError as e:
            print(f"Error removing {file}: {str(e)}")

    print(f"\nSuccessfully removed {removed_count} files.")
    return removed_count


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Clean up generated result files of the beam decay lab.")
    parser.add_argument("--out", default="output", help="Output directory to clean (default: output)")
    parser.add_argument("--dry-run", action="store_true", help="Only print files that would be removed without actually removing them.")
    args = parser.parse_args()

    cleanup(out_dir=args.out, dry_run=args.dry_run)
