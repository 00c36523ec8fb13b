"""
Result files: CSV tables and JSON summaries carrying a schema version, a
metadata sidecar with everything non-deterministic, and an optional Excel
workbook of all tables.
"""

import json
import math
import os
import platform
from datetime import datetime
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd
import scipy

from src.errors import SchemaVersionError

SCHEMA_VERSION = "1.0"
FLOAT_FORMAT = "%.17g"
RESULT_TABLES = ("snapshots", "energy", "identities", "mass", "profile_error", "scaled_residuals")
SWEEP_TABLE = "sweep_map"


def check_schema_version(version) -> None:
    """
    Raises:
        SchemaVersionError: If the major version differs from this reader's
    """
    major = str(version).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise SchemaVersionError(
            f"Unsupported schema version {version} (this reader handles {SCHEMA_VERSION})")


def _plain(value):
    """JSON-ready copy: numpy scalars unwrapped, NaN and inf mapped to None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_table(frame: pd.DataFrame, path: str) -> str:
    """
    Write a table as CSV with a leading schema_version column.

    Args:
        frame (pd.DataFrame): Table
        path (str): Target file

    Returns:
        str: The path written
    """
    table = frame.copy()
    table.insert(0, "schema_version", SCHEMA_VERSION)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_table(path: str) -> pd.DataFrame:
    """Read a table written by write_table, rejecting unknown schema majors."""
    table = pd.read_csv(path, dtype={"schema_version": str})
    if "schema_version" not in table.columns:
        raise SchemaVersionError(f"{path} carries no schema_version column")
    for version in table["schema_version"].unique():
        check_schema_version(version)
    return table.drop(columns="schema_version")


def write_json(document: Dict[str, object], path: str) -> str:
    """Write a document with a schema_version key, sorted keys, stable formatting."""
    payload = _plain(dict(document))
    payload["schema_version"] = SCHEMA_VERSION
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_summary(path: str) -> Dict[str, object]:
    """
    Load a summary document.

    Raises:
        SchemaVersionError: Missing or unknown schema version
    """
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    if "schema_version" not in document:
        raise SchemaVersionError(f"{path} carries no schema_version")
    check_schema_version(document["schema_version"])
    return document


def write_metadata(out_dir: str, command: str, config: Optional[Dict[str, object]] = None) -> str:
    """
    Sidecar with timestamps and library versions, outside the determinism guarantee.
    """
    metadata = {
        "command": command,
        "created": datetime.now().isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }
    if config is not None:
        metadata["config"] = config
    return write_json(metadata, os.path.join(out_dir, "metadata.json"))


def write_excel(tables: Dict[str, pd.DataFrame], path: str) -> str:
    """One sheet per table."""
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        for name, frame in tables.items():
            frame.to_excel(writer, sheet_name=name[:31], index=False)
    return path


def write_run(result, out_dir: str, formats: Iterable[str] = ("csv",)) -> Dict[str, str]:
    """
    Write every table and the summary of a simulation run.

    Args:
        result (SimulationResult): Finished run
        out_dir (str): Output directory (created if missing)
        formats (Iterable[str]): csv and/or xlsx

    Returns:
        Dict[str, str]: Name to written path
    """
    os.makedirs(out_dir, exist_ok=True)
    formats = set(formats)
    tables = {name: getattr(result, name) for name in RESULT_TABLES}
    written = {}
    if "csv" in formats:
        for name, frame in tables.items():
            written[name] = write_table(frame, os.path.join(out_dir, f"{name}.csv"))
    if "xlsx" in formats:
        written["workbook"] = write_excel(tables, os.path.join(out_dir, "results.xlsx"))
    written["summary"] = write_json(result.summary, os.path.join(out_dir, "summary.json"))
    written["metadata"] = write_metadata(out_dir, "simulate", result.config.to_dict())
    return written


def write_sweep(frame: pd.DataFrame, out_dir: str, formats: Iterable[str] = ("csv",),
                config: Optional[Dict[str, object]] = None) -> Dict[str, str]:
    """Write the sweep map table and a small summary of status counts."""
    os.makedirs(out_dir, exist_ok=True)
    formats = set(formats)
    written = {}
    if "csv" in formats:
        written[SWEEP_TABLE] = write_table(frame, os.path.join(out_dir, f"{SWEEP_TABLE}.csv"))
    if "xlsx" in formats:
        written["workbook"] = write_excel({SWEEP_TABLE: frame},
                                          os.path.join(out_dir, "sweep.xlsx"))
    summary = {
        "points": int(len(frame)),
        "status_counts": {k: int(v) for k, v in frame["status"].value_counts().sort_index().items()},
        "regions": sorted(frame["region"].unique().tolist()),
    }
    written["summary"] = write_json(summary, os.path.join(out_dir, "sweep_summary.json"))
    written["metadata"] = write_metadata(out_dir, "sweep", config)
    return written
