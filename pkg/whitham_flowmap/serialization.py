"""
Serialization utilities for reading and writing data files.

Handles the report document (JSON, floats at 17 significant digits), CSV
trajectories, binary field snapshots and JSON run configurations.
"""

import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Optional, TextIO, Union

import numpy as np

from .errors import ConfigurationError
from .models import Diagnostics, ExperimentReport, Field, PeriodicGrid
from .reports import report_document


FLOAT_FORMAT = ".17g"
BINARY_HEADER = np.dtype([("length", "<f8"), ("n_modes", "<i8")])


class ReportEncoder(json.JSONEncoder):
    """JSON encoder that handles numpy scalars and arrays, enums and paths."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, FLOAT_FORMAT)


def _plain(obj: Any) -> Any:
    if isinstance(obj, (np.integer, np.floating, np.ndarray, Enum, Path)):
        return ReportEncoder().default(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def render_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """
    Render a JSON document with every float at 17 significant digits.

    Non-finite floats become the strings "nan", "inf" and "-inf". Key order
    is preserved, so equal inputs render to identical bytes.
    """
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {render_json(v, indent, _level + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(render_json(v, indent, _level + 1) for v in obj) + "]"
        items = [f"{pad}{render_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def save_json(data: Any, path: Union[str, Path]):
    """Save auxiliary data (run reports, configs) to a JSON file."""
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, cls=ReportEncoder)


# ============================================================================
# Reports
# ============================================================================

def save_experiment_report(report: ExperimentReport, path: Union[str, Path]):
    """Save the report document to JSON."""
    with open(path, 'w') as f:
        f.write(render_json(report_document(report)))
        f.write("\n")


def load_report_document(path: Union[str, Path]) -> dict:
    with open(path, 'r') as f:
        return json.load(f)


def save_trajectories(report: ExperimentReport, directory: Union[str, Path], *,
                      include_slope: bool = False) -> list[Path]:
    """
    Save one diagnostics CSV per instance trajectory (see save_diagnostics_csv).

    Returns the written paths in the report's instance order.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, diag in report.trajectories.items():
        path = directory / f"{report.experiment_id}_{name}.csv"
        save_diagnostics_csv(diag, path, include_slope=include_slope)
        written.append(path)
    return written


# ============================================================================
# Diagnostics
# ============================================================================

def save_diagnostics_csv(diag: Diagnostics, path: Union[str, Path], *,
                         include_slope: bool = False):
    """
    Save snapshot series to CSV.

    The header always starts t,mean,l2,hamiltonian,hs_norm. max_slope follows
    when include_slope is set, then hr_norm when an auxiliary index was
    recorded.
    """
    fieldnames = ["t", "mean", "l2", "hamiltonian", "hs_norm"]
    columns = [diag.times, diag.mean, diag.l2, diag.hamiltonian, diag.hs_norm]
    if include_slope:
        fieldnames.append("max_slope")
        columns.append(diag.max_slope)
    if diag.hr_norm is not None:
        fieldnames.append("hr_norm")
        columns.append(diag.hr_norm)

    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(fieldnames)
        for values in zip(*columns):
            writer.writerow([format(float(v), FLOAT_FORMAT) for v in values])


def load_diagnostics_csv(path: Union[str, Path], s: float) -> Diagnostics:
    """Load a CSV written by save_diagnostics_csv (fitted constants are not stored)."""
    diag = Diagnostics(s=s)
    with open(path, 'r', newline='') as f:
        reader = csv.DictReader(f)
        rows = list(reader)
    for row in rows:
        row = {k.strip(): float(v) for k, v in row.items()}
        diag.times.append(row["t"])
        diag.mean.append(row["mean"])
        diag.l2.append(row["l2"])
        diag.hamiltonian.append(row["hamiltonian"])
        diag.hs_norm.append(row["hs_norm"])
        if "max_slope" in row:
            diag.max_slope.append(row["max_slope"])
        if "hr_norm" in row:
            if diag.hr_norm is None:
                diag.hr_norm = []
            diag.hr_norm.append(row["hr_norm"])
    return diag


# ============================================================================
# Fields
# ============================================================================

def save_field_csv(field: Field, path: Union[str, Path]):
    """Save a field as plot-ready two-column CSV (x, u)."""
    with open(path, 'w', newline='') as f:
        write_columns(f, ("x", "u"), field.grid.x, field.values)


def write_columns(stream: TextIO, header: tuple[str, str], a, b):
    """Two-column CSV with a header row."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for x, y in zip(np.atleast_1d(a), np.atleast_1d(b)):
        writer.writerow([format(float(x), FLOAT_FORMAT), format(float(y), FLOAT_FORMAT)])


def save_field_binary(field: Field, path: Union[str, Path]):
    """
    Save a field as little-endian binary: length (f8), n_modes (i8), then
    the n_modes collocation values (f8).
    """
    header = np.array([(field.grid.length, field.grid.n_modes)], dtype=BINARY_HEADER)
    with open(path, 'wb') as f:
        f.write(header.tobytes())
        f.write(np.asarray(field.values, dtype="<f8").tobytes())


def load_field_binary(path: Union[str, Path]) -> Field:
    raw = Path(path).read_bytes()
    if len(raw) < BINARY_HEADER.itemsize:
        raise ConfigurationError(f"{path} is too short to hold a field header")
    header = np.frombuffer(raw[:BINARY_HEADER.itemsize], dtype=BINARY_HEADER)[0]
    n_modes = int(header["n_modes"])
    payload = np.frombuffer(raw[BINARY_HEADER.itemsize:], dtype="<f8")
    if payload.size != n_modes:
        raise ConfigurationError(
            f"{path} declares {n_modes} values but holds {payload.size}"
        )
    return Field(PeriodicGrid(float(header["length"]), n_modes), payload.astype(float))


def load_field(path: Union[str, Path]) -> Field:
    """
    Load a field from binary (.bin) or two-column CSV (x, u).

    For CSV the torus length is recovered from the uniform spacing of x.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"field file not found: {path}")
    if path.suffix.lower() == '.bin':
        return load_field_binary(path)
    if path.suffix.lower() not in ('.csv', '.txt'):
        raise ConfigurationError(f"Field files must be .bin or .csv. Got: {path.suffix}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise ConfigurationError(f"{path} must hold two columns x, u with a header row")
    x, u = data[:, 0], data[:, 1]
    dx = x[1] - x[0]
    if not dx > 0 or not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
        raise ConfigurationError(f"{path} is not sampled on a uniform grid")
    return Field(PeriodicGrid(float(dx * x.size), int(x.size)), u)


# ============================================================================
# Run configuration
# ============================================================================

def load_run_config(path: Union[str, Path, None]) -> dict[str, Any]:
    """
    Load command parameters from a JSON config file.

    Keys beginning with an underscore are documentation and skipped; dashes
    in keys are read as underscores, so `t-star` and `t_star` are the same.
    """
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return {
        k.replace("-", "_"): v for k, v in data.items() if not k.startswith("_")
    }


def config_list(value: Optional[Any], cast=float) -> Optional[list]:
    """Read a list either as a JSON array or as a comma-separated string."""
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    try:
        return [cast(p) for p in parts]
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"cannot read {value!r} as a list of numbers") from e
