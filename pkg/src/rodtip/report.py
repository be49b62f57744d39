"""Deterministic CSV/JSON writers. Every file carries the resolved run configuration."""
from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "{:.17g}"


def clean(obj):
    """Convert numpy scalars, enums, tuples and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(payload) -> str:
    return json.dumps(clean(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def write_json(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    body["config"] = config
    path.write_text(dumps(body))
    return path


def write_csv(path, rows, columns, config: dict, comments=()) -> Path:
    """Write ``rows`` (dicts) with a ``# config: {...}`` header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write("# config: " + json.dumps(clean(config), sort_keys=True, allow_nan=False) + "\n")
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
    return path


def write_snapshot(path, psi, config: dict, extra=None) -> Path:
    """theta, re_psi, im_psi, density for one WaveFunction (plus optional extra columns)."""
    extra = extra or {}
    columns = ["theta", "re_psi", "im_psi", "density", *extra]
    theta, amps, rho = psi.theta, psi.amplitudes, psi.density
    rows = []
    for j in range(theta.size):
        row = {"theta": theta[j], "re_psi": amps[j].real, "im_psi": amps[j].imag, "density": rho[j]}
        for name, col in extra.items():
            row[name] = col[j]
        rows.append(row)
    engine = psi.meta.get("engine", "")
    return write_csv(path, rows, columns, config,
                     comments=(f"engine: {engine}", "time: " + FLOAT_FORMAT.format(psi.t)))


def read_csv(path):
    """Rows of a file written by :func:`write_csv`, values left as strings."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
