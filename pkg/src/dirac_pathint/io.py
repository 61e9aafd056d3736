"""
CSV and metadata writers.  Floats are written with 17 significant digits so
files round-trip exactly and repeated runs are byte-identical.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import SpinorField

REPORT_HEADER = ["scenario", "check", "value", "bound", "verdict", "tolerance"]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_meta(csv_path, meta: dict) -> Path:
    """Sidecar ``<file>.meta.json`` next to a CSV output."""
    path = Path(str(csv_path) + ".meta.json")
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path


def field_header(f: SpinorField) -> list:
    coords = [f"x_{j + 1}" for j in range(f.grid.d)]
    comps = [p for a in range(f.N) for p in (f"re_{a + 1}", f"im_{a + 1}")]
    return coords + comps


def field_rows(f: SpinorField):
    """Row-major over the grid: coordinates, then Re/Im per spinor component."""
    pts = f.grid.flat_points()
    vals = f.values.reshape(-1, f.N)
    ri = np.empty((vals.shape[0], 2 * f.N))
    ri[:, 0::2] = vals.real
    ri[:, 1::2] = vals.imag
    return np.hstack([pts, ri]).tolist()


def write_field(path, f: SpinorField, meta: dict) -> Path:
    p = write_csv(path, field_header(f), field_rows(f))
    write_meta(p, {**meta, "h": f.grid.h, "n": f.grid.n, "d": f.grid.d, "half_width": f.grid.L})
    return p


def read_field(path, grid) -> SpinorField:
    """Inverse of :func:`write_field`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    comps = data[:, grid.d:]
    vals = comps[:, 0::2] + 1j * comps[:, 1::2]
    return SpinorField(grid, vals.reshape(grid.shape + (vals.shape[1],)))
