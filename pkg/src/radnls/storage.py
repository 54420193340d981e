"""On-disk formats: fields (binary npz / CSV), spectral data, branches, traces."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import GridSpec, RadialField

FIELD_FORMAT_VERSION = 1
BRANCH_FORMAT_VERSION = 1


def _grid_header(grid: GridSpec) -> dict:
    return {"dim": grid.dim, "r_max": grid.r_max, "m": grid.m}


def _grid_from_header(h) -> GridSpec:
    return GridSpec(int(h["dim"]), float(h["r_max"]), int(h["m"]))


def save_field(path, f: RadialField):
    """Binary field dump; bit-exact round trip."""
    np.savez(path, version=FIELD_FORMAT_VERSION, dim=f.grid.dim,
             r_max=f.grid.r_max, m=f.grid.m, values=f.values)


def load_field(path) -> RadialField:
    with np.load(path) as z:
        grid = GridSpec(int(z["dim"]), float(z["r_max"]), int(z["m"]))
        return RadialField(grid, z["values"])


def save_field_csv(path, f: RadialField):
    """Header row (dim, r_max, m) then rows r_j, Re f, Im f."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", f.grid.dim, "r_max", repr(f.grid.r_max), "m", f.grid.m])
        w.writerow(["r", "re", "im"])
        for r, v in zip(f.grid.r, f.values):
            w.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag))])


def load_field_csv(path) -> RadialField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    grid = GridSpec(int(head[1]), float(head[3]), int(head[5]))
    vals = np.array([complex(float(r[1]), float(r[2])) for r in rows[2:]])
    return RadialField(grid, vals)


def save_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read JSON from {path}: {exc}") from exc


def save_table_csv(path, columns: dict[str, np.ndarray]):
    """Column-oriented CSV with repr-exact floats (deterministic output)."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    n = len(arrays[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(n):
            w.writerow([repr(float(a[i])) for a in arrays])


def load_table_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    if data.size == 0:
        return {n: np.array([]) for n in names}
    return {n: data[:, i] for i, n in enumerate(names)}
