"""Plot-ready CSV dumps of trajectories, wave fields and fluid states.

Numbers are written with 17 significant digits so that a dump round-trips
bit-exactly.  Metadata, where present, precedes the column header as
``# key=value`` comment lines.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .fluid import FluidState
from .phase_space import Trajectory
from .quantum import WaveField


def _fmt(v):
    return format(float(v), ".17g")


def trajectory_columns(tr: Trajectory):
    N, d = tr.system.N, tr.system.d
    xs = [f"x_{I}_{i}" for I in range(N) for i in range(d)]
    ps = [f"p_{I}_{i}" for I in range(N) for i in range(d)]
    return ["t"] + xs + ps


def _rows(obj):
    if isinstance(obj, Trajectory):
        K = len(obj)
        data = np.column_stack([obj.times, obj.x.reshape(K, -1), obj.p.reshape(K, -1)])
        return {}, trajectory_columns(obj), data
    if isinstance(obj, WaveField):
        meta = {"m": obj.m, "t": obj.t, "x_min": obj.x_min, "x_max": obj.x_max, "n": obj.n}
        return meta, ["x", "re_psi", "im_psi"], np.column_stack([obj.x, obj.psi.real, obj.psi.imag])
    if isinstance(obj, FluidState):
        meta = {"t": obj.t, "gamma0": obj.gamma0, "x_min": obj.x_min, "x_max": obj.x_max, "n": obj.n}
        return meta, ["x", "rho", "u", "eps", "p"], np.column_stack([obj.x, obj.rho, obj.u, obj.eps, obj.p])
    raise TypeError(f"cannot dump {type(obj).__name__} as CSV")


def to_csv_text(obj) -> str:
    meta, header, data = _rows(obj)
    buf = io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}={val if isinstance(val, int) else _fmt(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in data:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_csv(obj, path) -> Path:
    path = Path(path)
    path.write_text(to_csv_text(obj))
    return path


def read_csv(path):
    """Returns (metadata dict, header list, float array)."""
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = float(val)
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))
