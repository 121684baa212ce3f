"""Snapshot files and exports.

EULF1 layout (little-endian)::

    b"EULF"  u32 version=1  u32 n  f64 gamma  f64 time  planes...

followed by ``P`` row-major ``n x n`` float64 planes, one per variable.  Full
states carry the four planes ``(rho, m1, m2, E)``; derived fields (Cesàro
averages, variances) are stored as one plane.  Planes are indexed ``[i, j]``
with ``i`` along ``x1``, matching :class:`~kconv.euler.Grid2D`.
"""
from __future__ import annotations

import re
import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .euler import ConservedField, GasModel, Grid2D
from .timeloop import DIAGNOSTIC_COLUMNS

MAGIC = b"EULF"
VERSION = 1
_HEADER = struct.Struct("<4sIIdd")


class Snapshot(NamedTuple):
    n: int
    gamma: float
    time: float
    planes: np.ndarray  # (P, n, n)


def write_eulf(path, planes, gamma: float, time: float):
    planes = np.asarray(planes, dtype="<f8")
    if planes.ndim == 2:
        planes = planes[None]
    P, n, m = planes.shape
    if n != m:
        raise ValueError("EULF planes must be square")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, float(gamma), float(time)))
        fh.write(np.ascontiguousarray(planes).tobytes())


def write_state(path, state: ConservedField, gas: GasModel, time: float):
    write_eulf(path, state.U, gas.gamma, time)


def read_eulf(path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ConfigError(f"{path}: truncated EULF header")
    magic, version, n, gamma, time = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ConfigError(f"{path}: not an EULF file")
    if version != VERSION:
        raise ConfigError(f"{path}: unsupported EULF version {version}")
    body = len(data) - _HEADER.size
    plane = 8 * n * n
    if n == 0 or body % plane:
        raise ConfigError(f"{path}: payload of {body} bytes does not hold {n}x{n} planes")
    planes = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(body // plane, n, n)
    return Snapshot(n, gamma, time, planes.astype(np.float64))


def read_state(path, boundary="periodic") -> tuple[ConservedField, Snapshot]:
    snap = read_eulf(path)
    if snap.planes.shape[0] != 4:
        raise ConfigError(f"{path}: holds {snap.planes.shape[0]} plane(s), a state needs 4")
    return ConservedField(Grid2D(snap.n, boundary), snap.planes.copy()), snap


def write_cells_csv(path, state: ConservedField):
    """One row per cell: ``i,j,rho,m1,m2,E``."""
    n = state.n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    U = state.U.reshape(4, -1)
    with open(path, "w") as fh:
        fh.write("i,j,rho,m1,m2,E\n")
        for row in zip(i.ravel(), j.ravel(), *U):
            fh.write(f"{row[0]},{row[1]}," + ",".join(f"{v:.17g}" for v in row[2:]) + "\n")


def write_diagnostics_csv(path, trace):
    with open(path, "w") as fh:
        fh.write(",".join(DIAGNOSTIC_COLUMNS) + "\n")
        for r in trace.rows:
            fh.write(f"{r[0]}," + ",".join(f"{v:.17g}" for v in r[1:]) + "\n")


def write_pgm(path, field: np.ndarray):
    """8-bit binary PGM with linear min-max scaling; the range goes to a
    ``.txt`` sidecar next to the image.

    Rows of the image run from top (large ``x2``) to bottom, columns along
    ``x1``.
    """
    field = np.asarray(field, dtype=np.float64)
    lo, hi = float(np.min(field)), float(np.max(field))
    span = hi - lo
    scaled = np.zeros_like(field) if span == 0.0 else (field - lo) / span
    img = np.round(255.0 * scaled).astype(np.uint8).T[::-1]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    path.with_suffix(".txt").write_text(f"min={lo:.17g}\nmax={hi:.17g}\n")
    return lo, hi


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ConfigError(f"{path}: not a binary PGM")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data, dtype=np.uint8, count=w * h, offset=m.end()).reshape(h, w)
