"""Field snapshot serialization and small CSV helpers.

Binary snapshot layout (all little-endian)::

    bytes 0..3    magic b"KKW1"
    int64         n_points
    float64       x_min
    float64       x_max
    float64       time
    float64 * 2n  interleaved re, im of psi(x_j)
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import SpatialGrid, WaveFunction

MAGIC = b"KKW1"
_HEADER = struct.Struct("<4sqddd")


def write_snapshot(path, wf: WaveFunction) -> None:
    g = wf.grid
    data = np.empty(2 * g.n_points, dtype="<f8")
    data[0::2] = wf.psi.real
    data[1::2] = wf.psi.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.n_points, g.x_min, g.x_max, float(wf.time)))
        fh.write(data.tobytes())


def read_snapshot(path) -> WaveFunction:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated snapshot header")
    magic, n, x_min, x_max, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != 2 * n:
        raise ConfigurationError(f"{path}: expected {2 * n} floats, found {data.size}")
    psi = data[0::2] + 1j * data[1::2]
    return WaveFunction(SpatialGrid(x_min, x_max, int(n)), psi, time)


def write_field_csv(path, wf: WaveFunction) -> None:
    """Columns: x, re, im, |psi|^2."""
    arr = np.column_stack([wf.grid.x, wf.psi.real, wf.psi.imag, np.abs(wf.psi) ** 2])
    np.savetxt(path, arr, delimiter=",", header="x,re,im,abs2", comments="", fmt="%.17g")


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def read_columns(path, min_cols=2, max_cols=3) -> np.ndarray:
    """Numeric CSV with an optional header line; returns an (n, k) array."""
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            row = [c.strip() for c in row if c.strip() != ""]
            if not row or row[0].startswith("#"):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                if i == 0:
                    continue  # header
                raise ConfigurationError(f"{path}:{i + 1}: non-numeric row {row}")
            if not (min_cols <= len(vals) <= max_cols):
                raise ConfigurationError(
                    f"{path}:{i + 1}: expected {min_cols}-{max_cols} columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigurationError(f"{path}: ragged rows")
    return np.array(rows)
