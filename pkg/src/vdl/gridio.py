"""Reading and writing grid functions (CSV and a small binary format).

Binary layout (little endian)::

    magic   8 bytes  b"VDLGRID1"
    dims    uint32
    n       uint32 per axis
    L       float64 per axis
    offset  float64 per axis
    padding zero bytes up to a multiple of 8
    values  float64, C order (y fastest in 2D)

In 1D the header is exactly 32 bytes.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .spectral import Grid1D, Grid2D, GridFunction1D, GridFunction2D

MAGIC = b"VDLGRID1"


def header_size(dims):
    raw = 8 + 4 + dims * (4 + 8 + 8)
    return -(-raw // 8) * 8


def _axes(f):
    g = f.grid
    if isinstance(f, GridFunction1D):
        return [g.n_points], [g.period], [g.offset]
    return [g.n_x, g.n_y], [g.period_x, g.period_y], [g.offset_x, g.offset_y]


def to_bytes(f):
    ns, Ls, offs = _axes(f)
    dims = len(ns)
    head = MAGIC + struct.pack(f"<I{dims}I{dims}d{dims}d", dims, *ns, *Ls, *offs)
    head += b"\0" * (header_size(dims) - len(head))
    return head + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def from_bytes(data):
    if data[:8] != MAGIC:
        raise ConfigurationError("not a grid file (bad magic)")
    (dims,) = struct.unpack_from("<I", data, 8)
    if dims not in (1, 2):
        raise ConfigurationError(f"unsupported dimension {dims}")
    fields = struct.unpack_from(f"<{dims}I{dims}d{dims}d", data, 12)
    ns, Ls, offs = fields[:dims], fields[dims:2 * dims], fields[2 * dims:]
    start = header_size(dims)
    count = int(np.prod(ns))
    if len(data) != start + 8 * count:
        raise ConfigurationError("grid file length does not match its header")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=start)
    if dims == 1:
        return GridFunction1D(Grid1D(ns[0], Ls[0], offs[0]), values.astype(float))
    grid = Grid2D(ns[0], ns[1], Ls[0], Ls[1], offs[0], offs[1])
    return GridFunction2D(grid, values.reshape(ns).astype(float))


def write_binary(f, path):
    Path(path).write_bytes(to_bytes(f))


def read_binary(path):
    return from_bytes(Path(path).read_bytes())


def write_csv(f, path):
    """Write ``f`` as CSV to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(f, path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(f, fh)


def _write_rows(f, fh):
    w = csv.writer(fh, lineterminator="\r\n")
    if isinstance(f, GridFunction1D):
        w.writerow(["x", "value"])
        for x, v in zip(f.grid.x, f.values):
            w.writerow([repr(float(x)), repr(float(v))])
    else:
        w.writerow(["x", "y", "value"])
        gx, gy = f.grid.axes
        ys = gy.x
        for i, x in enumerate(gx.x):
            for j, y in enumerate(ys):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(f.values[i, j]))])


def _axis_from_samples(coords, name):
    n = coords.size
    if n < 2:
        raise ConfigurationError(f"{name}: need at least two samples")
    h = (coords[-1] - coords[0]) / (n - 1)
    return Grid1D(n, n * h, coords[0])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    if header == ["x", "value"]:
        return GridFunction1D(_axis_from_samples(body[:, 0], "x"), body[:, 1])
    if header == ["x", "y", "value"]:
        xs = np.unique(body[:, 0])
        ys = np.unique(body[:, 1])
        gx = _axis_from_samples(xs, "x")
        gy = _axis_from_samples(ys, "y")
        grid = Grid2D(gx.n_points, gy.n_points, gx.period, gy.period, gx.offset, gy.offset)
        return GridFunction2D(grid, body[:, 2].reshape(grid.shape))
    raise ConfigurationError(f"unrecognised CSV header {header!r}")
