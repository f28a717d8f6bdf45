import io

import numpy as np
import pytest

from vdl import gridio
from vdl.errors import ConfigurationError
from vdl.spectral import Grid1D, Grid2D, GridFunction1D, GridFunction2D


def _f1():
    g = Grid1D(16, 2.0, -1.0)
    return GridFunction1D(g, np.cos(np.pi * g.x) / 3)


def _f2():
    g = Grid2D(8, 16, 1.0, 2.0, 0.0, -1.0)
    X, Y = g.mesh()
    return GridFunction2D(g, np.sin(X) * Y / 7)


def test_header_sizes():
    assert gridio.header_size(1) == 32
    assert len(gridio.to_bytes(_f1())) == 32 + 8 * 16
    assert gridio.header_size(2) == 56


@pytest.mark.parametrize("make", [_f1, _f2])
def test_binary_round_trip(make, tmp_path):
    f = make()
    gridio.write_binary(f, tmp_path / "a.vdlgrid")
    back = gridio.read_binary(tmp_path / "a.vdlgrid")
    np.testing.assert_array_equal(back.values, f.values)
    assert back.grid == f.grid


@pytest.mark.parametrize("make", [_f1, _f2])
def test_csv_round_trip(make, tmp_path):
    f = make()
    gridio.write_csv(f, tmp_path / "a.csv")
    back = gridio.read_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(back.values, f.values)
    assert back.grid.shape == f.grid.shape if hasattr(f.grid, "shape") else True


def test_csv_to_stream_uses_crlf():
    buf = io.StringIO()
    gridio.write_csv(_f1(), buf)
    text = buf.getvalue()
    assert text.startswith("x,value\r\n")
    assert text.count("\r\n") == 17


def test_rejects_bad_files(tmp_path):
    with pytest.raises(ConfigurationError):
        gridio.from_bytes(b"NOTAGRID" + bytes(40))
    with pytest.raises(ConfigurationError):
        gridio.from_bytes(gridio.to_bytes(_f1())[:-8])
    p = tmp_path / "bad.csv"
    p.write_text("a,b\r\n1,2\r\n")
    with pytest.raises(ConfigurationError):
        gridio.read_csv(p)
