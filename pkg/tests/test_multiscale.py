import numpy as np
import pytest

from vdl import constructions as C
from vdl import multiscale as MS
from vdl.errors import ConfigurationError
from vdl.spectral import Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec, sobolev_norm_1d, sobolev_norm_2d

HALF = MultiplierSpec("inhomogeneous", 0.5)


@pytest.mark.parametrize("n", [1, 3, 6])
@pytest.mark.parametrize("spec", [HALF, MultiplierSpec("homogeneous", 1.0), MultiplierSpec("inhomogeneous", 0.0)])
def test_gram_norm_matches_resolved_grid(n, spec):
    g = Grid1D(2 ** 15, 8.0)
    grid_norm = sobolev_norm_1d(GridFunction1D.sample(g, lambda x: C.xi_n(n, x)), spec)
    assert MS.xi_norm(n, spec) == pytest.approx(grid_norm, rel=5e-5)


def test_gram_is_symmetric_positive():
    G = MS.dyadic_gram(MS.line_weight(HALF), 12)
    np.testing.assert_array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() > 0
    with pytest.raises(ConfigurationError):
        MS.dyadic_gram(MS.line_weight(HALF), 0)


def test_combination_norm_of_single_dilate():
    G = MS.dyadic_gram(MS.line_weight(HALF), 4)
    c = np.zeros(4)
    c[2] = 1.0
    assert MS.combination_norm(c, G) == pytest.approx(np.sqrt(G[2, 2]))


def test_sheared_weight_spline_matches_direct():
    t = 0.6
    w = MS.ShearedWeight(C.hamiltonian_1d, lambda x: C.g_profile(t, x), lambda x: C.g_profile(t, x, 1), HALF)
    for om in (0.0, 3.3, 17.0, 50.0):
        assert w(np.array([om]))[0] == pytest.approx(w.direct(om), rel=1e-6)
    # past the split the asymptotic branch still tracks the FFT
    assert w(np.array([150.0]))[0] == pytest.approx(w.direct(150.0), rel=2e-3)


def test_planar_norm_matches_grid_at_t0():
    n = 2
    g = Grid2D.square(512, 8.0)
    X, Y = g.mesh()
    f = GridFunction2D(g, C.f_n_2d(n, 0.0, X, Y))
    spec = MultiplierSpec("homogeneous", 1.5)
    assert MS.planar_xi_norm(n, 0.0, spec) == pytest.approx(sobolev_norm_2d(f, spec), rel=1e-3)


def test_composition_factor_is_one_without_shear():
    K, ratios = MS.composition_factor(0.0)
    assert K == pytest.approx(1.0, abs=1e-12)
    assert len(ratios) == 2 * MS.PLANAR_LEVELS
    K1, _ = MS.composition_factor(1.0)
    assert K1 > 1.0
