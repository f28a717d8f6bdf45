import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdl import constructions as C
from vdl.errors import ConfigurationError, DomainError
from vdl.spectral import (Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec,
                          apply_multiplier, derivative, divergence,
                          perp_gradient_inverse_sqrt_laplacian, sobolev_norm_1d,
                          sobolev_norm_2d, symplectic_gradient_grid, theta_from_velocity)

orders = st.floats(-1.5, 2.0, allow_nan=False)
log_sizes = st.integers(3, 10)


def _smooth(rng, x, period, modes=5, mean=True):
    out = np.full_like(x, rng.normal() if mean else 0.0)
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2) * 0.5 ** k
        out += a * np.cos(2 * np.pi * k * x / period) + b * np.sin(2 * np.pi * k * x / period)
    return out


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid1D(100, 1.0)
    with pytest.raises(ConfigurationError):
        Grid1D(4, 1.0)
    with pytest.raises(ConfigurationError):
        Grid1D(64, -1.0)
    g = Grid1D(64, 8.0)
    assert g.offset == -4.0 and g.spacing == 0.125


def test_grid_function_rejects_nonfinite():
    g = Grid1D(8, 1.0)
    with pytest.raises((ConfigurationError, DomainError, ValueError)):
        GridFunction1D(g, np.array([0, 1, 2, np.nan, 0, 0, 0, 0.0]))


def test_constant_has_zero_homogeneous_norm():
    g = Grid1D(64, 2.0)
    f = GridFunction1D(g, np.full(64, 3.0))
    assert sobolev_norm_1d(f, MultiplierSpec("homogeneous", 0.5)) == 0.0


@given(orders, log_sizes, st.floats(0.5, 20.0))
def test_single_mode_closed_form(s, logn, period):
    g = Grid1D(2 ** logn, period, 0.0)
    f = GridFunction1D(g, np.sin(2 * np.pi * g.x / period))
    expected = math.sqrt(period / 2) * (1 + (2 * np.pi / period) ** 2) ** (s / 2)
    assert sobolev_norm_1d(f, MultiplierSpec("inhomogeneous", s)) == pytest.approx(expected, rel=1e-12)


def test_single_mode_2d():
    g = Grid2D(32, 16, 3.0, 5.0, 0.0, 0.0)
    X, Y = g.mesh()
    f = GridFunction2D(g, np.sin(2 * np.pi * X / 3.0))
    expected = math.sqrt(3.0 * 5.0 / 2) * (1 + (2 * np.pi / 3.0) ** 2) ** 0.25
    assert sobolev_norm_2d(f, MultiplierSpec("inhomogeneous", 0.5)) == pytest.approx(expected, rel=1e-12)
    zero = GridFunction2D(g, np.zeros(g.shape))
    assert sobolev_norm_2d(zero, MultiplierSpec("inhomogeneous", 0.5)) == 0.0


@given(st.integers(0, 2 ** 32 - 1), log_sizes)
def test_parseval(seed, logn):
    rng = np.random.default_rng(seed)
    g = Grid1D(2 ** logn, 3.0)
    f = GridFunction1D(g, rng.normal(size=g.n_points))
    direct = math.sqrt(g.spacing * float(np.sum(f.values ** 2)))
    assert sobolev_norm_1d(f, MultiplierSpec("inhomogeneous", 0.0)) == pytest.approx(direct, rel=1e-12)


@given(st.integers(0, 2 ** 32 - 1), orders, orders)
def test_monotone_in_order(seed, s1, s2):
    rng = np.random.default_rng(seed)
    g = Grid1D(128, 4.0)
    f = GridFunction1D(g, rng.normal(size=128))
    lo, hi = sorted((s1, s2))
    a = sobolev_norm_1d(f, MultiplierSpec("inhomogeneous", lo))
    b = sobolev_norm_1d(f, MultiplierSpec("inhomogeneous", hi))
    assert a <= b * (1 + 1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_tensor_factorisation(seed):
    rng = np.random.default_rng(seed)
    g1 = Grid1D(64, 2 * np.pi, 0.0)
    g2 = Grid2D.square(64, 2 * np.pi, 0.0)
    a = _smooth(rng, g1.x, g1.period)
    b = _smooth(rng, g1.x, g1.period)
    lhs = sobolev_norm_2d(GridFunction2D(g2, np.outer(a, b)), MultiplierSpec("tensor", (0.5, 0.5)))
    m = MultiplierSpec("inhomogeneous", 0.5)
    rhs = sobolev_norm_1d(GridFunction1D(g1, a), m) * sobolev_norm_1d(GridFunction1D(g1, b), m)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_homogeneous_negative_order_needs_mean_zero():
    g = Grid1D(32, 1.0)
    f = GridFunction1D(g, 1.0 + np.sin(2 * np.pi * g.x))
    with pytest.raises(DomainError, match="mean"):
        sobolev_norm_1d(f, MultiplierSpec("homogeneous", -0.5))


def test_apply_multiplier_identity_and_modes():
    g = Grid1D(64, 2 * np.pi, 0.0)
    f = GridFunction1D(g, np.sin(3 * g.x))
    same = apply_multiplier(f, MultiplierSpec("inhomogeneous", 0.0))
    np.testing.assert_allclose(same.values, f.values, atol=1e-14)
    out = apply_multiplier(f, MultiplierSpec("inhomogeneous", 0.7))
    np.testing.assert_allclose(out.values, 10 ** 0.35 * f.values, rtol=1e-12, atol=1e-13)


@given(st.integers(0, 2 ** 32 - 1), st.floats(-1.5, 1.5))
def test_apply_multiplier_round_trip(seed, s):
    rng = np.random.default_rng(seed)
    g = Grid1D(128, 2 * np.pi, 0.0)
    f = GridFunction1D(g, _smooth(rng, g.x, g.period, mean=False))
    for kind in ("inhomogeneous", "homogeneous"):
        m = MultiplierSpec(kind, s)
        back = apply_multiplier(apply_multiplier(f, m), m.inverse())
        scale = np.abs(f.values).max()
        assert np.abs(back.values - f.values).max() <= 1e-10 * scale


@given(st.integers(0, 2 ** 32 - 1))
def test_apply_multiplier_is_self_adjoint(seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(64, 3.0)
    f = GridFunction1D(g, rng.normal(size=64))
    h = GridFunction1D(g, rng.normal(size=64))
    m = MultiplierSpec("inhomogeneous", 0.8)
    lhs = np.dot(apply_multiplier(f, m).values, h.values)
    rhs = np.dot(f.values, apply_multiplier(h, m).values)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_derivative_of_mode():
    g = Grid1D(64, 2 * np.pi, 0.0)
    f = GridFunction1D(g, np.sin(5 * g.x))
    np.testing.assert_allclose(derivative(f).values, 5 * np.cos(5 * g.x), atol=1e-12)


def test_perp_gradient_example():
    g = Grid2D.square(32, 2 * np.pi, 0.0)
    X, Y = g.mesh()
    theta = GridFunction2D(g, np.sin(X) + np.sin(Y))
    u1, u2 = perp_gradient_inverse_sqrt_laplacian(theta)
    np.testing.assert_allclose(u1.values, -np.cos(Y), atol=1e-13)
    np.testing.assert_allclose(u2.values, np.cos(X), atol=1e-13)
    zero = GridFunction2D(g, np.zeros(g.shape))
    z1, z2 = perp_gradient_inverse_sqrt_laplacian(zero)
    assert not z1.values.any() and not z2.values.any()


@given(st.integers(0, 2 ** 32 - 1))
def test_velocity_is_divergence_free_and_inverts(seed):
    rng = np.random.default_rng(seed)
    g = Grid2D.square(32, 2 * np.pi, 0.0)
    # random data without Nyquist content (odd symbols drop those lines)
    spec = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    spec[16, :] = 0
    spec[:, 16] = 0
    vals = np.fft.ifft2(spec).real
    theta = GridFunction2D(g, vals - vals.mean())
    u1, u2 = perp_gradient_inverse_sqrt_laplacian(theta)
    scale = np.abs(theta.values).max()
    assert np.abs(divergence(u1, u2).values).max() < 1e-10 * scale
    back = theta_from_velocity(u1, u2)
    assert np.abs(back.values - theta.values).max() < 1e-10 * scale


def test_perp_gradient_rejects_nonzero_mean():
    g = Grid2D.square(16, 1.0)
    with pytest.raises(DomainError):
        perp_gradient_inverse_sqrt_laplacian(GridFunction2D(g, np.ones(g.shape)))


@given(st.integers(0, 2 ** 32 - 1))
def test_symplectic_gradient_norm_identity(seed):
    rng = np.random.default_rng(seed)
    g = Grid2D.square(32, 2 * np.pi, 0.0)
    X, Y = g.mesh()
    vals = sum(rng.normal() * 0.6 ** (abs(a) + abs(b)) * np.cos(a * X + b * Y + rng.uniform(0, 6))
               for a in range(-3, 4) for b in range(-3, 4) if (a, b) != (0, 0))
    f = GridFunction2D(g, vals - vals.mean())
    u1, u2 = symplectic_gradient_grid(f)
    minus = MultiplierSpec("homogeneous", -0.5)
    lhs = math.sqrt(sobolev_norm_2d(u1, minus) ** 2 + sobolev_norm_2d(u2, minus) ** 2)
    assert lhs == pytest.approx(sobolev_norm_2d(f, MultiplierSpec("homogeneous", 0.5)), rel=1e-10)


def test_xi_8_against_gagliardo_quadrature():
    """Homogeneous part of ||xi_8||_{H^{1/2}} against a Gagliardo double integral.

    On the line, int int |f(x) - f(y)|^2 / |x - y|^2 dx dy = 2 pi ||f||^2_{hom 1/2}.
    The inhomogeneous norm is then sandwiched between L^2 + seminorm over sqrt 2
    and L^2 + seminorm, since sqrt(1 + k^2) lies between (1 + |k|) / sqrt 2 and 1 + |k|.
    """
    g = Grid1D(4096, 8.0)
    f = GridFunction1D.sample(g, lambda x: C.xi_n(8, x))
    hom = sobolev_norm_1d(f, MultiplierSpec("homogeneous", 0.5)) ** 2
    full = sobolev_norm_1d(f, MultiplierSpec("inhomogeneous", 0.5)) ** 2
    # support [-1, 1]; the part of the double integral outside it is explicit
    m = 2048
    h = 2.0 / m
    x = -1.0 + h * (np.arange(m) + 0.5)
    v = C.xi_n(8, x)
    dv = C.xi_n(8, x, 1)
    diff = v[:, None] - v[None, :]
    dist = x[:, None] - x[None, :]
    np.fill_diagonal(dist, 1.0)
    kern = diff ** 2 / dist ** 2
    np.fill_diagonal(kern, dv ** 2)
    inner = kern.sum() * h * h
    outer = 2.0 * np.sum(v ** 2 * (1.0 / (1.0 - x) + 1.0 / (1.0 + x))) * h
    semi = (inner + outer) / (2 * np.pi)
    assert hom == pytest.approx(semi, rel=0.05)
    l2 = np.sum(v ** 2) * h
    assert (l2 + semi) / math.sqrt(2) * 0.95 <= full <= (l2 + semi) * 1.05
    one = sobolev_norm_1d(GridFunction1D.sample(g, lambda x: C.xi_n(1, x)),
                          MultiplierSpec("inhomogeneous", 0.5)) ** 2
    assert 8 * full <= 2.0 * one
