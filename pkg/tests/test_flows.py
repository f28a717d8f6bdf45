import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdl import constructions as C
from vdl import flows as F
from vdl.errors import (ConfigurationError, DomainEscapeError, NonDiffeomorphismError,
                        StateError)
from vdl.spectral import Grid1D


def test_options_validation():
    with pytest.raises(ConfigurationError):
        F.FlowOptions(dt=0.05)
    with pytest.raises(ConfigurationError):
        F.FlowOptions(integrator="euler")
    assert F.FlowOptions.stable_for(1e4).dt == pytest.approx(2e-4)
    assert F.FlowOptions.stable_for(0.0).dt == 1e-3


def test_constant_field_translates():
    x = F.integrate_particles(F.constant_field(1.0), 0.0, 1.0, [0.0])
    assert x[0, 0] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_bump_field_moves_origin_to_one(n):
    fld = F.translating_bump_field(n)
    x = F.integrate_particles(fld, 0.0, 1.0, [0.0], F.FlowOptions.stable_for(fld.rate))
    assert x[0, 0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("frame", ["lab", "comoving"])
def test_planar_flow_follows_the_curve(frame):
    fld = F.planar_shear_field(3)
    xs = np.linspace(-1.8, 1.8, 13)
    starts = np.stack([xs, np.zeros_like(xs)], axis=1)
    out = F.integrate_particles(fld, 0.0, 1.0, starts, F.FlowOptions(frame=frame))
    np.testing.assert_allclose(out[:, 0], xs, atol=1e-6)
    np.testing.assert_allclose(out[:, 1], C.g_profile(1.0, xs), atol=1e-6)


@given(st.floats(-1.5, 2.5), st.integers(1, 4))
def test_reverse_time_recovers_start(x0, n):
    fld = F.translating_bump_field(n)
    opts = F.FlowOptions.stable_for(fld.rate)
    fwd = F.integrate_particles(fld, 0.0, 1.0, [x0], opts)
    back = F.integrate_particles(fld, 1.0, 0.0, fwd, opts)
    assert abs(back[0, 0] - x0) < 1e-8


def test_domain_escape_names_particle():
    with pytest.raises(DomainEscapeError) as info:
        F.integrate_particles(F.constant_field(1.0), 0.0, 1.0, [0.0, 0.5], domain=((-1.0,), (1.2,)))
    assert info.value.index == 1


def test_zero_field_gives_identity_path():
    grid = Grid1D(64, 4.0)
    path = F.integrate_flow_map(F.zero_field(1), 0.0, 1.0, grid)
    np.testing.assert_array_equal(path.positions[-1], path.reference)
    assert path.n_knots >= 21 and np.all(np.diff(path.times) <= 0.05 + 1e-12)


def test_flow_map_displaces_unit_interval():
    fld = F.translating_bump_field(4)
    ref = np.linspace(0.0, 1.0, 201)
    path = F.integrate_flow_map(fld, 0.0, 1.0, ref, F.FlowOptions.stable_for(fld.rate))
    assert path.positions[-1, 1:, 0].min() > 1.0


def test_monotonicity_violation_raises():
    with pytest.raises(NonDiffeomorphismError):
        F.check_monotone(np.array([0.0, 0.2, 0.1]), 0.1, knot=3)


def test_jacobian_of_linear_stretch():
    fld = F.linear_stretch_field()
    pts = np.array([[0.3, -0.2], [1.0, 2.0]])
    path = F.integrate_flow_map(fld, 0.0, 1.0, pts, F.FlowOptions(jacobian_tracking=True))
    for k in (0, 10, path.n_knots - 1):
        np.testing.assert_allclose(F.jacobian_determinant(path, k), np.exp(path.times[k]), rtol=1e-10)


def test_jacobian_requires_tracking():
    path = F.integrate_flow_map(F.zero_field(2), 0.0, 1.0, np.zeros((3, 2)))
    with pytest.raises(StateError):
        F.jacobian_determinant(path, 0)
    ident = F.identity_path(Grid1D(16, 1.0))
    np.testing.assert_array_equal(ident.positions[-1], ident.reference)


@pytest.mark.parametrize("n", [2, 4])
def test_planar_flow_preserves_area(n):
    fld = F.planar_shear_field(n)
    rng = np.random.default_rng(1)
    pts = rng.uniform([-1, 0], [1, 1], size=(100, 2))
    opts = F.FlowOptions(jacobian_tracking=True, frame="comoving")
    path = F.integrate_flow_map(fld, 0.0, 1.0, pts, opts)
    worst = max(np.abs(F.jacobian_determinant(path, k) - 1).max() for k in range(path.n_knots))
    assert worst < 1e-6


def test_comoving_and_lab_agree_on_jacobians():
    fld = F.planar_shear_field(2)
    pts = np.array([[0.3, 0.4], [-0.7, 0.9]])
    a, Ja = F.integrate_particles(fld, 0.0, 1.0, pts, F.FlowOptions(dt=2.5e-4), return_jacobian=True)
    b, Jb = F.integrate_particles(fld, 0.0, 1.0, pts, F.FlowOptions(dt=2.5e-4, frame="comoving"),
                                  return_jacobian=True)
    np.testing.assert_allclose(a, b, atol=1e-9)
    np.testing.assert_allclose(Ja, Jb, atol=1e-7)


def test_group_property():
    fld = F.planar_shear_field(3)
    pts = np.array([[0.2, 0.3], [-1.1, 0.7], [0.9, -0.4]])
    mid = F.integrate_particles(fld, 0.0, 0.5, pts)
    two = F.integrate_particles(fld, 0.5, 1.0, mid)
    one = F.integrate_particles(fld, 0.0, 1.0, pts)
    assert np.abs(two - one).max() < 1e-9


def test_rk4_order():
    fld = F.planar_shear_field(2)
    pts = np.array([[0.3, 0.2], [-0.5, 0.6], [0.1, 0.05]])
    ladder = [2e-3, 1e-3, 5e-4]
    ref = F.integrate_particles(fld, 0.0, 1.0, pts, F.FlowOptions(dt=ladder[-1] / 16))
    errs = [np.abs(F.integrate_particles(fld, 0.0, 1.0, pts, F.FlowOptions(dt=d)) - ref).max()
            for d in ladder]
    slope = np.polyfit(np.log(ladder), np.log(errs), 1)[0]
    assert abs(slope - 4) < 0.3


def test_support_preservation():
    fld = F.translating_bump_field(3, shift=0.5)
    ref = np.linspace(-3.0, 4.0, 141)
    out = F.integrate_particles(fld, 0.0, 1.0, ref, F.FlowOptions.stable_for(fld.rate))[:, 0]
    (lo,), (hi,) = fld.support
    moved = np.abs(out - ref) > 0
    assert np.all((ref[moved] > lo - 1.0) & (ref[moved] < hi + 1.0))


def test_path_directory_round_trip(tmp_path):
    fld = F.translating_bump_field(2)
    path = F.integrate_flow_map(fld, 0.0, 1.0, np.linspace(-1, 2, 31))
    path.to_directory(tmp_path / "p")
    back = F.DiffeoPath.from_directory(tmp_path / "p")
    np.testing.assert_array_equal(back.times, path.times)
    np.testing.assert_array_equal(back.positions, path.positions)
    np.testing.assert_array_equal(back.velocities, path.velocities)


def test_field_descriptor_round_trip():
    fld = F.translating_bump_field(3, shift=0.25)
    again = F.field_from_descriptor(fld.descriptor)
    pts = np.linspace(-1, 2, 7)[:, None]
    np.testing.assert_array_equal(again.velocity(0.3, pts), fld.velocity(0.3, pts))
