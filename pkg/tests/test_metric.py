import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdl import flows as F
from vdl import metric as M
from vdl.errors import ConfigurationError, InversionError
from vdl.spectral import Grid1D, MultiplierSpec


@pytest.fixture(scope="module")
def bump_path():
    fld = F.translating_bump_field(2)
    ref = np.linspace(-2.0, 3.0, 401)
    return F.integrate_flow_map(fld, 0.0, 1.0, ref, F.FlowOptions.stable_for(fld.rate))


def test_simpson_is_exact_for_cubics():
    t = F.knot_times(0.0, 1.0)
    w = M.simpson_weights(t)
    assert w @ t ** 3 == pytest.approx(0.25, abs=1e-15)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


def test_identity_path_has_zero_length():
    path = F.identity_path(Grid1D(256, 8.0))
    rep = M.path_length(path, 0.5)
    assert rep.length == 0.0 and rep.energy == 0.0


def test_length_and_energy_relation(bump_path):
    rep = M.path_length(bump_path, 0.5)
    assert rep.length > 0
    assert rep.length ** 2 <= rep.energy * (1 + 1e-12)
    assert len(rep.per_knot_speeds) == bump_path.n_knots


def test_translation_speed_is_constant(bump_path):
    # the generator is a rigid translate of one bump, so the speed never changes
    speeds = np.array(M.path_length(bump_path, 0.5).per_knot_speeds)
    assert np.ptp(speeds) < 1e-6 * speeds.max()


def test_concatenation_adds_lengths(bump_path):
    one = M.path_length(bump_path, 0.5).length
    chain = M.concatenate(bump_path, bump_path)
    assert M.path_length(chain, 0.5).length == pytest.approx(2 * one, rel=1e-12)
    assert len(M.concatenate(chain, bump_path).pieces) == 3


def test_check_displacement():
    A = M.Rectangle((0.0,), (1.0,))
    assert not M.check_displacement(lambda x: x, A).disjoint
    moved = M.check_displacement(lambda x: x + 1.5, A)
    assert moved.disjoint and moved.min_separation == pytest.approx(0.5, abs=2e-3)
    with pytest.raises(ConfigurationError):
        M.check_displacement(lambda x: x, A, samples=10)


def test_halton_samples_are_deterministic_and_interior():
    A = M.Rectangle((-1.0, 0.0), (1.0, 2.0))
    p = A.halton(500)
    np.testing.assert_array_equal(p, A.halton(500))
    assert np.all(A.distance(p) == 0.0)
    assert len(np.unique(p, axis=0)) == 500
    with pytest.raises(ConfigurationError):
        M.Rectangle((1.0,), (0.0,))


def test_decay_slope_of_power_law():
    ns = np.array([1, 2, 4, 8])
    assert M.decay_slope(ns, 3.0 * ns ** -0.5) == pytest.approx(-0.5)


def test_commutator_of_translations_is_identity():
    a, b = M.LineMap.translation(0.3), M.LineMap.translation(-1.1)
    x = np.linspace(-3, 3, 41)
    np.testing.assert_allclose(M.commutator_map(a, b)(x), x, atol=1e-15)
    np.testing.assert_allclose(M.commutator_map(M.LineMap.identity(), a)(x), x, atol=1e-15)


def test_line_map_samples_round_trip():
    xs = np.linspace(-2, 2, 201)
    ys = xs + 0.2 * np.sin(xs)
    phi = M.LineMap.from_samples(xs, ys)
    pts = np.linspace(-1.5, 1.5, 17)
    np.testing.assert_allclose(phi.inverse(phi.forward(pts)), pts, atol=1e-6)
    np.testing.assert_allclose(phi.derivative(pts), 1 + 0.2 * np.cos(pts), atol=1e-3)
    with pytest.raises(InversionError):
        M.LineMap.from_samples(xs, -ys)


@given(st.floats(-2.0, 2.0))
def test_pushforward_by_translation(a):
    phi = M.LineMap.translation(a)
    y = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(phi.pushforward(np.sin, y), np.sin(y - a), atol=1e-15)


def test_lipschitz_of_isometries():
    probes = M.probe_dictionary(10)
    assert len(probes) == 10
    ident = M.left_lipschitz_estimate(M.LineMap.identity(), probes, 0.5)
    assert ident.constant == pytest.approx(1.0, abs=1e-12)
    shift = M.left_lipschitz_estimate(M.LineMap.translation(0.25), probes, 0.5)
    assert shift.constant == pytest.approx(1.0, rel=1e-3)


def test_lipschitz_of_a_stretch_exceeds_one():
    fld = F.translating_bump_field(3)
    phi = M.LineMap.flow_endpoint(fld)
    est = M.left_lipschitz_estimate(phi, M.probe_dictionary(20), 0.5)
    assert est.constant > 1.0 and np.isfinite(est.constant)


def test_right_composition_by_identity(bump_path):
    same = M.right_compose(bump_path, lambda x: x)
    np.testing.assert_allclose(same.positions, bump_path.positions, atol=1e-12)
    a = M.path_length(bump_path, 0.5, method="inversion").length
    b = M.path_length(same, 0.5).length
    assert b == pytest.approx(a, rel=1e-6)


def test_path_length_report_validates():
    with pytest.raises(ValueError):
        M.PathLengthReport(0.5, "inhomogeneous", 2.0, 1.0, (1.0,), (0.0, 1.0))
    spec = MultiplierSpec("inhomogeneous", 0.5)
    assert M._as_spec("homogeneous", 0.5, "inhomogeneous").kind == "homogeneous"
    assert M._as_spec(spec, 1.0, "homogeneous") is spec
