import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdl import euler_arnold as EA
from vdl.errors import ConfigurationError, DomainError, UnsupportedRegimeError
from vdl.spectral import GridFunction2D


def test_zero_stays_zero():
    tr = EA.burgers_solve(EA.preset_1d("zero", 64), 0.1, 1e-2)
    assert not tr.final.u.values.any()
    tr = EA.sqg_solve(EA.preset_2d("zero", 32), 0.05, 1e-2)
    assert not tr.final.theta.values.any()


def test_constant_is_steady():
    u0 = EA.preset_1d("constant", 64)
    for tr in (EA.burgers_solve(u0, 0.1, 1e-2), EA.epdiff1d_solve(u0, 1.0, 0.1, 1e-2)):
        np.testing.assert_allclose(tr.final.u.values, 0.7, atol=1e-14)
        assert not tr.diagnostics.blowup


def test_unsupported_regimes():
    u0 = EA.preset_1d("sine", 64)
    with pytest.raises(UnsupportedRegimeError):
        EA.epdiff1d_solve(u0, 0.75, 0.1, 1e-2)
    with pytest.raises(UnsupportedRegimeError):
        EA.burgers_solve(u0, 0.1, 1e-2, on_blowup="continue")
    with pytest.raises(DomainError):
        EA.epdiff1d_solve(EA.preset_1d("constant", 64), 0.5, 0.1, 1e-2)
    with pytest.raises(DomainError):
        g = EA.torus_grid(16)
        EA.sqg_solve(GridFunction2D(g, np.ones(g.shape)), 0.1, 1e-2)
    with pytest.raises(ConfigurationError):
        EA.burgers_solve(u0, 0.1, -1e-2)


def test_characteristics_oracle():
    u0 = EA.preset_1d("sine", 256)
    t = 0.1
    tr = EA.burgers_solve(u0, t, 1e-4)
    exact = EA.burgers_characteristics(np.sin, t, u0.grid.x)
    assert np.abs(tr.final.u.values - exact).max() < 1e-8


def test_burgers_blowup_time():
    tr = EA.burgers_solve(EA.preset_1d("sine", 512), 0.5, 1e-3)
    d = tr.diagnostics
    assert d.predicted_blowup_time == pytest.approx(1 / 3)
    assert d.blowup and abs(d.blowup_time - 1 / 3) < 0.05
    with pytest.raises(UnsupportedRegimeError):
        EA.burgers_solve(EA.preset_1d("sine", 512), 0.5, 1e-3, on_blowup="error")


@pytest.mark.parametrize("solve", [
    lambda u0, dt: EA.burgers_solve(u0, 0.2, dt),
    lambda u0, dt: EA.epdiff1d_solve(u0, 1.0, 1.0, dt),
])
def test_drift_converges_at_fourth_order(solve):
    u0 = EA.preset_1d("sine", 64)
    key = "energy"
    coarse = solve(u0, 2e-2).diagnostics.drift(key)
    fine = solve(u0, 1e-2).diagnostics.drift(key)
    assert coarse / fine >= 8


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1))
def test_mean_is_conserved(seed):
    rng = np.random.default_rng(seed)
    u0 = EA.preset_1d("sine", 64)
    x = u0.grid.x
    vals = rng.normal() + 0.2 * sum(rng.normal() * np.cos(k * x + rng.uniform(0, 6)) for k in (1, 2, 3))
    u0 = type(u0)(u0.grid, vals)
    for tr in (EA.burgers_solve(u0, 0.05, 1e-2), EA.epdiff1d_solve(u0, 1.0, 0.05, 1e-2)):
        assert abs(tr.final.u.values.mean() - vals.mean()) < 1e-12


def test_wunsch_blows_up():
    tr = EA.epdiff1d_solve(EA.preset_1d("sine", 256), 0.5, 5.0, 1e-3)
    assert tr.diagnostics.blowup


def test_sqg_single_mode_is_steady_and_invariants_hold():
    g = EA.torus_grid(32)
    theta = EA.preset_2d("single-mode", 32)
    assert np.abs(EA.sqg_rhs(theta).values).max() < 1e-12
    tr = EA.sqg_solve(EA.preset_2d("two-mode", 32), 0.1, 1e-2)
    d = tr.diagnostics
    assert d.drift("l2") < 1e-6 and d.drift("energy") < 1e-5
    assert g.shape == tr.final.theta.grid.shape


def test_snapshots_and_csv(tmp_path):
    tr = EA.burgers_solve(EA.preset_1d("sine", 64), 0.1, 1e-2, snapshot_every=5)
    assert [round(s.t, 12) for s in tr.snapshots] == [0.0, 0.05, 0.1]
    tr.diagnostics.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_bytes().split(b"\r\n")
    assert lines[0] == b"t,l2,energy,min_ux_or_max_grad,tail_fraction"
    assert len([ln for ln in lines if ln]) == 12
    assert set(tr.diagnostics.summary()) >= {"blowup", "predicted_blowup_time"}
