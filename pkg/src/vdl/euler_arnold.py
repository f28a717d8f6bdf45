"""Pseudospectral Euler-Arnold solvers: Burgers, EPDiff on the circle, and SQG.

All solvers evolve Fourier coefficients with classical RK4 and the 2/3 rule
on every quadratic product.  A run stops with a blowup flag when the energy
fraction in the top third of the retained band exceeds ``TAIL_LIMIT`` or
when the steepest gradient predicts wave breaking within two steps.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedRegimeError
from .spectral import (Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec,
                       sobolev_norm_1d)

TAIL_LIMIT = 1e-3
EPDIFF_ORDERS = (0.5, 1.0)


@dataclass(frozen=True)
class EAState1D:
    u: GridFunction1D
    s: float
    t: float


@dataclass(frozen=True)
class SQGState:
    theta: GridFunction2D
    t: float

    def __post_init__(self):
        if abs(self.theta.mean) > 1e-12 * max(1.0, float(np.abs(self.theta.values).max())):
            raise DomainError(f"SQG states must be mean-zero; the mean is {self.theta.mean:.3g}")


@dataclass
class Diagnostics:
    """Time series recorded during a solve."""

    t: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    extremal: list = field(default_factory=list)
    tail_fraction: list = field(default_factory=list)
    mean: list = field(default_factory=list)
    blowup: bool = False
    blowup_time: float | None = None
    blowup_reason: str | None = None
    predicted_blowup_time: float | None = None

    def record(self, t, l2, energy, extremal, tail, mean):
        self.t.append(float(t))
        self.l2.append(float(l2))
        self.energy.append(float(energy))
        self.extremal.append(float(extremal))
        self.tail_fraction.append(float(tail))
        self.mean.append(float(mean))

    def drift(self, key):
        """max_t |q(t) - q(0)| / |q(0)| for 'l2' or 'energy'."""
        vals = np.asarray(getattr(self, key))
        return float(np.max(np.abs(vals - vals[0])) / abs(vals[0])) if vals[0] != 0 else float(np.max(np.abs(vals)))

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["t", "l2", "energy", "min_ux_or_max_grad", "tail_fraction"])
            for row in zip(self.t, self.l2, self.energy, self.extremal, self.tail_fraction):
                w.writerow([repr(v) for v in row])

    def summary(self):
        return {"blowup": self.blowup, "blowup_time": self.blowup_time,
                "blowup_reason": self.blowup_reason,
                "predicted_blowup_time": self.predicted_blowup_time,
                "l2_drift": self.drift("l2") if self.t else None,
                "energy_drift": self.drift("energy") if self.t else None,
                "steps_recorded": len(self.t)}


@dataclass
class Trajectory:
    snapshots: list
    diagnostics: Diagnostics

    @property
    def final(self):
        return self.snapshots[-1]


# --- shared 1D machinery ---------------------------------------------------------


class _Line:
    def __init__(self, grid):
        self.grid = grid
        n = grid.n_points
        self.n = n
        idx = np.arange(n // 2 + 1)
        self.k = 2.0 * np.pi * idx / grid.period
        self.k_odd = self.k.copy()
        self.k_odd[-1] = 0.0
        cut = n // 3
        self.mask = (idx <= cut).astype(float)
        self.tail = (idx > (2 * cut) // 3) & (idx <= cut)
        self.weights = np.full(idx.size, 2.0)
        self.weights[0] = 1.0
        self.weights[-1] = 1.0

    def to_phys(self, uh):
        return np.fft.irfft(uh, n=self.n)

    def to_spec(self, u):
        return np.fft.rfft(u)

    def dx(self, uh):
        return self.to_phys(1j * self.k_odd * uh)

    def tail_fraction(self, uh):
        e = self.weights * np.abs(uh) ** 2
        tot = e.sum()
        return float(e[self.tail].sum() / tot) if tot > 0 else 0.0

    def l2(self, uh):
        return math.sqrt(self.grid.spacing / self.n * float(self.weights @ np.abs(uh) ** 2))


def _rk4(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_run(t_end, dt):
    if not (dt > 0 and t_end >= 0):
        raise ConfigurationError(f"need dt > 0 and t_end >= 0, got dt={dt}, t_end={t_end}")
    return max(0, math.ceil(t_end / dt - 1e-9))


def _steepening(min_ux, speed_factor, dt):
    """True when characteristics would cross within two steps."""
    return min_ux < 0 and -1.0 / (speed_factor * min_ux) < 2.0 * dt


def _run_1d(line, state_hat, rhs, to_u, energy_fn, t_end, dt, speed_factor, s,
            snapshot_every, on_blowup):
    steps = _check_run(t_end, dt)
    h = t_end / steps if steps else dt
    diag = Diagnostics()
    snaps = []

    def observe(t, yh):
        uh = to_u(yh)
        ux = line.dx(uh)
        u = line.to_phys(uh)
        diag.record(t, line.l2(uh), energy_fn(u), ux.min(), line.tail_fraction(uh), u.mean())
        return uh, ux

    y = state_hat
    uh, ux = observe(0.0, y)
    if ux.min() < 0:
        diag.predicted_blowup_time = -1.0 / (speed_factor * ux.min())
    snaps.append(EAState1D(GridFunction1D(line.grid, line.to_phys(uh)), s, 0.0))
    for i in range(1, steps + 1):
        y = _rk4(rhs, y, h)
        t = i * h
        if not np.all(np.isfinite(y)):
            diag.blowup, diag.blowup_time, diag.blowup_reason = True, t, "non-finite state"
            break
        uh, ux = observe(t, y)
        reason = None
        if diag.tail_fraction[-1] > TAIL_LIMIT:
            reason = "spectral tail"
        elif _steepening(ux.min(), speed_factor, h):
            reason = "gradient steepening"
        if reason is not None:
            diag.blowup, diag.blowup_time, diag.blowup_reason = True, t, reason
            snaps.append(EAState1D(GridFunction1D(line.grid, line.to_phys(uh)), s, t))
            if on_blowup == "error":
                raise UnsupportedRegimeError(f"solution left the classical regime at t={t:.6g} ({reason})")
            break
        if snapshot_every and i % snapshot_every == 0 or i == steps:
            snaps.append(EAState1D(GridFunction1D(line.grid, line.to_phys(uh)), s, t))
    return Trajectory(snaps, diag)


def _check_on_blowup(on_blowup):
    if on_blowup == "continue":
        raise UnsupportedRegimeError("continuation past a classical blowup is not supported")
    if on_blowup not in ("stop", "error"):
        raise ConfigurationError(f"on_blowup must be 'stop' or 'error', got {on_blowup!r}")


# --- Burgers -------------------------------------------------------------------------


def burgers_rhs(line, uh):
    """Dealiased Fourier coefficients of -3 u u_x."""
    uh = uh * line.mask
    u = line.to_phys(uh)
    ux = line.dx(uh)
    return -3.0 * line.to_spec(u * ux) * line.mask


def burgers_solve(u0, t_end, dt, snapshot_every=0, on_blowup="stop"):
    """Integrate u_t + 3 u u_x = 0 while the solution stays classical."""
    _check_on_blowup(on_blowup)
    line = _Line(u0.grid)
    spec0 = MultiplierSpec("inhomogeneous", 0.0)
    return _run_1d(line, line.to_spec(u0.values) * line.mask, lambda y: burgers_rhs(line, y),
                   lambda y: y, lambda u: sobolev_norm_1d(GridFunction1D(line.grid, u), spec0) ** 2,
                   t_end, dt, 3.0, 0.0, snapshot_every, on_blowup)


def burgers_characteristics(u0_func, t, x, tol=1e-14, max_iter=100):
    """Exact pre-shock solution of u_t + 3 u u_x = 0 by Newton on x = x0 + 3 t u0(x0)."""
    x = np.asarray(x, dtype=float)
    x0 = x.copy()
    h = 1e-6
    for _ in range(max_iter):
        f = x0 + 3.0 * t * u0_func(x0) - x
        df = 1.0 + 3.0 * t * (u0_func(x0 + h) - u0_func(x0 - h)) / (2 * h)
        step = f / df
        x0 = x0 - step
        if np.max(np.abs(step)) < tol:
            break
    return u0_func(x0)


# --- EPDiff on the circle -----------------------------------------------------------


def _inertia(line, s):
    if s == 1.0:
        return (1.0 + line.k ** 2) ** s, MultiplierSpec("inhomogeneous", s)
    a = line.k ** (2 * s)
    return a, MultiplierSpec("homogeneous", s)


def epdiff_rhs(line, mh, a_inv):
    """Dealiased coefficients of -(u m_x + 2 u_x m) with u = Lambda^{-2s} m."""
    mh = mh * line.mask
    uh = mh * a_inv
    u, ux = line.to_phys(uh), line.dx(uh)
    m, mx = line.to_phys(mh), line.dx(mh)
    return -line.to_spec(u * mx + 2.0 * ux * m) * line.mask


def epdiff1d_solve(u0, s, t_end, dt, snapshot_every=0, on_blowup="stop"):
    """m_t + u m_x + 2 u_x m = 0, m = Lambda^{2s} u, for s in {1/2, 1}.

    s = 1 uses the symbol (1 + k^2); s = 1/2 uses |k| and needs mean-zero data.
    """
    s = float(s)
    if s not in EPDIFF_ORDERS:
        raise UnsupportedRegimeError(f"EPDiff order s={s} is not supported; use one of {EPDIFF_ORDERS}")
    _check_on_blowup(on_blowup)
    line = _Line(u0.grid)
    a, spec = _inertia(line, s)
    if s == 0.5 and abs(u0.mean) > 1e-12 * max(1.0, float(np.abs(u0.values).max())):
        raise DomainError(f"the homogeneous s=1/2 metric needs mean-zero data; the mean is {u0.mean:.3g}")
    a_inv = np.zeros_like(a)
    a_inv[a > 0] = 1.0 / a[a > 0]
    mh0 = a * line.to_spec(u0.values) * line.mask

    def energy(u):
        return sobolev_norm_1d(GridFunction1D(line.grid, u), spec) ** 2

    return _run_1d(line, mh0, lambda y: epdiff_rhs(line, y, a_inv), lambda y: y * a_inv,
                   energy, t_end, dt, 1.0, s, snapshot_every, on_blowup)


# --- SQG ------------------------------------------------------------------------------


class _Plane:
    def __init__(self, grid):
        self.grid = grid
        nx, ny = grid.n_x, grid.n_y
        self.shape = (nx, ny)
        ix = np.fft.fftfreq(nx, d=1.0 / nx)
        iy = np.arange(ny // 2 + 1)
        kx = 2.0 * np.pi * ix / grid.period_x
        ky = 2.0 * np.pi * iy / grid.period_y
        self.kx = kx[:, None] * np.ones((1, iy.size))
        self.ky = ky[None, :] * np.ones((nx, 1))
        self.kx_odd = self.kx.copy()
        self.kx_odd[nx // 2, :] = 0.0
        self.ky_odd = self.ky.copy()
        self.ky_odd[:, -1] = 0.0
        mag = np.sqrt(self.kx ** 2 + self.ky ** 2)
        self.inv_mag = np.zeros_like(mag)
        self.inv_mag[mag > 0] = 1.0 / mag[mag > 0]
        cx, cy = nx // 3, ny // 3
        ax, ay = np.abs(ix)[:, None], iy[None, :]
        self.mask = ((ax <= cx) & (ay <= cy)).astype(float)
        # shell of the top third of the retained band (by max-norm of the index)
        r = np.maximum(ax / max(cx, 1), ay / max(cy, 1))
        self.tail = (r > 2.0 / 3.0) & (self.mask > 0)
        self.weights = np.full(iy.size, 2.0)
        self.weights[0] = 1.0
        self.weights[-1] = 1.0
        self.weights = np.broadcast_to(self.weights[None, :], self.kx.shape)
        self.norm = grid.cell_area / (nx * ny)

    def to_phys(self, h):
        return np.fft.irfft2(h, s=self.shape)

    def to_spec(self, f):
        return np.fft.rfft2(f)

    def velocity(self, th):
        psi = th * self.inv_mag
        return self.to_phys(-1j * self.ky_odd * psi), self.to_phys(1j * self.kx_odd * psi)

    def gradient(self, th):
        return self.to_phys(1j * self.kx_odd * th), self.to_phys(1j * self.ky_odd * th)

    def l2(self, th):
        return math.sqrt(self.norm * float(np.sum(self.weights * np.abs(th) ** 2)))

    def hamiltonian(self, th):
        """||theta||^2 in the homogeneous H^{-1/2} norm."""
        return self.norm * float(np.sum(self.weights * self.inv_mag * np.abs(th) ** 2))

    def tail_fraction(self, th):
        e = self.weights * np.abs(th) ** 2
        tot = e.sum()
        return float(e[self.tail].sum() / tot) if tot > 0 else 0.0


def _sqg_rhs_hat(plane, th):
    th = th * plane.mask
    u1, u2 = plane.velocity(th)
    tx, ty = plane.gradient(th)
    return -plane.to_spec(u1 * tx + u2 * ty) * plane.mask


def sqg_rhs(theta):
    """theta_t = -u . grad theta as a grid function (one dealiased evaluation)."""
    SQGState(theta, 0.0)
    plane = _Plane(theta.grid)
    return GridFunction2D(theta.grid, plane.to_phys(_sqg_rhs_hat(plane, plane.to_spec(theta.values))))


def sqg_solve(theta0, t_end, dt, snapshot_every=0, diag_every=1):
    """Surface quasi-geostrophic transport with u = grad^perp (-Delta)^{-1/2} theta."""
    SQGState(theta0, 0.0)
    steps = _check_run(t_end, dt)
    h = t_end / steps if steps else dt
    plane = _Plane(theta0.grid)
    diag = Diagnostics()
    snaps = [SQGState(theta0, 0.0)]
    th = plane.to_spec(theta0.values) * plane.mask

    def observe(t, th):
        gx, gy = plane.gradient(th)
        diag.record(t, plane.l2(th), plane.hamiltonian(th), float(np.sqrt(gx ** 2 + gy ** 2).max()),
                    plane.tail_fraction(th), float(th[0, 0].real) / th.size)

    observe(0.0, th)
    for i in range(1, steps + 1):
        th = _rk4(lambda y: _sqg_rhs_hat(plane, y), th, h)
        t = i * h
        if not np.all(np.isfinite(th)):
            diag.blowup, diag.blowup_time, diag.blowup_reason = True, t, "non-finite state"
            break
        if i % diag_every == 0 or i == steps:
            observe(t, th)
            if diag.tail_fraction[-1] > TAIL_LIMIT:
                diag.blowup, diag.blowup_time, diag.blowup_reason = True, t, "spectral tail"
                snaps.append(SQGState(GridFunction2D(plane.grid, plane.to_phys(th)), t))
                break
        if (snapshot_every and i % snapshot_every == 0) or i == steps:
            snaps.append(SQGState(GridFunction2D(plane.grid, plane.to_phys(th)), t))
    return Trajectory(snaps, diag)


# --- initial data presets ------------------------------------------------------------


def line_grid(n):
    return Grid1D(n, 2.0 * np.pi, 0.0)


def torus_grid(n):
    return Grid2D(n, n, 2.0 * np.pi, 2.0 * np.pi, 0.0, 0.0)


PRESETS_1D = {
    "sine": lambda x: np.sin(x),
    "constant": lambda x: np.full_like(x, 0.7),
    "zero": lambda x: np.zeros_like(x),
}

PRESETS_2D = {
    "two-mode": lambda X, Y: np.sin(X) * np.sin(Y) + 0.3 * np.sin(2 * X),
    "single-mode": lambda X, Y: np.sin(X),
    "zero": lambda X, Y: np.zeros_like(X),
}


def preset_1d(name, n):
    if name not in PRESETS_1D:
        raise ConfigurationError(f"unknown 1D preset {name!r}; choose from {sorted(PRESETS_1D)}")
    g = line_grid(n)
    return GridFunction1D(g, PRESETS_1D[name](g.x))


def preset_2d(name, n):
    if name not in PRESETS_2D:
        raise ConfigurationError(f"unknown 2D preset {name!r}; choose from {sorted(PRESETS_2D)}")
    g = torus_grid(n)
    X, Y = g.mesh()
    return GridFunction2D(g, PRESETS_2D[name](X, Y))
