"""Integrating time-dependent vector fields into paths of diffeomorphisms.

Fields are evaluated on batches of points: ``velocity(t, pts)`` takes an
``(m, d)`` array and returns an ``(m, d)`` array.  Integration is classical
RK4 with a fixed step; Jacobians of the flow map come from the variational
equation dJ/dt = Dv(x) J, integrated alongside the positions.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import constructions as C
from .errors import (ConfigurationError, DomainEscapeError, NonDiffeomorphismError,
                     StateError)
from .spectral import Grid1D, Grid2D

DT_MAX = 1e-2
KNOT_SPACING = 0.05


@dataclass(frozen=True)
class FlowOptions:
    dt: float = 1e-3
    integrator: str = "rk4"
    jacobian_tracking: bool = False
    knot_spacing: float = KNOT_SPACING
    frame: str = "lab"

    def __post_init__(self):
        if self.frame not in ("lab", "comoving"):
            raise ConfigurationError(f"frame must be 'lab' or 'comoving', got {self.frame!r}")
        if not (self.dt > 0 and self.dt <= DT_MAX):
            raise ConfigurationError(f"dt must lie in (0, {DT_MAX}], got {self.dt}")
        if self.integrator != "rk4":
            raise ConfigurationError(f"only the rk4 integrator is available, got {self.integrator!r}")
        if not (0 < self.knot_spacing <= KNOT_SPACING):
            raise ConfigurationError(f"knot spacing must lie in (0, {KNOT_SPACING}]")

    @classmethod
    def stable_for(cls, rate, dt_max=1e-3, courant=2.0, **kw):
        """Largest step <= dt_max with dt * rate <= courant (RK4 is stable up to ~2.8)."""
        dt = dt_max if rate <= 0 else min(dt_max, courant / rate)
        return cls(dt=dt, **kw)


@dataclass(frozen=True)
class ComovingFrame:
    """Coordinates q = Phi_t(x) in which a field takes a simpler form.

    ``velocity``/``jacobian`` describe the transformed field in q;
    ``from_frame_jacobian`` is D(Phi_t^{-1}) evaluated at q.  Integrating in
    these coordinates and mapping back is an exact change of variables.
    """

    velocity: Callable
    jacobian: Callable
    to_frame: Callable
    from_frame: Callable
    from_frame_jacobian: Callable
    rate: float


@dataclass(frozen=True)
class TimeDependentField:
    """A time-dependent vector field on R^d.

    ``support`` is a box (lo, hi) containing the spatial support for every t
    in [0, 1]; ``rate`` bounds the local linear growth rate (largest
    eigenvalue modulus of Dv), used to pick a stable step; ``frame`` is an
    optional comoving description of the same field.  ``hamiltonian``
    (planar fields) maps (t, X, Y) to Hamiltonian values and
    ``hamiltonian_norm`` (t, spec) gives its Sobolev norm in closed form.
    """

    dimension: int
    velocity: Callable
    descriptor: dict
    jacobian: Callable | None = None
    support: tuple | None = None
    rate: float | None = None
    hamiltonian: Callable | None = None
    hamiltonian_norm: Callable | None = None
    frame: ComovingFrame | None = None

    def __call__(self, t, points):
        return self.velocity(t, _as_points(points, self.dimension))


def _as_points(points, dim):
    pts = np.asarray(points, dtype=float)
    if dim == 1 and pts.ndim <= 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ConfigurationError(f"points must have shape (m, {dim}), got {pts.shape}")
    return pts


# --- fields built from the constructions ------------------------------------------


def zero_field(dim=1):
    return TimeDependentField(
        dim, lambda t, p: np.zeros_like(p), {"field": "zero", "dimension": dim},
        jacobian=lambda t, p: np.zeros(p.shape + (dim,)), support=None, rate=0.0,
        hamiltonian=(lambda t, X, Y: np.zeros_like(np.asarray(X, float))) if dim == 2 else None,
        hamiltonian_norm=(lambda t, spec: 0.0) if dim == 2 else None)


def constant_field(c=1.0):
    return TimeDependentField(
        1, lambda t, p: np.full_like(p, c), {"field": "constant", "value": c},
        jacobian=lambda t, p: np.zeros(p.shape + (1,)), rate=0.0)


def _xi_rate(n):
    # sup |xi_n'| via a dyadically refined sample of the transition zones
    zs = np.concatenate([2.0 ** -j * np.linspace(0.5, 1.0, 257) for j in range(n)])
    return float(np.max(np.abs(C.xi_n(n, zs, 1))))


def translating_bump_field(n, shift=0.0, amplitude=1.0):
    """1D field amplitude * xi_n(x - t - shift) (shift = 0 gives u_n)."""
    n = C._check_n(n)

    def vel(t, p):
        return amplitude * C.xi_n(n, p - t - shift)

    def jac(t, p):
        return (amplitude * C.xi_n(n, p - t - shift, 1))[..., None]

    return TimeDependentField(
        1, vel, {"field": "translating_bump", "n": n, "shift": shift, "amplitude": amplitude},
        jacobian=jac, support=((shift - 1.0,), (shift + 2.0,)),
        rate=abs(amplitude) * _xi_rate(n))


def _planar_rate(n):
    """Largest |eigenvalue| of Du_n sampled densely in the sheared frame."""
    xs = np.linspace(-2.0, 2.0, 161)
    zpos = np.concatenate([2.0 ** -j * np.linspace(0.5, 1.0, 33) for j in range(n)])
    zs = np.concatenate([-zpos, zpos])
    best = 0.0
    for t in (0.0, 0.5, 1.0):
        X, Z = np.meshgrid(xs, zs, indexing="ij")
        Y = Z + C.g_profile(t, X)
        J = C.u_n_2d_jacobian(n, t, X, Y)
        a, b, c = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0]
        best = max(best, float(np.sqrt(np.abs(a * a + b * c)).max()))
    return best


def planar_shear_field(n):
    """The planar field u_n(t) = symplectic gradient of f_n(t)."""
    n = C._check_n(n)

    def vel(t, p):
        u1, u2 = C.u_n_2d(n, t, p[:, 0], p[:, 1])
        return np.stack([u1, u2], axis=1)

    def jac(t, p):
        return C.u_n_2d_jacobian(n, t, p[:, 0], p[:, 1])

    def ham(t, X, Y):
        return C.f_n_2d(n, t, X, Y)

    def ham_norm(t, spec):
        from .multiscale import planar_xi_norm
        return planar_xi_norm(n, t, spec)

    g = C.g_profile(1.0, np.linspace(-2.0, 2.0, 4001))
    lo = (-2.0, min(0.0, g.min()) - 1.0)
    hi = (2.0, max(0.0, g.max()) + 1.0)
    return TimeDependentField(
        2, vel, {"field": "planar_shear", "n": n}, jacobian=jac, support=(lo, hi),
        rate=_planar_rate(n), hamiltonian=ham, hamiltonian_norm=ham_norm,
        frame=_sheared_frame(n))


def _sheared_velocity(n):
    # in z = y - g(t, x) the flow is autonomous with Hamiltonian F(x) (xi_n(z) - 1)
    def vel(t, q):
        x, z = q[:, 0], q[:, 1]
        return np.stack([C.hamiltonian_1d(x) * C.xi_n(n, z, 1),
                         -C.hamiltonian_1d(x, 1) * (C.xi_n(n, z) - 1.0)], axis=1)

    def jac(t, q):
        x, z = q[:, 0], q[:, 1]
        J = np.empty((len(q), 2, 2))
        J[:, 0, 0] = C.hamiltonian_1d(x, 1) * C.xi_n(n, z, 1)
        J[:, 0, 1] = C.hamiltonian_1d(x) * C.xi_n(n, z, 2)
        J[:, 1, 0] = -C.hamiltonian_1d(x, 2) * (C.xi_n(n, z) - 1.0)
        J[:, 1, 1] = -J[:, 0, 0]
        return J

    return vel, jac


def _sheared_frame(n):
    vel, jac = _sheared_velocity(n)

    def to_frame(t, p):
        return np.stack([p[:, 0], p[:, 1] - C.g_profile(t, p[:, 0])], axis=1)

    def from_frame(t, q):
        return np.stack([q[:, 0], q[:, 1] + C.g_profile(t, q[:, 0])], axis=1)

    def from_jac(t, q):
        J = np.zeros((len(q), 2, 2))
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = 1.0
        J[:, 1, 0] = C.g_profile(t, q[:, 0], 1)
        return J

    xs = np.linspace(-2.0, 2.0, 161)
    zpos = np.concatenate([2.0 ** -j * np.linspace(0.5, 1.0, 33) for j in range(n)])
    X, Z = np.meshgrid(xs, np.concatenate([-zpos, zpos]), indexing="ij")
    J = jac(0.0, np.stack([X.ravel(), Z.ravel()], axis=1))
    lam2 = J[:, 0, 0] ** 2 + J[:, 0, 1] * J[:, 1, 0]
    return ComovingFrame(vel, jac, to_frame, from_frame, from_jac, float(np.sqrt(np.abs(lam2)).max()))


def static_shear_field():
    """Symplectic gradient (0, psi + x psi') of the static Hamiltonian -x psi(x)."""

    def vel(t, p):
        return np.stack([np.zeros(len(p)), C.g_profile(1.0, p[:, 0])], axis=1)

    def jac(t, p):
        J = np.zeros((len(p), 2, 2))
        J[:, 1, 0] = C.g_profile(1.0, p[:, 0], 1)
        return J

    return TimeDependentField(
        2, vel, {"field": "static_shear"}, jacobian=jac,
        support=((-2.0, -np.inf), (2.0, np.inf)),
        hamiltonian=lambda t, X, Y: C.hamiltonian_f(X, Y))


def linear_stretch_field():
    """Non-Hamiltonian test field (x, y) -> (x, 0); its flow has det J = e^t."""

    def jac(t, p):
        J = np.zeros((len(p), 2, 2))
        J[:, 0, 0] = 1.0
        return J

    return TimeDependentField(
        2, lambda t, p: np.stack([p[:, 0], np.zeros(len(p))], axis=1),
        {"field": "linear_stretch"}, jacobian=jac, rate=1.0)


def localized_box_field(n, eps, r, d):
    """Box-localised Hamiltonian field on R^{2d}."""
    n = C._check_n(n)
    C._check_epsilon(eps, r)
    return TimeDependentField(
        2 * d, lambda t, p: C.localized_v_n(n, eps, r, d, t, p),
        {"field": "localized_box", "n": n, "eps": eps, "r": r, "d": d},
        support=((-2.0 * r,) * (2 * d), (2.0 * r,) * (2 * d)))


FIELD_FACTORIES = {
    "zero": zero_field,
    "constant": constant_field,
    "translating_bump": translating_bump_field,
    "planar_shear": planar_shear_field,
    "static_shear": static_shear_field,
    "linear_stretch": linear_stretch_field,
    "localized_box": localized_box_field,
}


def field_from_descriptor(desc):
    desc = dict(desc)
    name = desc.pop("field")
    if name == "zero":
        return zero_field(desc.get("dimension", 1))
    if name == "constant":
        return constant_field(desc["value"])
    return FIELD_FACTORIES[name](**desc)


# --- RK4 ---------------------------------------------------------------------------


def _check_domain(pts, domain):
    if domain is None:
        return
    lo, hi = (np.asarray(b, dtype=float) for b in domain)
    bad = np.any((pts < lo) | (pts > hi), axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainEscapeError(i, tuple(pts[i]))


def _rk4_step(field, t, h, x, J):
    f = field.velocity
    k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = f(t + h, x + h * k3)
    x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if J is None:
        return x_new, None
    Df = field.jacobian
    j1 = Df(t, x) @ J
    j2 = Df(t + 0.5 * h, x + 0.5 * h * k1) @ (J + 0.5 * h * j1)
    j3 = Df(t + 0.5 * h, x + 0.5 * h * k2) @ (J + 0.5 * h * j2)
    j4 = Df(t + h, x + h * k3) @ (J + h * j3)
    return x_new, J + (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4)


def _march(field, t0, t1, x, J, dt, domain, frame="lab"):
    if frame == "comoving":
        return _march_comoving(field, t0, t1, x, J, dt, domain)
    span = t1 - t0
    if span == 0:
        return x, J
    steps = max(1, math.ceil(abs(span) / dt - 1e-9))
    h = span / steps
    for i in range(steps):
        x, J = _rk4_step(field, t0 + i * h, h, x, J)
        _check_domain(x, domain)
    return x, J


class _FrameField:
    def __init__(self, frame):
        self.velocity = frame.velocity
        self.jacobian = frame.jacobian


def _march_comoving(field, t0, t1, x, J, dt, domain):
    fr = field.frame
    if fr is None:
        raise ConfigurationError(f"field {field.descriptor} has no comoving frame")
    q0 = fr.to_frame(t0, x)
    M = None
    if J is not None:
        M = np.broadcast_to(np.eye(field.dimension), J.shape).copy()
    q, M = _march(_FrameField(fr), t0, t1, q0, M, dt, None)
    x_new = fr.from_frame(t1, q)
    _check_domain(x_new, domain)
    if J is None:
        return x_new, None
    back = np.linalg.inv(fr.from_frame_jacobian(t0, q0))
    return x_new, fr.from_frame_jacobian(t1, q) @ M @ back @ J


def integrate_particles(field, t0, t1, starts, opts=None, domain=None, return_jacobian=False):
    """Positions at time t1 of the particles that are at ``starts`` at time t0.

    ``t1 < t0`` integrates backwards (the inverse flow).  ``domain`` is an
    optional box (lo, hi); leaving it raises :class:`DomainEscapeError`.
    """
    opts = FlowOptions() if opts is None else opts
    x = _as_points(starts, field.dimension).copy()
    _check_domain(x, domain)
    J = None
    if return_jacobian or opts.jacobian_tracking:
        if field.jacobian is None:
            raise StateError("Jacobian tracking needs a field with a jacobian")
        J = np.broadcast_to(np.eye(field.dimension), x.shape + (field.dimension,)).copy()
    x, J = _march(field, float(t0), float(t1), x, J, opts.dt, domain, opts.frame)
    if return_jacobian:
        return x, J
    return x


def knot_times(t0, t1, spacing=KNOT_SPACING):
    """Uniform knots with an even number of intervals and spacing <= ``spacing``."""
    k = max(2, math.ceil((t1 - t0) / spacing - 1e-9))
    k += k % 2
    return np.linspace(t0, t1, k + 1)


# --- paths ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiffeoPath:
    """A path of diffeomorphisms sampled at particles.

    ``positions[k, i]`` is phi(times[k], reference[i]); ``velocities[k, i]``
    is d/dt phi at the same point (the Lagrangian velocity).
    """

    times: np.ndarray
    reference: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    generator: TimeDependentField | None = None
    jacobians: np.ndarray | None = field(default=None, repr=False)
    options: FlowOptions | None = None
    grid: object = None
    label: str = "path"

    @property
    def dimension(self):
        return self.reference.shape[1]

    @property
    def n_knots(self):
        return len(self.times)

    def endpoint_positions(self):
        return self.positions[-1]

    def endpoint_map(self, domain=None):
        """Callable x -> phi(1, x).

        Uses the generator when there is one, otherwise monotone interpolation
        of the sampled endpoint (1D only) with the identity outside the sample.
        """
        t0, t1 = float(self.times[0]), float(self.times[-1])
        if self.generator is not None:
            opts = self.options or FlowOptions()
            return lambda pts: integrate_particles(self.generator, t0, t1, pts, opts, domain)
        if self.dimension != 1:
            from .errors import InversionError
            raise InversionError("a 2D path without generator cannot be evaluated off its samples")
        return monotone_map(self.reference[:, 0], self.positions[-1, :, 0])

    def to_directory(self, path):
        """Per-knot CSV files plus ``manifest.json``."""
        out = Path(path)
        out.mkdir(parents=True, exist_ok=True)
        d = self.dimension
        names = [f"x{i}" for i in range(d)]
        files = []
        for k, t in enumerate(self.times):
            cols = [self.reference, self.positions[k], self.velocities[k]]
            header = names + [f"phi{i}" for i in range(d)] + [f"v{i}" for i in range(d)]
            if self.jacobians is not None:
                cols.append(self.jacobians[k].reshape(len(self.reference), -1))
                header += [f"J{i}{j}" for i in range(d) for j in range(d)]
            fname = f"knot_{k:03d}.csv"
            np.savetxt(out / fname, np.hstack(cols), delimiter=",", header=",".join(header),
                       comments="", fmt="%.17g")
            files.append(fname)
        manifest = {
            "knots": [float(t) for t in self.times],
            "files": files,
            "dimension": d,
            # explicit point sets are already stored as the reference columns
            "grid": self.grid.descriptor() if hasattr(self.grid, "descriptor") else None,
            "generator": None if self.generator is None else self.generator.descriptor,
            "options": None if self.options is None else asdict(self.options),
            "label": self.label,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
        return out

    @classmethod
    def from_directory(cls, path):
        src = Path(path)
        man = json.loads((src / "manifest.json").read_text())
        d = man["dimension"]
        tables = [np.loadtxt(src / f, delimiter=",", skiprows=1, ndmin=2) for f in man["files"]]
        ref = tables[0][:, :d]
        pos = np.stack([t[:, d:2 * d] for t in tables])
        vel = np.stack([t[:, 2 * d:3 * d] for t in tables])
        jac = None
        if tables[0].shape[1] > 3 * d:
            jac = np.stack([t[:, 3 * d:].reshape(-1, d, d) for t in tables])
        gen = None if man["generator"] is None else field_from_descriptor(man["generator"])
        opts = None if man["options"] is None else FlowOptions(**man["options"])
        return cls(np.array(man["knots"]), ref, pos, vel, gen, jac, opts, man["grid"], man["label"])


def monotone_map(xs, ys):
    """Monotone cubic interpolant x -> y extended by translation outside [xs[0], xs[-1]]."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    interp = PchipInterpolator(xs, ys, extrapolate=False)
    lo_shift = ys[0] - xs[0]
    hi_shift = ys[-1] - xs[-1]

    def phi(pts):
        p = np.asarray(pts, dtype=float)
        flat = p.reshape(-1)
        out = interp(flat)
        out = np.where(flat < xs[0], flat + lo_shift, out)
        out = np.where(flat > xs[-1], flat + hi_shift, out)
        return out.reshape(p.shape)

    return phi


def reference_points(grid):
    if isinstance(grid, Grid1D):
        return grid.x[:, None]
    if isinstance(grid, Grid2D):
        X, Y = grid.mesh()
        return np.stack([X.ravel(), Y.ravel()], axis=1)
    return np.asarray(grid, dtype=float)


def check_monotone(positions, reference_spacing, knot=None):
    """Raise if a 1D sample stopped being strictly increasing."""
    gaps = np.diff(positions)
    margin = 1e-12 * reference_spacing
    if np.any(gaps <= margin):
        i = int(np.argmin(gaps))
        where = "" if knot is None else f" at knot {knot}"
        raise NonDiffeomorphismError(
            f"flow map lost monotonicity{where}: gap {gaps[i]:.3g} between samples {i} and {i + 1}")


def integrate_flow_map(field, t0, t1, grid, opts=None, domain=None):
    """Flow every grid node from t0 to t1, recording knots every <= 0.05 time units."""
    opts = FlowOptions() if opts is None else opts
    ref = _as_points(reference_points(grid), field.dimension)
    times = knot_times(t0, t1, opts.knot_spacing)
    x = ref.copy()
    _check_domain(x, domain)
    track = opts.jacobian_tracking
    if track and field.jacobian is None:
        raise StateError("Jacobian tracking needs a field with a jacobian")
    J = np.broadcast_to(np.eye(field.dimension), x.shape + (field.dimension,)).copy() if track else None
    spacing = None
    if field.dimension == 1:
        order = np.argsort(ref[:, 0])
        if not np.array_equal(order, np.arange(len(ref))):
            raise ConfigurationError("1D reference points must be sorted")
        spacing = float(np.min(np.diff(ref[:, 0]))) if len(ref) > 1 else 1.0
    pos, vel, jacs = [x.copy()], [field.velocity(times[0], x)], [J.copy()] if track else None
    for k in range(1, len(times)):
        x, J = _march(field, times[k - 1], times[k], x, J, opts.dt, domain, opts.frame)
        if spacing is not None and len(x) > 1:
            check_monotone(x[:, 0], spacing, k)
        pos.append(x.copy())
        vel.append(field.velocity(times[k], x))
        if track:
            jacs.append(J.copy())
    return DiffeoPath(times, ref, np.stack(pos), np.stack(vel), field,
                      np.stack(jacs) if track else None, opts, grid, field.descriptor.get("field", "path"))


def jacobian_determinant(path, knot):
    """det D phi(t_knot) at every sample of the path."""
    if path.jacobians is None:
        raise StateError("the path was integrated without Jacobian tracking")
    return np.linalg.det(path.jacobians[knot])


def identity_path(grid, t0=0.0, t1=1.0):
    ref = reference_points(grid)
    if ref.ndim == 1:
        ref = ref[:, None]
    times = knot_times(t0, t1)
    pos = np.broadcast_to(ref, (len(times),) + ref.shape).copy()
    return DiffeoPath(times, ref, pos, np.zeros_like(pos), zero_field(ref.shape[1]), None,
                      FlowOptions(), grid, "identity")
