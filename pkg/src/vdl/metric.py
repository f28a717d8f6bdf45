"""Right-invariant path lengths, displacement checks and the commutator algebra.

The speed of a path phi(t) is the Sobolev norm of its Eulerian velocity
X(t) = d/dt phi(t) o phi(t)^{-1}.  For planar Hamiltonian paths the speed
is the homogeneous norm of order s + 1 of the Hamiltonian, which is how the
H^{-1/2} norm of an area-preserving velocity is defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.stats import qmc

from . import constructions as C
from .errors import CompositionError, ConfigurationError, InversionError
from .flows import (DiffeoPath, FlowOptions, TimeDependentField, integrate_flow_map,
                    integrate_particles, knot_times, monotone_map, planar_shear_field,
                    translating_bump_field)
from .spectral import (Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec,
                       sobolev_norm_1d, sobolev_norm_2d)

SCHEMA = "vdl-report-1"
DISJOINT_MARGIN = 1e-6


# --- small value types ------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    """Open box prod (lo_i, hi_i); tested as its closure."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ConfigurationError(f"invalid rectangle {lo} x {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self):
        return len(self.lo)

    @property
    def diameter(self):
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def distance(self, pts):
        """Euclidean distance of each point to the closed box."""
        p = np.asarray(pts, dtype=float).reshape(-1, self.dimension)
        below = np.maximum(np.asarray(self.lo) - p, 0.0)
        above = np.maximum(p - np.asarray(self.hi), 0.0)
        return np.linalg.norm(below + above, axis=1)

    def halton(self, samples):
        """First ``samples`` interior points of the unscrambled Halton sequence.

        The sequence starts at the origin of the unit cube, which is on the
        boundary, so that point is skipped.
        """
        unit = qmc.Halton(d=self.dimension, scramble=False).random(samples + 1)[1:]
        return np.asarray(self.lo) + unit * (np.asarray(self.hi) - np.asarray(self.lo))

    def describe(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class PathLengthReport:
    s: float
    kind: str
    length: float
    energy: float
    per_knot_speeds: tuple
    times: tuple
    quadrature: str = "composite Simpson"
    method: str = "generator"

    def __post_init__(self):
        if self.length < 0 or self.energy < 0:
            raise ValueError("lengths and energies are nonnegative")
        # Cauchy-Schwarz on a unit time interval (small rounding slack)
        span = self.times[-1] - self.times[0] if self.times else 1.0
        if self.length ** 2 > span * self.energy * (1 + 1e-12) + 1e-300:
            raise ValueError("length^2 exceeds energy")

    def to_dict(self):
        return {"s": self.s, "kind": self.kind, "length": self.length, "energy": self.energy,
                "per_knot_speeds": list(self.per_knot_speeds), "times": list(self.times),
                "quadrature": self.quadrature, "method": self.method}


@dataclass(frozen=True)
class DisplacementResult:
    set_descriptor: dict
    disjoint: bool
    min_separation: float
    n: int | None = None
    length_upper_bound: float | None = None
    samples: int = 0

    def __post_init__(self):
        if self.disjoint and not self.min_separation > 0:
            raise ValueError("disjoint requires a positive separation")

    def to_dict(self):
        return {"set": self.set_descriptor, "disjoint": self.disjoint,
                "min_separation": self.min_separation, "n": self.n,
                "length_upper_bound": self.length_upper_bound, "samples": self.samples}


@dataclass(frozen=True)
class LipschitzEstimate:
    descriptor: dict
    constant: float
    probe_count: int
    ratios: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not math.isfinite(self.constant):
            raise ValueError("Lipschitz estimate must be finite")


# --- quadrature ------------------------------------------------------------------------


def simpson_weights(times):
    """Composite Simpson weights on uniform knots with an even number of intervals."""
    t = np.asarray(times, dtype=float)
    k = len(t) - 1
    if k < 2 or k % 2:
        raise ConfigurationError("Simpson quadrature needs an even number (>= 2) of intervals")
    h = (t[-1] - t[0]) / k
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise ConfigurationError("Simpson quadrature needs uniform knots")
    w = np.ones(k + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


# --- Eulerian velocities on a norm grid -----------------------------------------


def default_line_grid(path, n_hint=None):
    """Norm grid for a 1D path: box four times the moving region, spacing fine enough for xi_n."""
    moved = np.any(np.abs(path.velocities[..., 0]) > 0, axis=0)
    pts = path.positions[:, moved, 0] if moved.any() else path.positions[:, :, 0]
    diam = max(float(pts.max() - pts.min()), 1.0)
    period = 2.0 ** math.ceil(math.log2(4.0 * diam))
    center = 0.5 * float(pts.max() + pts.min())
    if n_hint is None:
        n_hint = (path.generator.descriptor.get("n", 4) if path.generator is not None else 4)
    n_pts = 2 ** math.ceil(math.log2(period * 2.0 ** (n_hint + 2)))
    n_pts = int(min(max(n_pts, 2 ** 12), 2 ** 23))
    return Grid1D(n_pts, period, center - 0.5 * period)


def eulerian_velocity_1d(path, knot, grid, method="auto"):
    """Samples of X(t_knot) on ``grid`` (from the generator, or by monotone inversion)."""
    t = float(path.times[knot])
    if method in ("auto", "generator") and path.generator is not None:
        return path.generator.velocity(t, grid.x[:, None])[:, 0]
    if method == "generator":
        raise InversionError("path has no generator")
    pos = path.positions[knot, :, 0]
    vel = path.velocities[knot, :, 0]
    if np.any(np.diff(pos) <= 0):
        raise InversionError(f"path is not monotone at knot {knot}; cannot invert")
    interp = CubicSpline(pos, vel, extrapolate=False)
    y = grid.x
    out = interp(y)
    out = np.where(y < pos[0], vel[0], out)
    out = np.where(y > pos[-1], vel[-1], out)
    return out


def _as_spec(m, s, default_kind):
    if m is None:
        return MultiplierSpec(default_kind, s)
    if isinstance(m, str):
        return MultiplierSpec(m, s)
    return m


def path_length(path, s, m=None, *, grid=None, method="auto"):
    """Length and energy of a path under the right-invariant H^s metric.

    ``m`` is a :class:`MultiplierSpec` or just a kind; for vector fields its
    order is ``s``.  Planar paths whose generator has a Hamiltonian are
    measured through the Hamiltonian's homogeneous-type norm of order s + 1
    (``method`` 'exact' uses the closed-form evaluator, 'grid' samples on
    ``grid``).
    """
    if isinstance(path, PathChain):
        return path.length(s, m, grid=grid, method=method)
    times = np.asarray(path.times, dtype=float)
    w = simpson_weights(times)
    gen = path.generator
    if path.dimension == 2 and gen is not None and gen.hamiltonian is not None:
        kind = m if isinstance(m, str) else (m.kind if m is not None else "homogeneous")
        spec = MultiplierSpec(kind, s + 1.0)
        speeds = []
        use_exact = method in ("auto", "exact") and gen.hamiltonian_norm is not None
        if method == "exact" and gen.hamiltonian_norm is None:
            raise ConfigurationError("no closed-form Hamiltonian norm for this generator")
        for t in times:
            if use_exact:
                speeds.append(gen.hamiltonian_norm(float(t), spec))
            else:
                if grid is None:
                    raise ConfigurationError("a 2D norm grid is required")
                X, Y = grid.mesh()
                h = GridFunction2D(grid, gen.hamiltonian(float(t), X, Y))
                speeds.append(sobolev_norm_2d(h, spec))
        label = "hamiltonian-exact" if use_exact else "hamiltonian-grid"
    elif path.dimension == 1:
        spec = _as_spec(m, s, "inhomogeneous")
        grid = default_line_grid(path) if grid is None else grid
        speeds = [sobolev_norm_1d(GridFunction1D(grid, eulerian_velocity_1d(path, k, grid, method)), spec)
                  for k in range(len(times))]
        label = "generator" if (gen is not None and method != "inversion") else "inversion"
    elif gen is not None and grid is not None:
        spec = _as_spec(m, s, "inhomogeneous")
        X, Y = grid.mesh()
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        speeds = []
        for t in times:
            v = gen.velocity(float(t), pts)
            comps = [GridFunction2D(grid, v[:, i].reshape(grid.shape)) for i in range(2)]
            speeds.append(math.sqrt(sum(sobolev_norm_2d(c, spec) ** 2 for c in comps)))
        label = "generator-componentwise"
    else:
        raise InversionError("2D paths need a generator (and a norm grid for vector-field norms)")
    speeds = np.asarray(speeds, dtype=float)
    return PathLengthReport(float(s), spec.kind, float(w @ speeds), float(w @ speeds ** 2),
                            tuple(float(v) for v in speeds), tuple(float(t) for t in times),
                            method=label)


# --- chains of paths ---------------------------------------------------------------


@dataclass(frozen=True)
class PathChain:
    """Concatenation of paths; piece k runs on [k, k + 1] after the previous endpoint."""

    pieces: tuple

    def length(self, s, m=None, *, grid=None, method="auto"):
        reports = [path_length(p, s, m, grid=grid, method=method) for p in self.pieces]
        speeds, times = [], []
        for k, r in enumerate(reports):
            speeds.extend(r.per_knot_speeds)
            times.extend(t - r.times[0] + k for t in r.times)
        return PathLengthReport(reports[0].s, reports[0].kind, sum(r.length for r in reports),
                                sum(r.energy for r in reports), tuple(speeds), tuple(times),
                                quadrature="piecewise composite Simpson",
                                method="+".join(r.method for r in reports))


def concatenate(first, second):
    """Run ``first`` then ``second`` (the latter right-translated by first's endpoint)."""
    return PathChain(tuple(getattr(first, "pieces", (first,))) + tuple(getattr(second, "pieces", (second,))))


# --- displacement ------------------------------------------------------------------


def _endpoint_callable(endpoint, domain=None):
    if isinstance(endpoint, DiffeoPath):
        return endpoint.endpoint_map(domain)
    if callable(endpoint):
        return endpoint
    raise ConfigurationError("endpoint must be a DiffeoPath or a callable map")


def check_displacement(endpoint, A, samples=1000, n=None, length_upper_bound=None):
    """Does the endpoint map send every Halton sample of A outside closed A?"""
    if samples < 100:
        raise ConfigurationError("at least 100 samples are required")
    pts = A.halton(samples)
    phi = _endpoint_callable(endpoint)
    images = np.asarray(phi(pts if A.dimension > 1 else pts), dtype=float).reshape(samples, A.dimension)
    sep = float(A.distance(images).min())
    disjoint = bool(sep > DISJOINT_MARGIN * A.diameter)
    return DisplacementResult(A.describe(), disjoint, sep, n, length_upper_bound, samples)


def line_flow_options(field, dt_max=1e-3):
    return FlowOptions.stable_for(field.rate or 0.0, dt_max=dt_max)


def planar_flow_options(field, dt_max=1e-3, jacobian_tracking=False):
    rate = field.frame.rate if field.frame is not None else (field.rate or 0.0)
    return FlowOptions.stable_for(rate, dt_max=dt_max, frame="comoving" if field.frame else "lab",
                                  jacobian_tracking=jacobian_tracking)


def displacement_energy_upper_bound(A, family, n_list, s=0.5, m=None, samples=1000):
    """Rows (n, displacement, length report) for a constructed family.

    family '1d' uses u_n = xi_n(x - t); family '2d' uses the planar shear
    field with the Hamiltonian norm (s = -1/2 gives the H^{-1/2} metric).
    """
    rows = []
    for n in sorted(n_list):
        if family == "1d":
            fld = translating_bump_field(n)
            opts = line_flow_options(fld)
            ref = np.linspace(-1.5, 2.5, 801)
            path = integrate_flow_map(fld, 0.0, 1.0, ref, opts)
        elif family == "2d":
            fld = planar_shear_field(n)
            opts = planar_flow_options(fld)
            path = integrate_flow_map(fld, 0.0, 1.0, A.halton(samples), opts)
        else:
            raise ConfigurationError(f"unknown family {family!r}")
        rep = path_length(path, s, m)
        if family == "2d":
            images = path.positions[-1]
            sep = float(A.distance(images).min())
            disp = DisplacementResult(A.describe(), bool(sep > DISJOINT_MARGIN * A.diameter), sep,
                                      n, rep.length, samples)
        else:
            disp = check_displacement(path, A, samples, n, rep.length)
        rows.append((n, disp, rep))
    return rows


def decay_slope(ns, values):
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


# --- left multiplication (pushforward) bounds -------------------------------------


def probe_dictionary(count=20, center=0.0):
    """Fixed smooth, compactly supported probe vector fields on the line.

    Alternates shifted/scaled bumps with windowed low Fourier modes.
    """
    bumps, modes = [], []
    for width in (1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 3.0):
        for shift in (0.0, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5):
            bumps.append(lambda x, a=width, b=shift: C.base_bump((x - center - b) / a))
    for k in range(1, 60):
        if k % 2:
            modes.append(lambda x, k=k: C.psi((x - center) / 2.0) * np.sin(0.5 * k * (x - center)))
        else:
            modes.append(lambda x, k=k: C.psi((x - center) / 2.0) * np.cos(0.5 * k * (x - center)))
    out = []
    while len(out) < count:
        if bumps:
            out.append(bumps.pop(0))
        if modes and len(out) < count:
            out.append(modes.pop(0))
    return out


def _probe_callable(p):
    if isinstance(p, GridFunction1D):
        g = p.grid
        xs = np.append(g.x, g.offset + g.period)
        vals = np.append(p.values, p.values[0])
        spline = CubicSpline(xs, vals, bc_type="periodic")
        return lambda x: spline(g.offset + np.mod(np.asarray(x) - g.offset, g.period))
    return p


def line_map_from_samples(xs, ys):
    """(phi, phi', phi^{-1}) of a monotone sampled 1D map, by monotone cubics."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(np.diff(ys) <= 0):
        raise InversionError("map samples are not strictly increasing")
    fwd = PchipInterpolator(xs, ys, extrapolate=True)
    dfwd = fwd.derivative()
    inv = PchipInterpolator(ys, xs, extrapolate=True)
    lo, hi = ys[0] - xs[0], ys[-1] - xs[-1]

    def phi(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < xs[0], x + lo, np.where(x > xs[-1], x + hi, fwd(x)))

    def dphi(x):
        x = np.asarray(x, dtype=float)
        return np.where((x < xs[0]) | (x > xs[-1]), 1.0, dfwd(x))

    def phi_inv(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < ys[0], y - lo, np.where(y > ys[-1], y - hi, inv(y)))

    return phi, dphi, phi_inv


@dataclass(frozen=True)
class LineMap:
    """A diffeomorphism of the line given by monotone samples (or closed forms)."""

    forward: object
    derivative: object
    inverse: object
    descriptor: dict

    @classmethod
    def from_samples(cls, xs, ys, descriptor=None):
        f, d, i = line_map_from_samples(xs, ys)
        return cls(f, d, i, descriptor or {"map": "sampled", "samples": len(xs)})

    @classmethod
    def identity(cls):
        return cls(lambda x: np.asarray(x, float), lambda x: np.ones_like(np.asarray(x, float)),
                   lambda y: np.asarray(y, float), {"map": "identity"})

    @classmethod
    def translation(cls, a):
        return cls(lambda x: np.asarray(x, float) + a, lambda x: np.ones_like(np.asarray(x, float)),
                   lambda y: np.asarray(y, float) - a, {"map": "translation", "by": a})

    @classmethod
    def flow_endpoint(cls, fld, opts=None, t0=0.0, t1=1.0):
        """Endpoint of a 1D field's flow; derivative from the variational equation."""
        opts = opts or line_flow_options(fld)

        def fwd(x):
            x = np.asarray(x, float)
            return integrate_particles(fld, t0, t1, x.reshape(-1), opts)[:, 0].reshape(x.shape)

        def der(x):
            x = np.asarray(x, float)
            _, J = integrate_particles(fld, t0, t1, x.reshape(-1), opts, return_jacobian=True)
            return J[:, 0, 0].reshape(x.shape)

        def inv(y):
            y = np.asarray(y, float)
            return integrate_particles(fld, t1, t0, y.reshape(-1), opts)[:, 0].reshape(y.shape)

        return cls(fwd, der, inv, {"map": "flow", "field": fld.descriptor, "t0": t0, "t1": t1})

    def inverted(self):
        def dinv(y):
            return 1.0 / self.derivative(self.inverse(y))
        return LineMap(self.inverse, dinv, self.forward, {"inverse_of": self.descriptor})

    def pushforward(self, X, y):
        """(phi_* X)(y) = phi'(phi^{-1} y) X(phi^{-1} y)."""
        x = self.inverse(y)
        return self.derivative(x) * X(x)


def left_lipschitz_estimate(phi, probes, s, m=None, grid=None):
    """max over probes of ||phi_* X|| / ||X|| (a lower estimate of the operator norm)."""
    spec = _as_spec(m, s, "inhomogeneous")
    if isinstance(phi, DiffeoPath):
        if phi.dimension != 1:
            raise InversionError("left multiplication estimates are implemented on the line")
        phi = LineMap.from_samples(phi.reference[:, 0], phi.positions[-1, :, 0],
                                   {"map": "path endpoint", "label": phi.label})
    if grid is None:
        grid = Grid1D(2 ** 12, 16.0)
    y = grid.x
    x = phi.inverse(y)
    dphi = phi.derivative(x)
    ratios = []
    for p in probes:
        X = _probe_callable(p)
        base = sobolev_norm_1d(GridFunction1D(grid, X(y)), spec)
        pushed = sobolev_norm_1d(GridFunction1D(grid, dphi * X(x)), spec)
        ratios.append(pushed / base)
    return LipschitzEstimate(phi.descriptor, float(max(ratios)), len(probes), tuple(ratios))


# --- the commutator construction -----------------------------------------------------


@dataclass(frozen=True)
class CommutatorReport:
    length: float
    path1_length: float
    lipschitz: float
    bound: float
    holds: bool
    endpoint_error: float
    allowance: float = 0.05

    def to_dict(self):
        return dict(self.__dict__)


def conjugated_reverse_field(fld1, g0, cache_points=None):
    """Eulerian velocity of t -> g0^{-1} o p1(1 - t) o R (R fixed): -X1(1 - t)(g0 y) / g0'(y).

    ``cache_points`` (e.g. a norm grid) are mapped by g0 once up front.
    """
    cache = {}
    if cache_points is not None:
        pts = np.asarray(cache_points, dtype=float)
        cache[pts.tobytes()] = (g0.forward(pts), g0.derivative(pts))

    def vel(t, p):
        y = np.ascontiguousarray(p[:, 0])
        hit = cache.get(y.tobytes())
        gy, dg = hit if hit is not None else (g0.forward(y), g0.derivative(y))
        return (-fld1.velocity(1.0 - t, gy[:, None])[:, 0] / dg)[:, None]

    return TimeDependentField(1, vel, {"field": "conjugated_reverse", "of": fld1.descriptor,
                                       "by": g0.descriptor})


def commutator_map(g0, g1):
    """x -> g0^{-1}(g1^{-1}(g0(g1(x))))."""
    return lambda x: g0.inverse(g1.inverse(g0.forward(g1.forward(x))))


def commutator_path_bound(fld0, fld1, s=0.5, m=None, *, grid=None, probes=None,
                          samples=None, allowance=0.05):
    """Build a two-segment path to [g0, g1] and compare its length with the bound.

    ``fld0``/``fld1`` generate g0 and g1 on [0, 1].  The path runs along p1
    to g1, then along t -> g0^{-1} o p1(1 - t) o g1^{-1} g0 g1.
    """
    o0, o1 = line_flow_options(fld0), line_flow_options(fld1)
    g0 = LineMap.flow_endpoint(fld0, o0)
    g1 = LineMap.flow_endpoint(fld1, o1)
    lo = min(fld0.support[0][0], fld1.support[0][0]) - 1.0
    hi = max(fld0.support[1][0], fld1.support[1][0]) + 1.0
    ref = np.linspace(lo, hi, 1025)
    p1 = integrate_flow_map(fld1, 0.0, 1.0, ref, o1)
    if grid is None:
        period = 2.0 ** math.ceil(math.log2(4.0 * (hi - lo)))
        n_hint = max(fld0.descriptor.get("n", 4), fld1.descriptor.get("n", 4))
        grid = Grid1D(int(min(2 ** 22, max(2 ** 12, 2 ** math.ceil(math.log2(period * 2.0 ** (n_hint + 2)))))),
                      period, 0.5 * (lo + hi) - 0.5 * period)
    r1 = path_length(p1, s, m, grid=grid)
    seg2_field = conjugated_reverse_field(fld1, g0, grid.x)
    times = knot_times(0.0, 1.0)
    spec = _as_spec(m, s, "inhomogeneous")
    speeds = np.array([sobolev_norm_1d(GridFunction1D(grid, seg2_field.velocity(t, grid.x[:, None])[:, 0]), spec)
                       for t in times])
    seg2_len = float(simpson_weights(times) @ speeds)
    probes = probe_dictionary(20, center=0.5 * (lo + hi)) if probes is None else probes
    lip = left_lipschitz_estimate(g0.inverted(), probes, s, spec, grid=_coarse(grid))
    total = r1.length + seg2_len
    bound = (1.0 + lip.constant) * r1.length * (1.0 + allowance)
    xs = np.linspace(lo, hi, samples or 1001)
    err = float(np.max(np.abs(commutator_map(g0, g1)(xs) - xs)))
    return CommutatorReport(total, r1.length, lip.constant, bound, bool(total <= bound + 1e-15), err,
                            allowance)


def _coarse(grid, cap=2 ** 14):
    if grid.n_points <= cap:
        return grid
    return Grid1D(cap, grid.period, grid.offset)


# --- right translation ------------------------------------------------------------------


def right_compose(path, psi_map):
    """Samples of t -> phi(t) o psi at the images psi(x_i) of the reference points.

    Needs the generator of ``path``; the result has no generator so its
    length must be computed by inversion.
    """
    if path.generator is None:
        raise InversionError("right composition needs the path's generator")
    ref = np.asarray(path.reference[:, 0], dtype=float)
    starts = psi_map(ref)
    if np.any(np.diff(starts) <= 0):
        raise CompositionError("psi is not increasing on the reference points")
    sub = integrate_flow_map(path.generator, path.times[0], path.times[-1], starts,
                             path.options or FlowOptions())
    return DiffeoPath(sub.times, ref[:, None], sub.positions, sub.velocities, None, None,
                      sub.options, None, f"{path.label} o psi")
