"""Named experiments, their configuration dataclasses and the report writer.

A configuration is a TOML document::

    experiment = "displace-1d"
    seed = 0

    [parameters]
    n_list = [2, 4, 8, 16]

Every experiment returns tables (lists of row dicts), plot series and
verdicts.  A verdict compares one measured value with a threshold; the run
passes when all verdicts pass.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from . import constructions as C
from . import euler_arnold as EA
from . import flows as F
from . import metric as M
from . import multiscale as MS
from .errors import ConfigurationError, VDLError
from .spectral import (Grid1D, Grid2D, GridFunction1D, GridFunction2D, MultiplierSpec,
                       perp_gradient_inverse_sqrt_laplacian, sobolev_norm_1d, sobolev_norm_2d,
                       symplectic_gradient_grid, theta_from_velocity, vector_sobolev_norm)

SCHEMA = M.SCHEMA


# --- parameter dataclasses ------------------------------------------------------------


@dataclass(frozen=True)
class BumpNormsParams:
    n_list: tuple = (1, 2, 4, 8, 16, 32)
    s: float = 0.5
    period: float = 8.0
    n_points: int = 2 ** 15
    method: str = "exact"


@dataclass(frozen=True)
class Displace1DParams:
    n_list: tuple = (2, 4, 8, 16)
    s: float = 0.5
    samples: int = 1000
    length_tol: float = 0.01


@dataclass(frozen=True)
class Displace2DParams:
    n_list: tuple = (2, 4, 8, 16)
    samples: int = 1000
    dt: float = 1e-3
    det_tol: float = 1e-6
    frame: str = "comoving"


@dataclass(frozen=True)
class TensorCheckParams:
    pairs: int = 20
    n_points: int = 256
    s: float = 0.5


@dataclass(frozen=True)
class SymplecticIdentityParams:
    functions: int = 20
    n_points: int = 128


@dataclass(frozen=True)
class CommutatorParams:
    # each pair: [n0, shift0, n1, shift1]
    pairs: tuple = ((2, 0.0, 2, 0.5), (2, 0.0, 4, -0.25), (2, 0.0, 2, 5.0))
    s: float = 0.5
    allowance: float = 0.05
    right_invariance_n: tuple = (2, 4, 2)
    reference_points: int = 16001


@dataclass(frozen=True)
class LipschitzParams:
    n_list: tuple = (2, 4)
    s: float = 0.5
    probes: int = 20
    dense_probes: int = 100


@dataclass(frozen=True)
class BurgersParams:
    n: int = 1024
    dt: float = 1e-3
    t_end: float = 0.5
    init: str = "sine"
    oracle_time: float = 0.1
    oracle_dt: float = 1e-4


@dataclass(frozen=True)
class EPDiffParams:
    s: float = 1.0
    n: int = 1024
    dt: float = 1e-4
    t_end: float = 1.0
    init: str = "sine"


@dataclass(frozen=True)
class SQGParams:
    n: int = 256
    dt: float = 5e-4
    t_end: float = 1.0
    init: str = "two-mode"


PARAMS = {
    "bump-norms": BumpNormsParams,
    "displace-1d": Displace1DParams,
    "displace-2d": Displace2DParams,
    "tensor-check": TensorCheckParams,
    "corollary-43": SymplecticIdentityParams,
    "commutator": CommutatorParams,
    "lipschitz": LipschitzParams,
    "burgers": BurgersParams,
    "epdiff": EPDiffParams,
    "sqg": SQGParams,
}

TOP_LEVEL = ("experiment", "seed", "parameters")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: object
    seed: int = 0

    def to_dict(self):
        return {"experiment": self.experiment, "seed": self.seed,
                "parameters": _jsonable(dataclasses.asdict(self.parameters))}


# --- validation -----------------------------------------------------------------------


def _type_ok(value, default):
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, tuple):
        return isinstance(value, (list, tuple))
    return True


def _ranges(name, p):
    """Range diagnostics for an instantiated parameter object."""
    out = []

    def need(cond, key, msg):
        if not cond:
            out.append(f"parameters.{key}: {msg}")

    fields = {f.name for f in dataclasses.fields(p)}
    if "dt" in fields:
        need(p.dt > 0, "dt", f"must be positive, got {p.dt}")
    if "t_end" in fields:
        need(p.t_end > 0, "t_end", f"must be positive, got {p.t_end}")
    if "n_list" in fields:
        need(len(p.n_list) > 0 and all(isinstance(n, int) and n >= 1 for n in p.n_list),
             "n_list", "must be a nonempty list of positive integers")
    if "samples" in fields:
        need(p.samples >= 100, "samples", f"must be at least 100, got {p.samples}")
    for key in ("n", "n_points"):
        if key in fields:
            v = getattr(p, key)
            need(v >= 8 and v & (v - 1) == 0, key, f"must be a power of two >= 8, got {v}")
    if name == "displace-2d":
        need(p.dt <= F.DT_MAX, "dt", f"must not exceed {F.DT_MAX}")
        need(p.frame in ("lab", "comoving"), "frame", "must be 'lab' or 'comoving'")
        need(all(n <= MS.PLANAR_LEVELS for n in p.n_list), "n_list",
             f"entries must not exceed {MS.PLANAR_LEVELS}")
    if name == "bump-norms":
        need(p.method in ("exact", "grid"), "method", "must be 'exact' or 'grid'")
        need(p.period > 0, "period", "must be positive")
        need(max(p.n_list, default=1) <= MS.MAX_LEVELS, "n_list",
             f"entries must not exceed {MS.MAX_LEVELS}")
    if name == "epdiff":
        need(float(p.s) in EA.EPDIFF_ORDERS, "s", f"must be one of {EA.EPDIFF_ORDERS}")
    if name in ("burgers", "epdiff"):
        need(p.init in EA.PRESETS_1D, "init", f"must be one of {sorted(EA.PRESETS_1D)}")
    if name == "sqg":
        need(p.init in EA.PRESETS_2D, "init", f"must be one of {sorted(EA.PRESETS_2D)}")
    if name == "commutator":
        need(all(len(q) == 4 for q in p.pairs), "pairs", "each pair is [n0, shift0, n1, shift1]")
        need(p.allowance >= 0, "allowance", "must be nonnegative")
    if name in ("tensor-check",):
        need(p.pairs >= 1, "pairs", "must be positive")
    if name == "corollary-43":
        need(p.functions >= 1, "functions", "must be positive")
    if name == "lipschitz":
        need(1 <= p.probes <= p.dense_probes, "probes", "need 1 <= probes <= dense_probes")
    return out


def validate(raw):
    """Diagnostics for a raw (parsed TOML) configuration; empty means valid."""
    diags = []
    if not isinstance(raw, dict):
        return ["config: expected a table"]
    for key in raw:
        if key not in TOP_LEVEL:
            diags.append(f"{key}: unknown key")
    name = raw.get("experiment")
    if name is None:
        diags.append("experiment: missing required field")
        return diags
    if name not in PARAMS:
        diags.append(f"experiment: unknown experiment {name!r}; choose from {sorted(PARAMS)}")
        return diags
    seed = raw.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0):
        diags.append("seed: must be a nonnegative integer")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        return diags + ["parameters: expected a table"]
    cls = PARAMS[name]
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    typed = True
    for key, value in params.items():
        if key not in defaults:
            diags.append(f"parameters.{key}: unknown key for experiment {name!r}")
            typed = False
        elif not _type_ok(value, defaults[key]):
            diags.append(f"parameters.{key}: expected {type(defaults[key]).__name__}, "
                         f"got {type(value).__name__}")
            typed = False
    if typed:
        diags.extend(_ranges(name, _instantiate(cls, params)))
    return diags


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    return v


def _instantiate(cls, params):
    kw = {}
    for f in dataclasses.fields(cls):
        if f.name in params:
            v = _freeze(params[f.name])
            kw[f.name] = float(v) if isinstance(f.default, float) else v
    return cls(**kw)


def parse_config(raw):
    """Validated :class:`ExperimentConfig` from a raw mapping (ConfigurationError otherwise)."""
    diags = validate(raw)
    if diags:
        raise ConfigurationError("; ".join(diags))
    cls = PARAMS[raw["experiment"]]
    return ExperimentConfig(raw["experiment"], _instantiate(cls, raw.get("parameters", {})),
                            int(raw.get("seed", 0)))


def load_toml(path):
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _parse_value(text):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_overrides(raw, assignments):
    """Apply ``key=value`` overrides (values in TOML syntax, bare words as strings).

    Keys other than ``experiment``/``seed`` go into ``parameters`` unless
    they are written ``parameters.key``.
    """
    out = dict(raw)
    out["parameters"] = dict(raw.get("parameters", {}))
    for a in assignments:
        if "=" not in a:
            raise ConfigurationError(f"override {a!r} is not of the form key=value")
        key, text = a.split("=", 1)
        key = key.strip()
        value = _parse_value(text.strip())
        if key in ("experiment", "seed"):
            out[key] = value
        else:
            out["parameters"][key.removeprefix("parameters.")] = value
    return out


# --- results ---------------------------------------------------------------------------


@dataclass
class Verdict:
    name: str
    value: float
    threshold: str
    passed: bool

    def to_dict(self):
        return {"name": self.name, "value": _jsonable(self.value), "threshold": self.threshold,
                "pass": bool(self.passed)}


@dataclass
class ExperimentResult:
    tables: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    def check(self, name, value, ok, threshold):
        self.verdicts.append(Verdict(name, value, threshold, bool(ok)))

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


# --- the experiments ---------------------------------------------------------------------


def run_bump_norms(p, seed):
    res = ExperimentResult()
    spec = MultiplierSpec("inhomogeneous", p.s)
    grid = Grid1D(p.n_points, p.period)
    rows = []
    for n in sorted(p.n_list):
        exact = MS.xi_norm(n, spec) ** 2
        sampled = sobolev_norm_1d(GridFunction1D.sample(grid, lambda x: C.xi_n(n, x)), spec) ** 2
        value = exact if p.method == "exact" else sampled
        rows.append({"n": n, "norm_sq": value, "n_times_norm_sq": n * value,
                     "norm_sq_exact": exact, "norm_sq_grid": sampled})
    res.tables["bump_norms"] = rows
    ns = [r["n"] for r in rows]
    scaled = np.array([r["n_times_norm_sq"] for r in rows])
    res.series["n_times_norm_sq"] = (ns, list(scaled))
    ratio = float(scaled.max() / np.median(scaled))
    res.check("max_over_median", ratio, ratio < 2.0, "< 2")
    if len(ns) > 1:
        slope = M.decay_slope(ns, [r["norm_sq"] for r in rows])
        res.check("norm_sq_slope", slope, abs(slope + 1.0) <= 0.2, "-1 +/- 0.2")
    return res


def run_displace_1d(p, seed):
    res = ExperimentResult()
    A = M.Rectangle((0.0,), (1.0,))
    spec = MultiplierSpec("inhomogeneous", p.s)
    rows = []
    for n, disp, rep in M.displacement_energy_upper_bound(A, "1d", p.n_list, s=p.s,
                                                         samples=p.samples):
        ref = MS.xi_norm(n, spec)
        rows.append({"n": n, "disjoint": disp.disjoint, "min_separation": disp.min_separation,
                     "length": rep.length, "energy": rep.energy, "xi_norm": ref,
                     "relative_error": abs(rep.length - ref) / ref})
    res.tables["displacement"] = rows
    res.series["length"] = ([r["n"] for r in rows], [r["length"] for r in rows])
    res.check("all_disjoint", float(min(r["min_separation"] for r in rows)),
              all(r["disjoint"] for r in rows), "every row disjoint (margin 1e-6 diam A)")
    worst = max(r["relative_error"] for r in rows)
    res.check("length_matches_xi_norm", worst, worst < p.length_tol, f"< {p.length_tol}")
    if len(rows) > 1:
        slope = M.decay_slope([r["n"] for r in rows], [r["length"] for r in rows])
        res.check("length_slope", slope, abs(slope + 0.5) <= 0.15, "-0.5 +/- 0.15")
    return res


def hamiltonian_profile_norm(spec=None):
    """||F||_{H^{1/2}(R)} of the profile F(x) = -x psi(x)."""
    spec = MultiplierSpec("inhomogeneous", 0.5) if spec is None else spec
    grid = Grid1D(2 ** 14, 16.0)
    return sobolev_norm_1d(GridFunction1D.sample(grid, C.hamiltonian_1d), spec)


def planar_displacement_row(n, A, samples, dt, frame="comoving"):
    """Flow A's Halton points under u_n with Jacobian tracking; measure everything."""
    fld = F.planar_shear_field(n)
    opts = M.planar_flow_options(fld, dt_max=dt, jacobian_tracking=True)
    if frame == "lab":
        opts = dataclasses.replace(opts, frame="lab")
    path = F.integrate_flow_map(fld, 0.0, 1.0, A.halton(samples), opts)
    det_err = max(float(np.abs(F.jacobian_determinant(path, k) - 1.0).max())
                  for k in range(path.n_knots))
    rep = M.path_length(path, -0.5)
    sep = float(A.distance(path.positions[-1]).min())
    disp = M.DisplacementResult(A.describe(), bool(sep > M.DISJOINT_MARGIN * A.diameter), sep, n,
                                rep.length, samples)
    return path, disp, rep, det_err, opts.dt


def run_displace_2d(p, seed):
    res = ExperimentResult()
    A = M.Rectangle((-1.0, 0.0), (1.0, 1.0))
    half = MultiplierSpec("inhomogeneous", 0.5)
    knots = F.knot_times(0.0, 1.0)
    ks = [MS.composition_factor(float(t))[0] for t in knots]
    K = max(ks)
    fnorm = hamiltonian_profile_norm(half)
    rows = []
    for n in sorted(p.n_list):
        _, disp, rep, det_err, dt_used = planar_displacement_row(n, A, p.samples, p.dt, p.frame)
        bound = fnorm * MS.xi_norm(n, half) * K
        rows.append({"n": n, "disjoint": disp.disjoint, "min_separation": disp.min_separation,
                     "length": rep.length, "energy": rep.energy, "det_error": det_err,
                     "dt": dt_used, "factorized_bound": bound, "bound_holds": rep.length <= bound})
    res.tables["displacement"] = rows
    res.tables["composition_factor"] = [{"t": float(t), "K": k} for t, k in zip(knots, ks)]
    res.series["length"] = ([r["n"] for r in rows], [r["length"] for r in rows])
    res.check("all_disjoint", float(min(r["min_separation"] for r in rows)),
              all(r["disjoint"] for r in rows), "every row disjoint (margin 1e-6 diam A)")
    worst = max(r["det_error"] for r in rows)
    res.check("det_jacobian", worst, worst < p.det_tol, f"|det J - 1| < {p.det_tol} at every knot")
    if len(rows) > 1:
        slope = M.decay_slope([r["n"] for r in rows], [r["length"] for r in rows])
        res.check("length_slope", slope, abs(slope + 0.5) <= 0.15, "-0.5 +/- 0.15")
    res.check("factorized_bound", K, all(r["bound_holds"] for r in rows),
              "length <= ||f|| ||xi_n|| K for every n")
    return res


def _smooth_periodic(rng, x, period, modes=6):
    """Random trigonometric polynomial with geometrically decaying coefficients."""
    out = np.full_like(x, rng.normal())
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2) * 0.6 ** k
        out += a * np.cos(2 * np.pi * k * x / period) + b * np.sin(2 * np.pi * k * x / period)
    return out


def run_tensor_check(p, seed):
    res = ExperimentResult()
    rng = np.random.default_rng(seed)
    g1 = Grid1D(p.n_points, 2 * np.pi, 0.0)
    g2 = Grid2D.square(p.n_points, 2 * np.pi, 0.0)
    spec1 = MultiplierSpec("inhomogeneous", p.s)
    spec2 = MultiplierSpec("tensor", (p.s, p.s))
    rows = []
    for i in range(p.pairs):
        g = _smooth_periodic(rng, g1.x, g1.period)
        h = _smooth_periodic(rng, g1.x, g1.period)
        lhs = sobolev_norm_2d(GridFunction2D(g2, np.outer(g, h)), spec2)
        rhs = sobolev_norm_1d(GridFunction1D(g1, g), spec1) * sobolev_norm_1d(GridFunction1D(g1, h), spec1)
        rows.append({"pair": i, "tensor_norm": lhs, "product": rhs, "relative_error": abs(lhs - rhs) / rhs})
    res.tables["tensor"] = rows
    worst = max(r["relative_error"] for r in rows)
    res.check("tensor_identity", worst, worst < 1e-10, "< 1e-10")
    return res


def run_symplectic_identity(p, seed):
    res = ExperimentResult()
    rng = np.random.default_rng(seed)
    grid = Grid2D.square(p.n_points, 2 * np.pi, 0.0)
    X, Y = grid.mesh()
    minus = MultiplierSpec("homogeneous", -0.5)
    plus = MultiplierSpec("homogeneous", 0.5)
    rows = []
    for i in range(p.functions):
        vals = np.zeros_like(X)
        for kx in range(-4, 5):
            for ky in range(-4, 5):
                if kx == 0 and ky == 0:
                    continue
                a, b = rng.normal(size=2) * 0.7 ** (abs(kx) + abs(ky))
                vals += a * np.cos(kx * X + ky * Y) + b * np.sin(kx * X + ky * Y)
        f = GridFunction2D(grid, vals - vals.mean())
        u1, u2 = symplectic_gradient_grid(f)
        lhs = vector_sobolev_norm((u1, u2), minus)
        rhs = sobolev_norm_2d(f, plus)
        rows.append({"function": i, "gradient_norm": lhs, "function_norm": rhs,
                     "relative_error": abs(lhs - rhs) / rhs})
    res.tables["symplectic_identity"] = rows
    worst = max(r["relative_error"] for r in rows)
    res.check("symplectic_gradient_identity", worst, worst < 1e-10, "< 1e-10")
    return res


def right_invariance_rows(n_list, reference_points=16001, s=0.5):
    """Length of t -> phi(t) o psi against the length of phi, for fixed psi per row."""
    psis = [("x + 0.1 sin x", lambda x: x + 0.1 * np.sin(x)),
            ("1.2 x + 0.3", lambda x: 1.2 * x + 0.3),
            ("x + 0.05 tanh x", lambda x: x + 0.05 * np.tanh(x))]
    rows = []
    for i, n in enumerate(n_list):
        label, psi_map = psis[i % len(psis)]
        fld = F.translating_bump_field(n)
        ref = np.linspace(-1.5, 2.5, reference_points)
        path = F.integrate_flow_map(fld, 0.0, 1.0, ref, M.line_flow_options(fld))
        grid = M.default_line_grid(path)
        a = M.path_length(path, s, grid=grid).length
        b = M.path_length(M.right_compose(path, psi_map), s, grid=grid, method="inversion").length
        rows.append({"n": n, "psi": label, "length": a, "composed_length": b,
                     "relative_difference": abs(a - b) / a})
    return rows


def run_commutator(p, seed):
    res = ExperimentResult()
    rows = []
    for n0, s0, n1, s1 in p.pairs:
        f0 = F.translating_bump_field(int(n0), float(s0))
        f1 = F.translating_bump_field(int(n1), float(s1))
        rep = M.commutator_path_bound(f0, f1, p.s, allowance=p.allowance)
        (lo0,), (hi0,) = f0.support
        (lo1,), (hi1,) = f1.support
        disjoint = hi0 + 1.0 < lo1 or hi1 + 1.0 < lo0
        rows.append({"n0": int(n0), "shift0": float(s0), "n1": int(n1), "shift1": float(s1),
                     "disjoint_supports": disjoint, **rep.to_dict()})
    res.tables["commutator"] = rows
    res.check("commutator_bound", max(r["length"] / r["bound"] for r in rows),
              all(r["holds"] for r in rows), "length <= (1 + |L|) length(path1) (1 + allowance)")
    dis = [r["endpoint_error"] for r in rows if r["disjoint_supports"]]
    if dis:
        res.check("disjoint_commutator_identity", max(dis), max(dis) < 1e-8, "< 1e-8")
    ri = right_invariance_rows(p.right_invariance_n, p.reference_points, p.s)
    res.tables["right_invariance"] = ri
    worst = max(r["relative_difference"] for r in ri)
    res.check("right_invariance", worst, worst < 5e-3, "< 0.5%")
    return res


def run_lipschitz(p, seed):
    res = ExperimentResult()
    probes = M.probe_dictionary(p.probes)
    dense = M.probe_dictionary(p.dense_probes)
    rows = []
    ident = M.left_lipschitz_estimate(M.LineMap.identity(), probes, p.s).constant
    shift = M.left_lipschitz_estimate(M.LineMap.translation(1.0), probes, p.s).constant
    rows.append({"map": "identity", "constant": ident, "dense_constant": None})
    rows.append({"map": "translation by 1", "constant": shift, "dense_constant": None})
    res.check("identity", abs(ident - 1.0), abs(ident - 1.0) < 1e-10, "|C - 1| < 1e-10")
    res.check("translation", abs(shift - 1.0), abs(shift - 1.0) < 1e-6, "|C - 1| < 1e-6")
    worst = 0.0
    for n in p.n_list:
        g = M.LineMap.flow_endpoint(F.translating_bump_field(n))
        a = M.left_lipschitz_estimate(g, probes, p.s).constant
        b = M.left_lipschitz_estimate(g, dense, p.s).constant
        worst = max(worst, abs(b - a) / b)
        rows.append({"map": f"u_{n} endpoint", "constant": a, "dense_constant": b})
    res.tables["lipschitz"] = rows
    if p.n_list:
        res.check("dense_sweep_agreement", worst, worst < 0.1, "< 10%")
    return res


def _trajectory_tables(res, traj):
    d = traj.diagnostics
    res.tables["diagnostics"] = [
        {"t": t, "l2": a, "energy": e, "min_ux_or_max_grad": g, "tail_fraction": f}
        for t, a, e, g, f in zip(d.t, d.l2, d.energy, d.extremal, d.tail_fraction)]
    res.tables["summary"] = [_jsonable(d.summary())]


def run_burgers(p, seed):
    res = ExperimentResult()
    u0 = EA.preset_1d(p.init, p.n)
    traj = EA.burgers_solve(u0, p.t_end, p.dt)
    _trajectory_tables(res, traj)
    d = traj.diagnostics
    if d.predicted_blowup_time is not None:
        t_star = float(d.predicted_blowup_time)
        detected = d.blowup_time if d.blowup else float("nan")
        err = abs(detected - t_star) / t_star if d.blowup else float("inf")
        res.check("blowup_time", detected, d.blowup and err <= 0.05, f"within 5% of {t_star:.6g}")
    early = EA.burgers_solve(u0, p.oracle_time, p.oracle_dt)
    exact = EA.burgers_characteristics(EA.PRESETS_1D[p.init], p.oracle_time, u0.grid.x)
    oerr = float(np.abs(early.final.u.values - exact).max())
    res.tables["oracle"] = [{"t": p.oracle_time, "max_error": oerr}]
    res.check("characteristics_oracle", oerr, oerr < 1e-6, "< 1e-6")
    mean_drift = float(np.max(np.abs(np.asarray(early.diagnostics.mean) - early.diagnostics.mean[0])))
    res.check("mean_conservation", mean_drift, mean_drift < 1e-12, "< 1e-12")
    return res


def run_epdiff(p, seed):
    res = ExperimentResult()
    u0 = EA.preset_1d(p.init, p.n)
    traj = EA.epdiff1d_solve(u0, p.s, p.t_end, p.dt)
    _trajectory_tables(res, traj)
    d = traj.diagnostics
    if float(p.s) == 1.0:
        drift = d.drift("energy")
        res.check("energy_drift", drift, drift < 1e-6 and not d.blowup, "< 1e-6 (no blowup)")
    else:
        res.check("blowup_flag", d.blowup_time if d.blowup else float("nan"), d.blowup,
                  f"blowup flagged before t = {p.t_end}")
    mean_drift = float(np.max(np.abs(np.asarray(d.mean) - d.mean[0])))
    res.check("mean_conservation", mean_drift, mean_drift < 1e-12, "< 1e-12")
    return res


def run_sqg(p, seed):
    res = ExperimentResult()
    theta0 = EA.preset_2d(p.init, p.n)
    single = EA.preset_2d("single-mode", p.n)
    rhs = float(np.abs(EA.sqg_rhs(single).values).max())
    res.check("single_mode_steady", rhs, rhs < 1e-12, "< 1e-12")
    if np.any(theta0.values):
        u1, u2 = perp_gradient_inverse_sqrt_laplacian(theta0)
        back = theta_from_velocity(u1, u2)
        rt = float(np.abs(back.values - theta0.values).max() / np.abs(theta0.values).max())
        res.check("inversion_round_trip", rt, rt < 1e-10, "< 1e-10")
    traj = EA.sqg_solve(theta0, p.t_end, p.dt)
    _trajectory_tables(res, traj)
    d = traj.diagnostics
    if np.any(theta0.values):
        res.check("l2_drift", d.drift("l2"), d.drift("l2") < 1e-6, "< 1e-6")
        res.check("hamiltonian_drift", d.drift("energy"), d.drift("energy") < 1e-5, "< 1e-5")
    return res


RUNNERS = {
    "bump-norms": run_bump_norms,
    "displace-1d": run_displace_1d,
    "displace-2d": run_displace_2d,
    "tensor-check": run_tensor_check,
    "corollary-43": run_symplectic_identity,
    "commutator": run_commutator,
    "lipschitz": run_lipschitz,
    "burgers": run_burgers,
    "epdiff": run_epdiff,
    "sqg": run_sqg,
}


# --- running and reporting ---------------------------------------------------------------


def execute(config):
    """Run a parsed config; returns (ExperimentResult or None, error message or None, seconds)."""
    start = time.perf_counter()
    try:
        result = RUNNERS[config.experiment](config.parameters, config.seed)
        err = None
    except VDLError as exc:
        result, err = None, f"{type(exc).__name__}: {exc}"
    return result, err, time.perf_counter() - start


def build_report(config, result, error, seconds):
    status = "error" if error else ("pass" if result.passed else "fail")
    report = {
        "schema": SCHEMA,
        "software": {"package": "vdl", "version": __version__, "python": platform.python_version(),
                     "numpy": np.__version__},
        "config": config.to_dict(),
        "status": status,
        "wall_clock_seconds": seconds,
    }
    if error:
        report["rows"] = {"failure": [{"error": error}]}
        report["verdicts"] = []
    else:
        report["rows"] = {k: _jsonable(v) for k, v in result.tables.items()}
        report["verdicts"] = [v.to_dict() for v in result.verdicts]
    return report


def _write_csv(path, rows):
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_jsonable(v))
    return str(v)


def write_outputs(out_dir, report, result):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    if result is None:
        return out
    for name, rows in result.tables.items():
        if rows:
            _write_csv(out / f"{name}.csv", rows)
    for name, (xs, ys) in result.series.items():
        _write_csv(out / f"plot_{name}.csv", [{"x": x, "y": y} for x, y in zip(xs, ys)])
    return out


def run(config, out_dir=None):
    """Execute ``config`` (raw mapping or ExperimentConfig); returns the report dict."""
    if not isinstance(config, ExperimentConfig):
        config = parse_config(config)
    result, err, secs = execute(config)
    report = build_report(config, result, err, secs)
    if out_dir is not None:
        write_outputs(out_dir, report, result)
    return report
