"""Exact (grid-free) Sobolev norms of the dyadic bump family on the line and plane.

The finest member of ``xi_n`` varies on the scale 2^-n, so a uniform grid
cannot resolve ``xi_32`` (it would need billions of points).  Instead we use
that ``xi_n`` is an average of dilates f(2^j x) of one bump ``f``:

    ||sum_j c_j f(2^j .)||^2 = sum_{j,k} c_j c_k G_jk,
    G_jk = (1/pi) int_0^inf w(w) fhat_j(w) fhat_k(w) dw,   fhat_j(w) = 2^-j fhat(w / 2^j).

After the substitution w = 2^j nu (j <= k) every entry is an integral of
``w(2^j nu) fhat(nu) fhat(2^(j-k) nu)`` over a fixed nu-range, and ``fhat``
is tabulated once by FFT.  The weight w is the squared symbol for norms on
the line.

For the planar Hamiltonians F(x) phi(y - g(x)) the same identity holds with
w replaced by the sheared weight

    B(w) = (1/2pi) int a(k, w)^2 |int F(x) exp(-i (w g(x) + k x)) dx|^2 dk,

computed by FFT in x for w <= ``omega_split`` and by its large-w asymptotic
``int F^2 a(w g'(x), w)^2 dx`` (with a fitted 1/w^2 correction) beyond.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .constructions import base_bump
from .errors import ConfigurationError
from .spectral import MultiplierSpec, wavenumbers

# transform table for the base bump: nu in [0, NU_MAX] with spacing 2 pi / (N h)
_H = 2.0 ** -11
_N = 2 ** 21
NU_MAX = 1200.0
MAX_LEVELS = 40


@lru_cache(maxsize=1)
def bump_transform():
    """Return (nu, fhat) with fhat(nu) = int f(x) exp(-i nu x) dx for the base bump."""
    x = (np.arange(_N) - _N // 2) * _H
    fhat = np.fft.fft(np.fft.ifftshift(base_bump(x))).real * _H
    nu = 2.0 * np.pi * np.arange(_N // 2) / (_N * _H)
    keep = nu <= NU_MAX
    return nu[keep], fhat[: _N // 2][keep]


@lru_cache(maxsize=1)
def _basis():
    nu, fhat = bump_transform()
    spline = CubicSpline(nu, fhat, bc_type=((1, 0.0), "not-a-knot"))
    quad = np.full(nu.size, nu[1] - nu[0])
    quad[0] *= 0.5
    quad[-1] *= 0.5
    # products fhat(nu) fhat(2^-d nu) for every level gap d
    prods = np.empty((MAX_LEVELS, nu.size))
    for d in range(MAX_LEVELS):
        prods[d] = fhat * spline(nu * 2.0 ** -d)
    return nu, quad, prods


def dyadic_gram(weight, levels):
    """Gram matrix of the dilates f(2^j x), j < levels, for an even weight ``weight(w)``."""
    if not 1 <= levels <= MAX_LEVELS:
        raise ConfigurationError(f"levels must lie in [1, {MAX_LEVELS}]")
    nu, quad, prods = _basis()
    W = np.empty((levels, nu.size))
    for j in range(levels):
        W[j] = weight(nu * 2.0 ** j) * quad
    G = np.empty((levels, levels))
    for d in range(levels):
        vals = W[: levels - d] @ prods[d]
        for j in range(levels - d):
            k = j + d
            G[j, k] = G[k, j] = vals[j] * 2.0 ** -k / np.pi
    return G


def line_weight(spec):
    """Squared 1D symbol as a function of the (nonnegative) frequency."""
    spec = spec if isinstance(spec, MultiplierSpec) else MultiplierSpec(*spec)
    return lambda w: spec.symbol_1d(np.asarray(w, dtype=float)) ** 2


@lru_cache(maxsize=16)
def _line_gram(kind, order, levels):
    return dyadic_gram(line_weight(MultiplierSpec(kind, order)), levels)


def _spec_key(spec):
    return spec.kind, spec.order


def xi_norm(n, spec):
    """Norm of xi_n on the real line under a 1D multiplier (exact up to quadrature)."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    G = _line_gram(*_spec_key(spec), max(n, 1))
    return float(np.sqrt(G[:n, :n].sum()) / n)


def combination_norm(coeffs, gram):
    c = np.asarray(coeffs, dtype=float)
    G = gram[: c.size, : c.size]
    return float(np.sqrt(max(c @ G @ c, 0.0)))


def xi_coefficients(n):
    return np.full(n, 1.0 / n)


# --- planar sheared products --------------------------------------------------


@dataclass(frozen=True)
class ShearedWeight:
    """The weight B(w) for F(x) phi(y - g(x)) under a 2D multiplier.

    ``profile`` is F, ``shear`` and ``shear_slope`` are g and g'.  All are
    vectorised callables of x; F must be supported well inside the box.
    """

    profile: object
    shear: object
    shear_slope: object
    spec: MultiplierSpec
    box: float = 8.0
    n_x: int = 2 ** 13
    omega_split: float = 64.0
    table_step: float = 0.05
    chunk: int = 128

    def __post_init__(self):
        x = -0.5 * self.box + self.box / self.n_x * np.arange(self.n_x)
        F = np.asarray(self.profile(x), dtype=float)
        g = np.asarray(self.shear(x), dtype=float) * np.ones_like(x)
        gp = np.asarray(self.shear_slope(x), dtype=float) * np.ones_like(x)
        if np.abs(F[:8]).max() > 0 or np.abs(F[-8:]).max() > 0:
            raise ConfigurationError("profile must vanish near the edges of the box")
        h = self.box / self.n_x
        k = wavenumbers(self.n_x, self.box)

        ws = np.arange(0.0, self.omega_split + 0.5 * self.table_step, self.table_step)
        direct = np.empty(ws.size)
        for start in range(0, ws.size, self.chunk):
            w = ws[start:start + self.chunk]
            A = np.fft.fft(F[None, :] * np.exp(-1j * w[:, None] * g[None, :]), axis=1) * h
            a2 = self.spec.symbol_2d(k[None, :], w[:, None]) ** 2
            direct[start:start + self.chunk] = (a2 * np.abs(A) ** 2).sum(axis=1) / self.box
        object.__setattr__(self, "_direct", CubicSpline(ws, direct))

        F2h = F * F * h

        def asym(w):
            w = np.atleast_1d(np.asarray(w, dtype=float))
            a2 = self.spec.symbol_2d(w[:, None] * gp[None, :], w[:, None] * np.ones_like(gp)) ** 2
            return a2 @ F2h

        top = 2.0 ** MAX_LEVELS * NU_MAX
        logs = np.linspace(np.log(self.omega_split), np.log(top), 600)
        tab = asym(np.exp(logs))
        b0 = asym(self.omega_split)[0]
        object.__setattr__(self, "_corr", (direct[-1] / b0 - 1.0) * self.omega_split ** 2)
        object.__setattr__(self, "_asym", CubicSpline(logs, np.log(tab)))

    def __call__(self, w):
        w = np.abs(np.asarray(w, dtype=float))
        out = np.empty_like(w)
        lo = w <= self.omega_split
        out[lo] = self._direct(w[lo])
        hi = ~lo
        wh = w[hi]
        out[hi] = np.exp(self._asym(np.log(wh))) * (1.0 + self._corr / wh ** 2)
        return out

    def direct(self, w):
        """Reference value by a single FFT (for tests)."""
        x = -0.5 * self.box + self.box / self.n_x * np.arange(self.n_x)
        h = self.box / self.n_x
        A = np.fft.fft(self.profile(x) * np.exp(-1j * w * self.shear(x))) * h
        k = wavenumbers(self.n_x, self.box)
        return float((self.spec.symbol_2d(k, w * np.ones_like(k)) ** 2 * np.abs(A) ** 2).sum() / self.box)


def sheared_gram(weight, levels):
    return dyadic_gram(weight, levels)


def sheared_xi_norm(weight, n, gram=None):
    """Norm of F(x) xi_n(y - g(x)) given its :class:`ShearedWeight`."""
    G = dyadic_gram(weight, n) if gram is None else gram
    return float(np.sqrt(G[:n, :n].sum()) / n)


# --- the planar Hamiltonians f_n(t) -------------------------------------------

PLANAR_LEVELS = 32


def _profiles():
    from .constructions import hamiltonian_1d, psi
    return {"hamiltonian": hamiltonian_1d, "psi": psi, "bump": base_bump}


@lru_cache(maxsize=512)
def planar_gram(t, kind, order, profile="hamiltonian"):
    """Gram matrix for F(x) f(2^j (y - g(t, x))), j < 32, under an isotropic 2D symbol."""
    from .constructions import g_profile
    prof = _profiles()[profile]
    weight = ShearedWeight(prof, lambda x: g_profile(t, x), lambda x: g_profile(t, x, 1),
                           MultiplierSpec(kind, order))
    return dyadic_gram(weight, PLANAR_LEVELS)


def planar_xi_norm(n, t, spec, profile="hamiltonian"):
    """Norm of F(x) xi_n(y - g(t, x)); with the default profile this is f_n(t)."""
    if not 1 <= n <= PLANAR_LEVELS:
        raise ConfigurationError(f"n must lie in [1, {PLANAR_LEVELS}]")
    G = planar_gram(float(t), spec.kind, spec.order, profile)
    return float(np.sqrt(G[:n, :n].sum()) / n)


def probe_coefficients(levels=PLANAR_LEVELS):
    """Coefficient vectors of the y-probes: xi_m for every m and every single dilate."""
    probes = []
    for m in range(1, levels + 1):
        c = np.zeros(levels)
        c[:m] = 1.0 / m
        probes.append(("xi", m, c))
    for j in range(levels):
        c = np.zeros(levels)
        c[j] = 1.0
        probes.append(("dilate", j, c))
    return probes


def composition_factor(t, spec=None, profile="hamiltonian"):
    """Probe estimate of the norm of h -> h o (x, y - g(t, x)).

    Returns ``(K, ratios)`` where ``ratios`` maps probe labels to the ratio of
    the sheared norm to the unsheared one.  Uses the inhomogeneous H^{1/2}
    symbol unless ``spec`` says otherwise.
    """
    spec = MultiplierSpec("inhomogeneous", 0.5) if spec is None else spec
    G1 = planar_gram(float(t), spec.kind, spec.order, profile)
    G0 = planar_gram(0.0, spec.kind, spec.order, profile)
    ratios = {}
    for kind, idx, c in probe_coefficients():
        ratios[(kind, idx)] = combination_norm(c, G1) / combination_norm(c, G0)
    return max(ratios.values()), ratios
