"""Fourier-multiplier Sobolev norms and fractional operators on periodic grids.

A grid function is a set of real samples on a uniform periodic grid.  The
continuous line (or plane) is represented by a box much larger than the
support of the functions involved, so wraparound never touches the data.

Norm convention: for a symbol ``a`` the norm is ``||F^{-1} a F f||_{L^2}``
with the discrete L2 inner product ``spacing * sum(f * g)``.  By Parseval
this is ``sqrt(spacing / N * sum |a_k fhat_k|^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

KINDS = ("inhomogeneous", "homogeneous", "tensor")
# relative size of the zero mode below which data counts as mean-zero
MEAN_TOL = 1e-12
IMAG_TOL = 1e-10


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def _check_axis(n, period, name):
    if isinstance(n, bool) or int(n) != n:
        raise ConfigurationError(f"{name}: n_points must be an integer, got {n!r}")
    n = int(n)
    if n < 8 or not _is_pow2(n):
        raise ConfigurationError(f"{name}: n_points must be a power of two >= 8, got {n}")
    if not (np.isfinite(period) and period > 0):
        raise ConfigurationError(f"{name}: period must be positive, got {period!r}")
    return n


def wavenumbers(n, period):
    """Angular wavenumbers 2 pi k / L in FFT order."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=period / n)


def odd_wavenumbers(n, period):
    """Wavenumbers for odd (derivative) symbols: the Nyquist entry is zeroed."""
    k = wavenumbers(n, period)
    k[n // 2] = 0.0
    return k


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    period: float
    offset: float = None

    def __post_init__(self):
        n = _check_axis(self.n_points, self.period, "grid")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "period", float(self.period))
        off = -0.5 * self.period if self.offset is None else float(self.offset)
        object.__setattr__(self, "offset", off)

    @property
    def spacing(self):
        return self.period / self.n_points

    @property
    def x(self):
        return self.offset + self.spacing * np.arange(self.n_points)

    @property
    def k(self):
        return wavenumbers(self.n_points, self.period)

    def descriptor(self):
        return {"dims": 1, "n_points": [self.n_points], "period": [self.period],
                "offset": [self.offset]}


@dataclass(frozen=True)
class Grid2D:
    n_x: int
    n_y: int
    period_x: float
    period_y: float
    offset_x: float = None
    offset_y: float = None

    def __post_init__(self):
        object.__setattr__(self, "n_x", _check_axis(self.n_x, self.period_x, "x axis"))
        object.__setattr__(self, "n_y", _check_axis(self.n_y, self.period_y, "y axis"))
        object.__setattr__(self, "period_x", float(self.period_x))
        object.__setattr__(self, "period_y", float(self.period_y))
        for name, per in (("offset_x", self.period_x), ("offset_y", self.period_y)):
            val = getattr(self, name)
            object.__setattr__(self, name, -0.5 * per if val is None else float(val))

    @classmethod
    def square(cls, n, period, offset=None):
        return cls(n, n, period, period, offset, offset)

    @property
    def axes(self):
        return (Grid1D(self.n_x, self.period_x, self.offset_x),
                Grid1D(self.n_y, self.period_y, self.offset_y))

    @property
    def shape(self):
        return (self.n_x, self.n_y)

    @property
    def cell_area(self):
        return self.period_x * self.period_y / (self.n_x * self.n_y)

    def mesh(self):
        """Coordinate arrays X, Y of shape (n_x, n_y) (y varies fastest)."""
        gx, gy = self.axes
        return np.meshgrid(gx.x, gy.x, indexing="ij")

    def descriptor(self):
        return {"dims": 2, "n_points": [self.n_x, self.n_y],
                "period": [self.period_x, self.period_y],
                "offset": [self.offset_x, self.offset_y]}


def _frozen_values(values, shape):
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ConfigurationError(f"values have shape {arr.shape}, grid expects {shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("grid function values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridFunction1D:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_values(self.values, (self.grid.n_points,)))

    @classmethod
    def sample(cls, grid, func):
        return cls(grid, func(grid.x))

    def with_values(self, values):
        return GridFunction1D(self.grid, values)

    @property
    def mean(self):
        return float(np.mean(self.values))


@dataclass(frozen=True)
class GridFunction2D:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_values(self.values, self.grid.shape))

    @classmethod
    def sample(cls, grid, func):
        X, Y = grid.mesh()
        return cls(grid, func(X, Y))

    def with_values(self, values):
        return GridFunction2D(self.grid, values)

    @property
    def mean(self):
        return float(np.mean(self.values))


@dataclass(frozen=True)
class MultiplierSpec:
    """Symbol of a Fourier multiplier.

    ``order`` is a real number; for ``tensor`` it may also be a pair of
    per-axis orders.  In 1D the tensor symbol reduces to the inhomogeneous one.
    """

    kind: str
    order: float | tuple = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown multiplier kind {self.kind!r}; expected one of {KINDS}")
        order = self.order
        if isinstance(order, (tuple, list)):
            if self.kind != "tensor" or len(order) != 2:
                raise ConfigurationError("per-axis orders are only allowed for tensor symbols in 2D")
            order = (float(order[0]), float(order[1]))
        else:
            order = float(order)
        object.__setattr__(self, "order", order)

    def _orders(self):
        return self.order if isinstance(self.order, tuple) else (self.order, self.order)

    @property
    def negative(self):
        return min(self._orders()) < 0

    def symbol_1d(self, k):
        s = self._orders()[0]
        if self.kind == "homogeneous":
            ak = np.abs(k)
            out = np.zeros_like(ak)
            nz = ak > 0
            out[nz] = ak[nz] ** s
            return out
        return (1.0 + k * k) ** (0.5 * s)

    def symbol_2d(self, kx, ky):
        if self.kind == "tensor":
            sx, sy = self._orders()
            return (1.0 + kx * kx) ** (0.5 * sx) * (1.0 + ky * ky) ** (0.5 * sy)
        k2 = kx * kx + ky * ky
        s = self.order
        if self.kind == "inhomogeneous":
            return (1.0 + k2) ** (0.5 * s)
        out = np.zeros_like(k2)
        nz = k2 > 0
        out[nz] = k2[nz] ** (0.5 * s)
        return out

    def inverse(self):
        if isinstance(self.order, tuple):
            return MultiplierSpec(self.kind, (-self.order[0], -self.order[1]))
        return MultiplierSpec(self.kind, -self.order)

    def describe(self):
        return {"kind": self.kind, "order": list(self.order) if isinstance(self.order, tuple) else self.order}


def _as_spec(m):
    if isinstance(m, MultiplierSpec):
        return m
    if isinstance(m, dict):
        return MultiplierSpec(m["kind"], m.get("order", 0.0))
    raise ConfigurationError(f"expected a MultiplierSpec, got {type(m).__name__}")


def _check_mean(fhat, m):
    """Zero frequency must vanish for homogeneous symbols of negative order."""
    if m.kind != "homogeneous" or not m.negative:
        return
    zero = abs(fhat.flat[0])
    top = np.max(np.abs(fhat))
    if top > 0 and zero > MEAN_TOL * top:
        mean = fhat.flat[0].real / fhat.size
        raise DomainError(
            f"homogeneous order {m.order} needs mean-zero input; the mean is {mean:.6g}")


def _symbol_for(f, m):
    if isinstance(f, GridFunction1D):
        return m.symbol_1d(f.grid.k)
    if isinstance(f, GridFunction2D):
        gx, gy = f.grid.axes
        kx, ky = np.meshgrid(gx.k, gy.k, indexing="ij")
        return m.symbol_2d(kx, ky)
    raise ConfigurationError(f"expected a grid function, got {type(f).__name__}")


def _rfft_weights(n):
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def sobolev_norm_1d(f, m):
    """Multiplier norm of a 1D grid function."""
    if not isinstance(f, GridFunction1D):
        raise ConfigurationError("sobolev_norm_1d expects a GridFunction1D")
    m = _as_spec(m)
    g = f.grid
    fhat = np.fft.rfft(f.values)
    _check_mean(fhat, m)
    k = 2.0 * np.pi * np.arange(fhat.size) / g.period
    a = m.symbol_1d(k)
    total = np.sum(_rfft_weights(g.n_points) * (a * np.abs(fhat)) ** 2)
    return float(np.sqrt(g.spacing / g.n_points * total))


def sobolev_norm_2d(f, m):
    """Multiplier norm of a 2D grid function."""
    if not isinstance(f, GridFunction2D):
        raise ConfigurationError("sobolev_norm_2d expects a GridFunction2D")
    m = _as_spec(m)
    g = f.grid
    fhat = np.fft.rfft2(f.values)
    _check_mean(fhat, m)
    kx = wavenumbers(g.n_x, g.period_x)[:, None]
    ky = (2.0 * np.pi * np.arange(fhat.shape[1]) / g.period_y)[None, :]
    a = m.symbol_2d(kx, ky)
    total = np.sum(_rfft_weights(g.n_y)[None, :] * (a * np.abs(fhat)) ** 2)
    return float(np.sqrt(g.cell_area / (g.n_x * g.n_y) * total))


def sobolev_norm(f, m):
    if isinstance(f, GridFunction2D):
        return sobolev_norm_2d(f, m)
    return sobolev_norm_1d(f, m)


def vector_sobolev_norm(components, m):
    """Componentwise norm sqrt(sum_i ||u_i||^2) of a vector field."""
    return float(np.sqrt(sum(sobolev_norm(c, m) ** 2 for c in components)))


def _fft(f):
    return np.fft.fft2(f.values) if isinstance(f, GridFunction2D) else np.fft.fft(f.values)


def _ifft_real(f, spec, what):
    out = np.fft.ifft2(spec) if isinstance(f, GridFunction2D) else np.fft.ifft(spec)
    # relative to the input as well: outputs such as a divergence are ~0
    scale = max(np.max(np.abs(out.real)), np.max(np.abs(f.values)))
    resid = np.max(np.abs(out.imag))
    if resid > IMAG_TOL * max(scale, 1e-300) and resid > 1e-300:
        raise DomainError(f"{what}: imaginary residue {resid:.3g} exceeds tolerance")
    return f.with_values(out.real)


def apply_multiplier(f, m):
    """Return F^{-1} a F f for a real grid function ``f``."""
    m = _as_spec(m)
    fhat = _fft(f)
    _check_mean(fhat, m)
    return _ifft_real(f, _symbol_for(f, m) * fhat, "apply_multiplier")


# --- derivatives and the 2D operators used by SQG ----------------------------


def derivative(f, axis=0, order=1):
    """Spectral derivative along ``axis`` (Nyquist zeroed for odd orders)."""
    if isinstance(f, GridFunction1D):
        if axis != 0:
            raise ConfigurationError("1D grid functions only have axis 0")
        k = odd_wavenumbers(f.grid.n_points, f.grid.period) if order % 2 else f.grid.k
        return _ifft_real(f, (1j * k) ** order * np.fft.fft(f.values), "derivative")
    g = f.grid
    n, per = (g.n_x, g.period_x) if axis == 0 else (g.n_y, g.period_y)
    k = odd_wavenumbers(n, per) if order % 2 else wavenumbers(n, per)
    mult = (1j * k) ** order
    mult = mult[:, None] if axis == 0 else mult[None, :]
    return _ifft_real(f, mult * np.fft.fft2(f.values), "derivative")


def _check_mean_zero(theta, what):
    mean = theta.mean
    scale = np.max(np.abs(theta.values))
    if abs(mean) > MEAN_TOL * max(scale, 1.0):
        raise DomainError(f"{what} needs mean-zero input; the mean is {mean:.6g}")


def _odd_mesh(grid):
    kx = odd_wavenumbers(grid.n_x, grid.period_x)[:, None]
    ky = odd_wavenumbers(grid.n_y, grid.period_y)[None, :]
    return kx, ky


def _inv_abs_k(grid):
    gx, gy = grid.axes
    kx, ky = np.meshgrid(gx.k, gy.k, indexing="ij")
    mag = np.sqrt(kx * kx + ky * ky)
    inv = np.zeros_like(mag)
    inv[mag > 0] = 1.0 / mag[mag > 0]
    return inv


def perp_gradient_inverse_sqrt_laplacian(theta):
    """Velocity u = grad^perp (-Delta)^{-1/2} theta with grad^perp = (-d_y, d_x)."""
    if not isinstance(theta, GridFunction2D):
        raise ConfigurationError("expected a GridFunction2D")
    _check_mean_zero(theta, "perp_gradient_inverse_sqrt_laplacian")
    kx, ky = _odd_mesh(theta.grid)
    psi_hat = _inv_abs_k(theta.grid) * np.fft.fft2(theta.values)
    u1 = _ifft_real(theta, -1j * ky * psi_hat, "velocity")
    u2 = _ifft_real(theta, 1j * kx * psi_hat, "velocity")
    return u1, u2


def theta_from_velocity(u1, u2):
    """Inverse of :func:`perp_gradient_inverse_sqrt_laplacian` on its range.

    theta = -curl (-Delta)^{-1/2} u with curl u = d_x u2 - d_y u1.  The sign
    follows from curl grad^perp = Delta for grad^perp = (-d_y, d_x).
    """
    kx, ky = _odd_mesh(u1.grid)
    inv = _inv_abs_k(u1.grid)
    spec = -inv * (1j * kx * np.fft.fft2(u2.values) - 1j * ky * np.fft.fft2(u1.values))
    return _ifft_real(u1, spec, "theta_from_velocity")


def divergence(u1, u2):
    kx, ky = _odd_mesh(u1.grid)
    spec = 1j * kx * np.fft.fft2(u1.values) + 1j * ky * np.fft.fft2(u2.values)
    return _ifft_real(u1, spec, "divergence")


def symplectic_gradient_grid(h):
    """(d_y h, -d_x h) for a Hamiltonian sampled on a 2D grid."""
    hx = derivative(h, axis=0)
    hy = derivative(h, axis=1)
    return hy, hx.with_values(-hx.values)
