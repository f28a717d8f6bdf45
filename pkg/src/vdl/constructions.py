"""Closed-form functions used by the displacing-flow constructions.

Everything here is a pure, vectorised numpy function of its arguments.
Derivatives are analytic; ``order`` selects the derivative (0..3).

Building blocks
---------------
* ``smoothstep``  S(t) = sigma(t) / (sigma(t) + sigma(1 - t)), sigma(t) = exp(-1/t)
* ``base_bump``   f(x) = S(2(1 - |x|)): 1 on [-1/2, 1/2], 0 outside (-1, 1)
* ``psi``         S(2 - |x|): 1 on [-1, 1], 0 outside (-2, 2)
* ``xi_n``        (1/n) sum_{j<n} f(2^j x)

Planar Hamiltonians
-------------------
* ``hamiltonian_f``  F(x) = -x psi(x)
* ``g_profile``      g(t, x) = t (psi + x psi') = -t F'(x)
* ``f_n_2d``         F(x) xi_n(y - g(t, x))
* ``u_n_2d``         symplectic gradient (d_y, -d_x) of f_n_2d
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError

# exp(-1/t) and all its derivatives are below 1e-200 here
_SIGMA_CUTOFF = 2e-3


def _sigma_derivs(t):
    """sigma(t) = exp(-1/t) for t > 0 (else 0) and its first three derivatives."""
    t = np.asarray(t, dtype=float)
    out = [np.zeros_like(t) for _ in range(4)]
    m = t > _SIGMA_CUTOFF
    if np.any(m):
        tm = t[m]
        inv = 1.0 / tm
        e = np.exp(-inv)
        out[0][m] = e
        out[1][m] = e * inv**2
        out[2][m] = e * (inv**4 - 2 * inv**3)
        out[3][m] = e * (inv**6 - 6 * inv**5 + 6 * inv**4)
    return out


def smoothstep(t, order=0):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order}")
    t = np.asarray(t, dtype=float)
    a = _sigma_derivs(t)
    b = _sigma_derivs(1.0 - t)
    # chain rule for sigma(1 - t): odd derivatives flip sign
    b = [b[0], -b[1], b[2], -b[3]]
    d = [a[k] + b[k] for k in range(4)]
    # S * D = a, differentiated repeatedly (Leibniz) and solved for S^(k)
    s0 = a[0] / d[0]
    if order == 0:
        return s0
    s1 = (a[1] - s0 * d[1]) / d[0]
    if order == 1:
        return s1
    s2 = (a[2] - 2 * s1 * d[1] - s0 * d[2]) / d[0]
    if order == 2:
        return s2
    return (a[3] - 3 * s2 * d[1] - 3 * s1 * d[2] - s0 * d[3]) / d[0]


def _even_profile(x, center, scale, order):
    # h(x) = S(scale * (center - |x|)); derivatives pick up (-scale * sign x)^k
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    out = _kernels.profile_array(np.ascontiguousarray(x), center, scale, order)
    return out if x.ndim else float(np.ravel(out)[0])


def base_bump(x, order=0):
    """Base mollifier: 1 on [-1/2, 1/2], supported in [-1, 1], values in [0, 1]."""
    return _even_profile(x, 1.0, 2.0, order)


def psi(x, order=0):
    """Cut-off profile: 1 on [-1, 1], supported in [-2, 2], values in [0, 1]."""
    return _even_profile(x, 2.0, 1.0, order)


def psi_prime(x):
    return psi(x, 1)


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"bump family index must be a positive integer, got {n!r}")
    return int(n)


def xi_n(n, x, order=0):
    """Averaged dyadic bump (1/n) * sum_{j=0}^{n-1} f(2^j x) and its derivatives.

    ``xi_n(n, x) == 1`` for ``|x| <= 2**-n`` and ``0`` for ``|x| >= 1``.
    """
    n = _check_n(n)
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    out = _kernels.xi_array(n, np.ascontiguousarray(x), order)
    return out if x.ndim else float(np.ravel(out)[0])


def u_n_1d(n, t, x):
    """Localised translation field xi_n(x - t)."""
    return xi_n(n, np.asarray(x, dtype=float) - t)


def u_n_1d_dx(n, t, x):
    return xi_n(n, np.asarray(x, dtype=float) - t, 1)


# --- planar Hamiltonians -------------------------------------------------


def hamiltonian_1d(x, order=0):
    """F(x) = -x psi(x) and its x-derivatives."""
    x = np.asarray(x, dtype=float)
    if order == 0:
        return -x * psi(x)
    # (x psi)^(k) = x psi^(k) + k psi^(k-1)
    return -(x * psi(x, order) + order * psi(x, order - 1))


def hamiltonian_f(x, y):
    """Static Hamiltonian f(x, y) = -x psi(x); independent of y."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return hamiltonian_1d(x)


def g_profile(t, x, order=0):
    """Height reached by (x, 0) under the unlocalised flow at time t.

    g(t, x) = t (psi(x) + x psi'(x)); ``order`` differentiates in x.
    """
    return -t * hamiltonian_1d(x, order + 1)


def f_n_2d(n, t, x, y):
    """Time-dependent Hamiltonian F(x) xi_n(y - g(t, x))."""
    x = np.asarray(x, dtype=float)
    return hamiltonian_1d(x) * xi_n(n, np.asarray(y, dtype=float) - g_profile(t, x))


def _fn_velocity(n, t, x, y, jacobian):
    n = _check_n(n)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    out = _kernels.fn_velocity_array(n, float(t), np.ascontiguousarray(x).ravel(),
                                     np.ascontiguousarray(y).ravel(), jacobian)
    return shape, out


def u_n_2d(n, t, x, y):
    """Velocity (d_y f_n, -d_x f_n) of the localised shear flow."""
    shape, (u1, u2, _, _, _) = _fn_velocity(n, t, x, y, False)
    return u1.reshape(shape), u2.reshape(shape)


def u_n_2d_jacobian(n, t, x, y):
    """Spatial Jacobian [[du1/dx, du1/dy], [du2/dx, du2/dy]] of ``u_n_2d``.

    Returned as an array of shape ``x.shape + (2, 2)``; its trace vanishes.
    """
    shape, (_, _, a, b, c) = _fn_velocity(n, t, x, y, True)
    jac = np.empty(a.shape + (2, 2))
    jac[:, 0, 0] = a
    jac[:, 0, 1] = b
    jac[:, 1, 0] = c
    jac[:, 1, 1] = -a
    return jac.reshape(shape + (2, 2))


def u_n_2d_with_jacobian(n, t, x, y):
    """``(u1, u2, jacobian)`` in one pass (used by the flow integrator)."""
    shape, (u1, u2, a, b, c) = _fn_velocity(n, t, x, y, True)
    jac = np.empty(a.shape + (2, 2))
    jac[:, 0, 0] = a
    jac[:, 0, 1] = b
    jac[:, 1, 0] = c
    jac[:, 1, 1] = -a
    return u1.reshape(shape), u2.reshape(shape), jac.reshape(shape + (2, 2))


def unlocalised_flow(t, x, y):
    """Flow of the static field (0, psi + x psi'): (x, y + g(t, x))."""
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float) + g_profile(t, x)


# --- symplectic gradients of closed-form Hamiltonians --------------------


@dataclass(frozen=True)
class ClosedFormHamiltonian:
    """Scalar field on the plane with optional analytic partial derivatives."""

    value: Callable
    dx: Callable | None = None
    dy: Callable | None = None
    fd_step: float = 1e-6

    def __call__(self, x, y):
        return self.value(x, y)

    def partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = self.fd_step
        hx = (self.dx(x, y) if self.dx is not None
              else (self.value(x + h, y) - self.value(x - h, y)) / (2 * h))
        hy = (self.dy(x, y) if self.dy is not None
              else (self.value(x, y + h) - self.value(x, y - h)) / (2 * h))
        return np.broadcast_arrays(np.asarray(hx, dtype=float), np.asarray(hy, dtype=float))


STATIC_HAMILTONIAN = ClosedFormHamiltonian(
    value=hamiltonian_f,
    dx=lambda x, y: np.broadcast_arrays(hamiltonian_1d(x, 1), np.asarray(y, float))[0],
    dy=lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape),
)


def symplectic_gradient(h):
    """Return the field (x, y) -> (d_y h, -d_x h).

    ``h`` is a :class:`ClosedFormHamiltonian` or a plain callable (central
    differences are used for missing derivatives). Grid data goes through
    :func:`vdl.spectral.symplectic_gradient_grid` instead.
    """
    if not isinstance(h, ClosedFormHamiltonian):
        h = ClosedFormHamiltonian(value=h)

    def field(x, y):
        hx, hy = h.partials(x, y)
        return hy, -hx

    return field


# --- localisation in a 2d-dimensional box ---------------------------------


def fn_support_radius(t_max=1.0):
    """Smallest R with supp f_n(t, ., .) inside [-R, R]^2 for all t in [0, t_max]."""
    xs = np.linspace(-2.0, 2.0, 40001)
    G = g_profile(1.0, xs)
    lo = min(0.0, t_max * G.min()) - 1.0
    hi = max(0.0, t_max * G.max()) + 1.0
    return max(2.0, -lo, hi)


def _check_epsilon(eps, r):
    if eps <= 0 or r <= 0:
        raise ConfigurationError(f"epsilon and r must be positive, got {eps}, {r}")
    limit = r / fn_support_radius()
    if eps >= limit:
        raise ConfigurationError(
            f"epsilon={eps} does not put the rescaled Hamiltonian inside (-r, r)^2; "
            f"need epsilon < {limit:.6g} for r={r}")


def localized_g_n(n, eps, r, d, t, x):
    """Box-localised Hamiltonian f_n(t, x1/eps, x2/eps) * prod_{i>=3} psi(x_i / r).

    ``x`` has trailing dimension 2d.
    """
    _check_epsilon(eps, r)
    x = np.asarray(x, dtype=float)
    if d < 1 or x.shape[-1] != 2 * d:
        raise ConfigurationError(f"points must have trailing dimension 2d = {2 * d}")
    val = f_n_2d(n, t, x[..., 0] / eps, x[..., 1] / eps)
    for i in range(2, 2 * d):
        val = val * psi(x[..., i] / r)
    return val


def localized_v_n(n, eps, r, d, t, x):
    """Symplectic gradient of ``localized_g_n`` for the form sum dx_{2i-1} ^ dx_{2i}."""
    _check_epsilon(eps, r)
    x = np.asarray(x, dtype=float)
    if d < 1 or x.shape[-1] != 2 * d:
        raise ConfigurationError(f"points must have trailing dimension 2d = {2 * d}")
    X, Y = x[..., 0] / eps, x[..., 1] / eps
    base = f_n_2d(n, t, X, Y)
    u1, u2 = u_n_2d(n, t, X, Y)
    # d_{x2} base = u1 / eps, d_{x1} base = -u2 / eps
    cut = [psi(x[..., i] / r) for i in range(2, 2 * d)]
    dcut = [psi(x[..., i] / r, 1) / r for i in range(2, 2 * d)]
    prod_all = np.ones_like(X)
    for c in cut:
        prod_all = prod_all * c
    grad = np.zeros(x.shape)
    grad[..., 0] = (-u2 / eps) * prod_all
    grad[..., 1] = (u1 / eps) * prod_all
    for i in range(2, 2 * d):
        others = np.ones_like(X)
        for k, c in enumerate(cut):
            if k != i - 2:
                others = others * c
        grad[..., i] = base * dcut[i - 2] * others
    v = np.empty_like(grad)
    v[..., 0::2] = grad[..., 1::2]
    v[..., 1::2] = -grad[..., 0::2]
    return v
