"""Compiled scalar kernels for the bump profiles (hot loops of the flow solvers)."""
import math

import numpy as np
from numba import njit

_CUT = 2e-3


@njit(cache=True)
def _sigma(t, k):
    if t <= _CUT:
        return 0.0
    inv = 1.0 / t
    e = math.exp(-inv)
    if k == 0:
        return e
    if k == 1:
        return e * inv * inv
    if k == 2:
        return e * (inv**4 - 2.0 * inv**3)
    return e * (inv**6 - 6.0 * inv**5 + 6.0 * inv**4)


@njit(cache=True)
def smoothstep_scalar(t, order):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0 if order == 0 else 0.0
    a0 = _sigma(t, 0)
    b0 = _sigma(1.0 - t, 0)
    d0 = a0 + b0
    s0 = a0 / d0
    if order == 0:
        return s0
    a1 = _sigma(t, 1)
    d1 = a1 - _sigma(1.0 - t, 1)
    s1 = (a1 - s0 * d1) / d0
    if order == 1:
        return s1
    a2 = _sigma(t, 2)
    d2 = a2 + _sigma(1.0 - t, 2)
    s2 = (a2 - 2.0 * s1 * d1 - s0 * d2) / d0
    if order == 2:
        return s2
    a3 = _sigma(t, 3)
    d3 = a3 - _sigma(1.0 - t, 3)
    return (a3 - 3.0 * s2 * d1 - 3.0 * s1 * d2 - s0 * d3) / d0


@njit(cache=True)
def profile_scalar(x, center, scale, order):
    """k-th derivative of S(scale * (center - |x|))."""
    ax = abs(x)
    arg = scale * (center - ax)
    if arg >= 1.0:
        return 1.0 if order == 0 else 0.0
    if arg <= 0.0:
        return 0.0
    val = smoothstep_scalar(arg, order)
    if order == 0:
        return val
    sgn = 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)
    return val * (-scale * sgn) ** order


@njit(cache=True)
def xi_scalar(n, x, order):
    ax = abs(x)
    total = 0.0
    scale = 1.0
    for _ in range(n):
        w = scale * ax
        if w >= 1.0:
            # every later term has an even larger argument
            break
        if w <= 0.5:
            if order == 0:
                total += 1.0
        else:
            total += scale**order * profile_scalar(scale * x, 1.0, 2.0, order)
        scale *= 2.0
    return total / n


@njit(cache=True)
def profile_array(x, center, scale, order):
    out = np.empty(x.size)
    flat = x.ravel()
    for i in range(flat.size):
        out[i] = profile_scalar(flat[i], center, scale, order)
    return out.reshape(x.shape)


@njit(cache=True)
def xi_array(n, x, order):
    out = np.empty(x.size)
    flat = x.ravel()
    for i in range(flat.size):
        out[i] = xi_scalar(n, flat[i], order)
    return out.reshape(x.shape)


@njit(cache=True)
def fn_velocity_array(n, t, x, y, with_jacobian):
    """Velocity of the localised shear flow and optionally its Jacobian.

    Returns (u1, u2, a, b, c) with Jacobian [[a, b], [c, -a]].
    """
    m = x.size
    u1 = np.empty(m)
    u2 = np.empty(m)
    ja = np.zeros(m)
    jb = np.zeros(m)
    jc = np.zeros(m)
    for i in range(m):
        xi = x[i]
        p0 = profile_scalar(xi, 2.0, 1.0, 0)
        p1 = profile_scalar(xi, 2.0, 1.0, 1)
        p2 = profile_scalar(xi, 2.0, 1.0, 2)
        F0 = -xi * p0
        F1 = -(xi * p1 + p0)
        F2 = -(xi * p2 + 2.0 * p1)
        g = -t * F1
        gx = -t * F2
        z = y[i] - g
        x0 = xi_scalar(n, z, 0)
        x1 = xi_scalar(n, z, 1)
        u1[i] = F0 * x1
        u2[i] = -F1 * x0 + F0 * gx * x1
        if with_jacobian:
            p3 = profile_scalar(xi, 2.0, 1.0, 3)
            F3 = -(xi * p3 + 3.0 * p2)
            gxx = -t * F3
            x2 = xi_scalar(n, z, 2)
            ja[i] = F1 * x1 - F0 * gx * x2
            jb[i] = F0 * x2
            jc[i] = -F2 * x0 + (2.0 * F1 * gx + F0 * gxx) * x1 - F0 * gx * gx * x2
    return u1, u2, ja, jb, jc
