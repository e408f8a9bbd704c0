"""Partition function chi, the asymptotic kernel g, and the exponential scans.

The scans evaluate, for a nondecreasing sequence ``y`` and weights ``w``,

    L_i = int_{xi_0}^{xi_i} exp(-(y_i - y(eta))) w(eta) d eta
    R_i = int_{xi_i}^{xi_end} exp(-(y(eta) - y_i)) w(eta) d eta

with trapezoid quadrature in two sequential O(N) passes. Only factors
``exp(-(y_i - y_{i-1})) <= 1`` are ever formed.
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def chi_eval(x):
    """Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2 in between.

    Returns ``(chi, chi', chi'')``.
    """
    x = np.asarray(x, dtype=float)
    s = np.clip(x, 0.0, 1.0)
    chi = s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
    inside = (x > 0.0) & (x < 1.0)
    d1 = np.where(inside, 30.0 * s**2 * (1.0 - s) ** 2, 0.0)
    d2 = np.where(inside, 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s), 0.0)
    return chi, d1, d2


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _g_source(z):
    chi, d1, d2 = chi_eval(z)
    return 2.0 * d1**2 + 2.0 * chi * d2


def g_eval(x):
    """``g = chi**2 + 1/2 int exp(-|x-z|) (2 chi'^2 + 2 chi chi'')(z) dz`` and g'.

    The source vanishes outside [0, 1]; the integral is split at ``z = x`` and
    each smooth piece is integrated with 16-point Gauss-Legendre.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = np.clip(x, 0.0, 1.0)
    # left piece z in [0, a]: exp(-(x - z)); right piece z in [a, 1]: exp(-(z - x))
    zl = 0.5 * a[:, None] * (_GL_NODES + 1.0)
    wl = 0.5 * a[:, None] * _GL_WEIGHTS
    zr = a[:, None] + 0.5 * (1.0 - a[:, None]) * (_GL_NODES + 1.0)
    wr = 0.5 * (1.0 - a[:, None]) * _GL_WEIGHTS
    left = np.sum(wl * np.exp(-(x[:, None] - zl)) * _g_source(zl), axis=1)
    right = np.sum(wr * np.exp(-(zr - x[:, None])) * _g_source(zr), axis=1)
    chi, d1, _ = chi_eval(x)
    g = chi**2 + 0.5 * (left + right)
    dg = 2.0 * chi * d1 + 0.5 * (right - left)
    return g, dg


@njit(cache=True)
def exp_scans(y, w, dxi):
    n = y.shape[0]
    left = np.empty(n)
    right = np.empty(n)
    half = 0.5 * dxi
    left[0] = 0.0
    for i in range(1, n):
        e = math.exp(-(y[i] - y[i - 1]))
        left[i] = e * (left[i - 1] + half * w[i - 1]) + half * w[i]
    right[n - 1] = 0.0
    for i in range(n - 2, -1, -1):
        e = math.exp(-(y[i + 1] - y[i]))
        right[i] = e * (right[i + 1] + half * w[i + 1]) + half * w[i]
    return left, right
