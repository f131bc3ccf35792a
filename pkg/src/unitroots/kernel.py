"""Exponential moments and the limit covariance kernel.

The limiting Gaussian process ``g`` has covariance

    E g^(i)(x) g^(j)(y) = I_{i+j}(x + y),    I_k(s) = int_0^1 t^k e^{st} dt,

so everything in this module reduces to evaluating ``I_k`` accurately for
small ``k`` and a wide range of ``s``.
"""
from __future__ import annotations

import math

import numpy as np

#: Highest moment order accepted by :func:`exp_moment`.
MAX_ORDER = 8

#: Highest derivative order accepted by :func:`cov`.
MAX_DERIVATIVE = 2

#: Below this |s| the Taylor series is used.
S_SMALL = 0.5

_SERIES_TERMS = 30
_MILLER_EXTRA = 60


def _series(k, s):
    # sum_m s^m / (m! (k + m + 1)); |s| < S_SMALL so 30 terms are far past 1e-17
    term = np.ones_like(s)
    total = term / (k + 1)
    for m in range(1, _SERIES_TERMS):
        term = term * s / m
        total = total + term / (k + m + 1)
    return total


def _upward(k, s):
    # stable when |s| >= k: each step multiplies the error by at most j/|s|
    es = np.exp(s)
    val = np.expm1(s) / s
    for j in range(1, k + 1):
        val = (es - j * val) / s
    return val


def _downward(k, s):
    # Miller's algorithm: seed I_K = 0 far above k and recur down; the seed
    # error is damped by prod_{j>k} |s|/j, which is < 1e-20 for |s| < k <= 8.
    es = np.exp(s)
    val = np.zeros_like(s)
    for j in range(k + _MILLER_EXTRA, k, -1):
        val = (es - s * val) / j
    return val


def exp_moment(k, s):
    """Return ``I_k(s) = int_0^1 t^k exp(s t) dt``.

    Parameters
    ----------
    k : int
        Moment order, ``0 <= k <= MAX_ORDER``.
    s : float or array_like
        Exponential rate. Arrays are evaluated elementwise.

    Returns
    -------
    float or ndarray
        Relative accuracy is about 1e-15 across ``|s| <= 700``.

    Notes
    -----
    Three regimes are used. For ``|s| < 1/2`` the Taylor series in ``s``;
    for ``|s| >= max(k, 1/2)`` the upward recurrence
    ``s I_k = e^s - k I_{k-1}`` starting from ``I_0 = expm1(s)/s``;
    otherwise the same recurrence run downward from a high order, where it
    is contracting.
    """
    k = int(k)
    if k < 0 or k > MAX_ORDER:
        raise ValueError(f"moment order must be in [0, {MAX_ORDER}], got {k}")
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("exp_moment requires finite s")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    mag = np.abs(flat)

    small = mag < S_SMALL
    up = ~small & (mag >= k)
    down = ~small & ~up
    if small.any():
        out[small] = _series(k, flat[small])
    if up.any():
        out[up] = _upward(k, flat[up])
    if down.any():
        out[down] = _downward(k, flat[down])

    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def cov(i, j, x, y):
    """Limit covariance ``E g^(i)(x) g^(j)(y) = I_{i+j}(x + y)``."""
    for order in (i, j):
        if order < 0 or order > MAX_DERIVATIVE:
            raise ValueError(f"derivative order must be in [0, {MAX_DERIVATIVE}], got {order}")
    return exp_moment(i + j, np.add(x, y))


def log_exp_moment0(s):
    """``log I_0(s)``, finite for every finite ``s`` (no overflow at large ``s``)."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    mid = np.abs(s) <= 1.0
    pos = s > 1.0
    neg = s < -1.0
    out[mid] = np.log(exp_moment(0, s[mid]))
    out[pos] = s[pos] + np.log(-np.expm1(-s[pos])) - np.log(s[pos])
    out[neg] = np.log(-np.expm1(s[neg])) - np.log(-s[neg])
    return out if out.ndim else float(out)


def correlation(x, y):
    """Correlation of ``g(x)`` and ``g(y)``; lies in (0, 1], equal to 1 iff x == y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    log_r = log_exp_moment0(x + y) - 0.5 * (log_exp_moment0(2.0 * x) + log_exp_moment0(2.0 * y))
    r = np.minimum(np.exp(log_r), 1.0)
    return r if r.ndim else float(r)


def tilted_variance(s):
    """Variance of ``t`` under the density proportional to ``e^{st}`` on [0, 1].

    Equals ``I_2/I_0 - (I_1/I_0)^2``; this is the conditional variance of
    ``g'(x)`` given ``g(x)`` divided by ``Var g(x)``, with ``s = 2x``.
    """
    i0 = exp_moment(0, s)
    m1 = exp_moment(1, s) / i0
    m2 = exp_moment(2, s) / i0
    return m2 - m1 * m1


def log_mgf_curvature(s):
    """Closed form ``d^2/ds^2 log I_0(s) = 1/s^2 - 1/(4 sinh^2(s/2))``.

    Algebraically identical to :func:`tilted_variance`; it cancels badly for
    small ``|s|`` so it serves as an independent check away from 0.
    """
    s = float(s)
    if s == 0.0:
        return 1.0 / 12.0
    return 1.0 / (s * s) - 1.0 / (4.0 * math.sinh(s / 2.0) ** 2)
