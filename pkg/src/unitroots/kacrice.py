"""Kac-Rice densities for the zero set of the limit process ``g``.

``intensity`` is the one-point density rho_1 with ``E nu(I) = int_I rho_1`` and
``pair_intensity`` the two-point density rho_2 with
``E[nu(I)(nu(I) - 1)] = int_{I^2} rho_2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .kernel import cov, exp_moment

#: Pairs closer than this are on the diagonal, where rho_2 is extended by 0.
DIAGONAL_GAP = 1e-6

#: det Sigma below this means the conditioning is numerically meaningless.
DET_FLOOR = 1e-14

#: Separation below which :func:`condition_pair` uses the white-noise route.
NEAR_SEPARATION = 4.0

#: Largest |x| for which rho_2 is verified to ~1e-8 relative.
PAIR_REACH = 32.0

# |2x| beyond which rho_1 uses the closed form for the tilted variance
CLOSED_FORM_S = 4.0


class DiagonalProximity(ArithmeticError):
    """Raised when (g(x), g(y)) is numerically degenerate but x != y."""


@dataclass(frozen=True)
class ConditionedPair:
    """Law of ``(g'(x), g'(y))`` given ``g(x) = g(y) = 0``."""

    x: float
    y: float
    cond_cov: np.ndarray
    det_sigma: float

    @property
    def sigma1(self) -> float:
        return math.sqrt(max(self.cond_cov[0, 0], 0.0))

    @property
    def sigma2(self) -> float:
        return math.sqrt(max(self.cond_cov[1, 1], 0.0))

    @property
    def rho(self) -> float:
        s = self.sigma1 * self.sigma2
        if s == 0.0:
            return 0.0
        return min(max(float(self.cond_cov[0, 1]) / s, -1.0), 1.0)


def _legendre01(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


# 48 nodes integrate e^{ct} * poly to rounding for |c| <= 24; 128 up to |c| = 128
_RULES = ((12.0, _legendre01(48)), (64.0, _legendre01(128)))

# Taylor coefficients of (e^z - 1 - z)/z^2 and (z e^z - e^z + 1)/z^2
_E2_COEF = np.array([1.0 / math.factorial(m + 2) for m in range(18)])
_F2_COEF = np.array([(m + 1) / math.factorial(m + 2) for m in range(18)])


def _expm1_over(z):
    # (e^z - 1)/z, = 1 at 0
    out = np.ones_like(z)
    nz = z != 0.0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _second_remainders(z):
    """``(e^z - 1 - z)/z^2`` and ``(z e^z - e^z + 1)/z^2``, stable at 0."""
    small = np.abs(z) < 0.5
    if small.all():
        return (np.polynomial.polynomial.polyval(z, _E2_COEF),
                np.polynomial.polynomial.polyval(z, _F2_COEF))
    with np.errstate(divide="ignore", invalid="ignore"):
        e2 = (np.expm1(z) - z) / z**2
        f2 = (z * np.exp(z) - np.expm1(z)) / z**2
    if small.any():
        zs = z[small]
        e2[small] = np.polynomial.polynomial.polyval(zs, _E2_COEF)
        f2[small] = np.polynomial.polynomial.polyval(zs, _F2_COEF)
    return e2, f2


def _condition_near(x: float, y: float) -> ConditionedPair:
    # Uses g(x) = int_0^1 e^{xt} dW(t): each linear functional of g is a
    # function of t and covariances are L2 inner products on [0, 1]. In the
    # basis g(x), (g(y) - g(x))/h, g'(x) - that, g'(y) - that, nothing
    # cancels at O(h^2), so this stays accurate right down to the diagonal.
    h = float(y) - float(x)
    reach = max(abs(x), abs(y))
    if reach > _RULES[-1][0]:
        raise ValueError(f"supports |x|, |y| <= {_RULES[-1][0]}")
    t, w = next(rule for bound, rule in _RULES if reach <= bound)
    ex = np.exp(float(x) * t)
    z = h * t
    e2, f2 = _second_remainders(z)
    basis = np.stack([
        ex,                          # g(x)
        ex * t * _expm1_over(z),     # (g(y) - g(x)) / h
        -ex * h * t**2 * e2,         # g'(x) - divided difference
        ex * h * t**2 * f2,          # g'(y) - divided difference
    ])
    gram = (basis * w) @ basis.T
    vals = gram[:2, :2]
    det_vals = vals[0, 0] * vals[1, 1] - vals[0, 1] ** 2
    cross = gram[:2, 2:]
    inv = np.array([[vals[1, 1], -vals[0, 1]], [-vals[0, 1], vals[0, 0]]]) / det_vals
    cond = gram[2:, 2:] - cross.T @ inv @ cross
    return ConditionedPair(float(x), float(y), 0.5 * (cond + cond.T), float(h * h * det_vals))


def condition_pair_direct(x: float, y: float) -> ConditionedPair:
    """Textbook 4x4 Gaussian conditioning straight from :func:`cov`.

    Loses about ``2 log10(1/|x - y|)`` digits near the diagonal; accurate for
    well-separated pairs.
    """
    pts = (x, y)
    sigma = np.array([[cov(0, 0, a, b) for b in pts] for a in pts])
    cross = np.array([[cov(0, 1, a, b) for b in pts] for a in pts])  # Cov(g(a), g'(b))
    deriv = np.array([[cov(1, 1, a, b) for b in pts] for a in pts])
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] ** 2
    cond = deriv - cross.T @ np.linalg.solve(sigma, cross)
    return ConditionedPair(float(x), float(y), 0.5 * (cond + cond.T), float(det))


def condition_pair(x: float, y: float) -> ConditionedPair:
    """Condition ``(g'(x), g'(y))`` on ``g(x) = g(y) = 0``.

    Pairs within ``NEAR_SEPARATION`` of each other go through a
    white-noise representation that is free of near-diagonal cancellation;
    wider pairs use plain conditioning on the 4x4 Gram matrix.

    Raises :class:`DiagonalProximity` when ``det Sigma < DET_FLOOR``.
    """
    if x == y:
        raise DiagonalProximity("x == y")
    near = abs(x - y) <= NEAR_SEPARATION
    cp = _condition_near(x, y) if near else condition_pair_direct(x, y)
    if cp.det_sigma < DET_FLOOR:
        raise DiagonalProximity(f"det Sigma = {cp.det_sigma:.3e} at x={x}, y={y}")
    return cp


def abs_product_mean(sigma1: float, sigma2: float, rho: float) -> float:
    """``E|XY|`` for a centred bivariate normal with the given scales and correlation."""
    rho = min(max(rho, -1.0), 1.0)
    return (2.0 / math.pi) * sigma1 * sigma2 * (math.sqrt(1.0 - rho * rho) + rho * math.asin(rho))


def intensity(x):
    """First Kac-Rice density ``rho_1(x) = sqrt(v/K) / pi``.

    ``K = I_0(2x)`` is ``Var g(x)`` and ``v = I_2(2x) - I_1(2x)^2 / I_0(2x)``
    the conditional variance of ``g'(x)`` given ``g(x)``.
    """
    s = np.asarray(np.multiply(2.0, x), dtype=float)
    ratio = np.empty_like(s)
    near = np.abs(s) < CLOSED_FORM_S
    if near.any():
        k00 = exp_moment(0, s[near])
        k01 = exp_moment(1, s[near])
        k11 = exp_moment(2, s[near])
        ratio[near] = (k11 - k01 * k01 / k00) / k00
    far = s[~near]
    # v / K = 1/s^2 - 1/(4 sinh^2(s/2)); the moment form cancels for large |s|
    with np.errstate(over="ignore"):
        ratio[~near] = 1.0 / (far * far) - 0.25 / np.sinh(0.5 * far) ** 2
    out = np.sqrt(ratio) / math.pi
    return out if out.ndim else float(out)


def intensity_det_route(x: float) -> float:
    """rho_1 via ``det Cov(g, g') / K^2`` instead of the Schur complement."""
    s = 2.0 * x
    k00, k01, k11 = (exp_moment(k, s) for k in range(3))
    return math.sqrt((k00 * k11 - k01 * k01) / (k00 * k00)) / math.pi


def pair_intensity(x: float, y: float) -> float:
    """Second Kac-Rice density rho_2(x, y).

    Zero on ``|x - y| < DIAGONAL_GAP``. May raise :class:`DiagonalProximity`
    for very close pairs where ``g`` has tiny variance.

    ``e^{-x} g(x)`` has the law of ``g(-x)`` and the same zeros as ``g``, so
    the zero process is mirror symmetric; the pair is reflected into
    ``x + y <= 0``, where the conditioning is well scaled.
    """
    if max(abs(x), abs(y)) > PAIR_REACH:
        raise ValueError(f"pair_intensity supports |x|, |y| <= {PAIR_REACH}")
    if abs(x - y) < DIAGONAL_GAP:
        return 0.0
    if x + y > 0:
        x, y = -x, -y
    cp = condition_pair(x, y)
    num = abs_product_mean(cp.sigma1, cp.sigma2, cp.rho)
    return num / (2.0 * math.pi * math.sqrt(cp.det_sigma))


def _pair_or_zero(x: float, y: float) -> float:
    # near-diagonal: rho_2 = O(|x - y|), so 0 is the bound's own limit
    try:
        return pair_intensity(x, y)
    except DiagonalProximity:
        return 0.0


def expected_count(a: float, b: float | None = None, *, rtol: float = 1e-9) -> float:
    """``E nu`` over ``[-a, a]`` (one argument) or ``[a, b]`` (two)."""
    lo, hi = (-a, a) if b is None else (a, b)
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(intensity, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
    return float(val)


def second_factorial_moment(a: float, b: float, *, rtol: float = 1e-6,
                            return_error: bool = False):
    """``E[nu(I)(nu(I) - 1)]`` for ``I = [a, b]``.

    Integrates rho_2 over the triangle ``x < y`` and doubles; rho_2 is
    symmetric and has a kink only on the diagonal, which becomes an edge.
    """
    if b <= a:
        return (0.0, 0.0) if return_error else 0.0
    val, err = integrate.dblquad(
        lambda yy, xx: _pair_or_zero(xx, yy), a, b, lambda xx: xx, lambda xx: b,
        epsabs=0.0, epsrel=rtol)
    if return_error:
        return 2.0 * val, 2.0 * err
    return 2.0 * val


@dataclass(frozen=True)
class PoissonNull:
    """Poisson count law matched to ``E nu(I)``."""

    mean: float

    @property
    def p0(self) -> float:
        return math.exp(-self.mean)

    @property
    def p1(self) -> float:
        return self.mean * math.exp(-self.mean)

    @property
    def p_more_than_one(self) -> float:
        # 1 - e^{-m}(1 + m), written to survive m -> 0
        m = self.mean
        return -math.expm1(-m) - m * math.exp(-m)


def poisson_null(a: float, b: float) -> PoissonNull:
    return PoissonNull(expected_count(a, b))
