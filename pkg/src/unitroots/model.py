"""Random polynomials ``f_n(z) = sum_k eps_k z^k`` and their rescalings.

Near ``z = 1`` the polynomial is viewed through ``g_n(x) = n^{-1/2} f_n(1 + x/n)``
and near ``z = -1`` through ``h_n(x) = n^{-1/2} f_n(-1 - x/n)``; ``side = +1``
selects ``g_n`` and ``side = -1`` selects ``h_n``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Philox key word reserved for coefficient streams; other consumers pick
# their own substream number so streams never overlap.
COEFFICIENT_STREAM = 0


class CoefficientLaw(str, enum.Enum):
    """Mean-zero, unit-variance coefficient distributions."""

    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value: "str | CoefficientLaw") -> "CoefficientLaw":
        if isinstance(value, cls):
            return value
        aliases = {"standard_gaussian": "gaussian", "normal": "gaussian",
                   "uniform_unit_variance": "uniform"}
        return cls(aliases.get(value, value))


def stream(seed: int, trial: int, substream: int = COEFFICIENT_STREAM) -> np.random.Generator:
    """Counter-based generator for ``(seed, trial, substream)``.

    Philox is keyed by ``(seed, substream)`` and the trial index sits in the
    top counter word, so each trial owns a disjoint block of the keystream
    and can be regenerated in any order on any worker.
    """
    if seed < 0 or trial < 0 or substream < 0:
        raise ValueError("seed, trial and substream must be non-negative")
    bitgen = np.random.Philox(key=np.array([seed, substream], dtype=np.uint64),
                              counter=np.array([0, 0, 0, trial], dtype=np.uint64))
    return np.random.Generator(bitgen)


def draw_coefficients(rng: np.random.Generator, size: int, law: CoefficientLaw) -> np.ndarray:
    law = CoefficientLaw.parse(law)
    if law is CoefficientLaw.RADEMACHER:
        words = rng.bit_generator.random_raw((size + 63) // 64)
        bits = np.unpackbits(np.asarray(words, dtype="<u8").view(np.uint8))[:size]
        return 2 * bits.astype(np.int64) - 1
    if law is CoefficientLaw.GAUSSIAN:
        return rng.standard_normal(size)
    root3 = math.sqrt(3.0)
    return rng.uniform(-root3, root3, size)


@dataclass(frozen=True)
class PolynomialSample:
    """Coefficients ``eps_0..eps_n`` with the stream identity that produced them."""

    coefficients: np.ndarray
    law: CoefficientLaw
    seed: int
    trial: int

    def __post_init__(self):
        c = self.coefficients
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two coefficients (degree >= 1)")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")

    @property
    def n(self) -> int:
        return self.coefficients.size - 1


def sample_polynomial(n: int, law: "str | CoefficientLaw", seed: int, trial: int = 0) -> PolynomialSample:
    if n < 1:
        raise ValueError("degree must be at least 1")
    law = CoefficientLaw.parse(law)
    coeffs = draw_coefficients(stream(seed, trial), n + 1, law)
    return PolynomialSample(coeffs, law, seed, trial)


def sample_coefficient_matrix(n: int, law: "str | CoefficientLaw", seed: int,
                              trials: Iterable[int]) -> np.ndarray:
    """Rows are the coefficient vectors of :func:`sample_polynomial` for ``trials``.

    Produces exactly the same numbers as one :func:`stream` per trial; the
    generator is re-keyed in place, which is several times cheaper than
    building a fresh one.
    """
    law = CoefficientLaw.parse(law)
    trials = list(trials)
    dtype = np.int64 if law is CoefficientLaw.RADEMACHER else float
    out = np.empty((len(trials), n + 1), dtype=dtype)
    if not trials:
        return out
    rng = stream(seed, trials[0])
    bitgen = rng.bit_generator
    state = bitgen.state
    for row, trial in enumerate(trials):
        if trial < 0:
            raise ValueError("trial indices must be non-negative")
        state["state"]["counter"][:] = (0, 0, 0, trial)
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        bitgen.state = state
        out[row] = draw_coefficients(rng, n + 1, law)
    return out


def falling_factorial(r, j: int):
    """``(r)_j = r (r-1) ... (r-j+1)`` elementwise, with ``(r)_0 = 1``."""
    r = np.asarray(r, dtype=float)
    out = np.ones_like(r)
    for i in range(j):
        out = out * (r - i)
    return out


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLITTER = 134217729.0  # 2^27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def compensated_horner(coeffs, s):
    """Evaluate ``sum_k coeffs[..., k] s^k`` with error-free transformations.

    The result is as accurate as if Horner's rule ran in twice the working
    precision and then rounded. With 1-D ``coeffs`` any shape of ``s`` is
    accepted; 2-D ``coeffs`` holds one polynomial per row, evaluated at the
    matching entry of ``s``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    s = np.asarray(s, dtype=float)
    if coeffs.ndim == 2:
        if coeffs.shape[0] != s.size:
            raise ValueError("need one evaluation point per coefficient row")
        s = s.reshape(coeffs.shape[0])
    if coeffs.shape[-1] == 0:
        # derivative of order above the degree
        return np.zeros(s.shape)
    # cols[k] is a scalar for one polynomial, a column for a batch
    cols = coeffs.T
    acc = np.broadcast_to(cols[-1], s.shape).astype(float)
    err = np.zeros(s.shape)
    for k in range(coeffs.shape[-1] - 2, -1, -1):
        p, pi = _two_prod(acc, s)
        acc, sigma = _two_sum(p, cols[k])
        err = err * s + (pi + sigma)
    return acc + err


class EvaluationOverflow(ArithmeticError):
    """A rescaled evaluation came out non-finite."""


def _check_side(side: int) -> int:
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    return side


def derivative_coefficients(coefficients, order: int) -> np.ndarray:
    """Coefficients of ``f^{(order)}``: ``(r)_order eps_r`` for ``r >= order``."""
    c = np.asarray(coefficients, dtype=float)
    r = np.arange(order, c.shape[-1])
    return falling_factorial(r, order) * c[..., order:]


def eval_scaled(p: PolynomialSample, x, side: int = 1, order: int = 0):
    """``g_n^{(order)}(x)`` for ``side = +1``, ``h_n^{(order)}(x)`` for ``side = -1``.

    Both are ``n^{-1/2-order} side^order f_n^{(order)}(side (1 + x/n))``; the
    ``side^order`` factor is the chain rule through ``z = -(1 + x/n)``.
    """
    side = _check_side(side)
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    n = p.n
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > n):
        raise ValueError("|x| must not exceed n")
    s = side * (1.0 + x / n)
    coeffs = derivative_coefficients(p.coefficients, order)
    val = compensated_horner(coeffs, s) * (side ** order) * n ** (-0.5 - order)
    if not np.all(np.isfinite(val)):
        raise EvaluationOverflow(f"non-finite g_n^({order}) for n={n}")
    return val if val.ndim else float(val)


def scale_factor(n: int, side: int, order: int) -> float:
    """Constant ``n^{-1/2-order} side^order`` in front of ``f_n^{(order)}``."""
    return float(side ** order) * n ** (-0.5 - order)


def scaled_basis(n: int, xs, side: int = 1, order: int = 0, *, normalized: bool = True) -> np.ndarray:
    """Matrix ``B`` with ``B @ eps`` equal to ``eval_scaled(eps, xs, side, order)``.

    Row ``i`` holds ``n^{-1/2-order} side^order (r)_order s_i^{r-order}`` with
    ``s_i = side (1 + x_i/n)``. Used to evaluate whole ensembles with one
    matrix product. With ``normalized=False`` the constant
    :func:`scale_factor` is left out, which keeps integer coefficients exact
    at ``x = 0``.
    """
    side = _check_side(side)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    r = np.arange(n + 1)
    base = 1.0 + xs / n
    expo = np.maximum(r - order, 0).astype(float)
    powers = np.power(base[:, None], expo[None, :])
    if side == -1:
        powers = powers * np.where((r - order) % 2 == 0, 1.0, -1.0)[None, :]
    weights = falling_factorial(r, order)
    if normalized:
        weights = weights * scale_factor(n, side, order)
    return powers * weights[None, :]


@dataclass
class CovarianceEstimate:
    """Sample covariance between two feature blocks with jackknife standard errors."""

    cov: np.ndarray
    se: np.ndarray
    labels_a: list = field(default_factory=list)
    labels_b: list = field(default_factory=list)
    trials: int = 0


def covariance_with_se(fa: np.ndarray, fb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased cross-covariance of columns of ``fa`` and ``fb`` plus jackknife SE.

    The leave-one-out estimates have a closed form,
    ``C_(i) = (S - T/(T-1) dx_i dy_i) / (T-2)``, so the jackknife needs no
    resampling loop.
    """
    t = fa.shape[0]
    if t < 3:
        raise ValueError("need at least three trials for a jackknife SE")
    dx = fa - fa.mean(axis=0)
    dy = fb - fb.mean(axis=0)
    s = dx.T @ dy
    c = s / (t - 1)
    pbar = s / t
    ss = (dx * dx).T @ (dy * dy) - t * pbar * pbar
    ss = np.maximum(ss, 0.0)
    se = t / ((t - 1) * (t - 2)) * np.sqrt((t - 1) / t * ss)
    return c, se


def empirical_cov(ensemble, xs: Sequence[float], orders: Sequence[int],
                  sides: tuple[int, int] = (1, 1), n: int | None = None) -> CovarianceEstimate:
    """Covariances of rescaled evaluations across an ensemble.

    ``ensemble`` is a list of :class:`PolynomialSample` or a coefficient matrix
    (one row per trial). Features are ordered ``(x, order)`` with ``x`` outer;
    entry ``[a, b]`` pairs feature ``a`` on ``sides[0]`` with feature ``b`` on
    ``sides[1]``.
    """
    if isinstance(ensemble, np.ndarray):
        coeffs = ensemble
    else:
        ensemble = list(ensemble)
        if not ensemble:
            raise ValueError("empty ensemble")
        if len({p.n for p in ensemble}) != 1:
            raise ValueError("ensemble mixes degrees")
        coeffs = np.stack([p.coefficients for p in ensemble])
    if coeffs.shape[0] == 0:
        raise ValueError("empty ensemble")
    n = coeffs.shape[1] - 1 if n is None else n
    labels = [(x, o) for x in xs for o in orders]

    def features(side):
        cols = [scaled_basis(n, [x], side, o)[0] for x, o in labels]
        return coeffs @ np.array(cols).T

    fa = features(sides[0])
    fb = fa if sides[1] == sides[0] else features(sides[1])
    c, se = covariance_with_se(fa, fb)
    return CovarianceEstimate(c, se, labels, labels, coeffs.shape[0])


def variance_at_zero_exact(n: int, order: int):
    """``E|g_n^{(order)}(0)|^2 = n^{-2 order - 1} sum_k (k)_order^2`` as a Fraction."""
    from fractions import Fraction

    total = 0
    for k in range(n + 1):
        ff = 1
        for i in range(order):
            ff *= k - i
        total += ff * ff
    return Fraction(total, n ** (2 * order + 1))
