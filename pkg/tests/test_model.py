import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitroots.kernel import cov
from unitroots.model import (CoefficientLaw, PolynomialSample, compensated_horner, empirical_cov,
                             eval_scaled, sample_coefficient_matrix, sample_polynomial,
                             scaled_basis, stream, variance_at_zero_exact)


def poly(coeffs):
    return PolynomialSample(np.asarray(coeffs, dtype=float), CoefficientLaw.RADEMACHER, 0, 0)


def exact_scaled(coeffs, x, side, order, n):
    # rational evaluation of n^{-order} side^order f^{(order)}(side(1 + x/n)); sqrt(n) applied last
    z = side * (1 + Fraction(x) / n)
    total = Fraction(0)
    for r, c in enumerate(coeffs):
        if r < order:
            continue
        ff = math.prod(range(r - order + 1, r + 1))
        total += Fraction(c) * ff * z ** (r - order)
    return float(total * side ** order / Fraction(n) ** order) / math.sqrt(n)


def test_rademacher_support():
    p = sample_polynomial(3, "rademacher", seed=4)
    assert set(p.coefficients.tolist()) <= {-1, 1}
    assert p.n == 3


def test_gaussian_mean():
    p = sample_polynomial(10_000, "gaussian", seed=4)
    assert abs(p.coefficients.mean()) <= 5 / math.sqrt(10_000)


@pytest.mark.parametrize("law", list(CoefficientLaw))
def test_unit_variance_and_determinism(law):
    a = sample_polynomial(20_000, law, seed=9, trial=3).coefficients
    b = sample_polynomial(20_000, law, seed=9, trial=3).coefficients
    assert np.array_equal(a, b)
    assert a.var() == pytest.approx(1.0, abs=0.05)
    assert not np.array_equal(a, sample_polynomial(20_000, law, seed=9, trial=4).coefficients)


def test_law_aliases():
    assert CoefficientLaw.parse("standard_gaussian") is CoefficientLaw.GAUSSIAN
    assert CoefficientLaw.parse("uniform_unit_variance") is CoefficientLaw.UNIFORM
    with pytest.raises(ValueError):
        CoefficientLaw.parse("cauchy")


@pytest.mark.parametrize("law", list(CoefficientLaw))
def test_matrix_matches_single_streams(law):
    trials = [5, 0, 17, 4096, 3]
    mat = sample_coefficient_matrix(40, law, 2, trials)
    for row, t in zip(mat, trials):
        assert np.array_equal(row, sample_polynomial(40, law, 2, t).coefficients)


def test_streams_are_counter_addressed():
    a = stream(1, 7).standard_normal(5)
    b = stream(1, 7).standard_normal(5)
    c = stream(1, 7, substream=1).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        stream(-1, 0)


@pytest.mark.parametrize("eps,order,expected", [
    ((1, 1), 0, 2.0),
    ((1, -1, 1), 0, 1 / math.sqrt(2)),
    ((1, -1, 1), 1, 2 ** -1.5),
])
def test_eval_scaled_examples(eps, order, expected):
    assert eval_scaled(poly(eps), 0.0, 1, order) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**31), st.sampled_from([1, -1]), st.integers(0, 2),
       st.floats(-1, 1))
def test_eval_scaled_exact_rational(n, seed, side, order, u):
    eps = sample_polynomial(n, "rademacher", seed).coefficients
    x = u * n / 2
    got = eval_scaled(poly(eps), x, side, order)
    ref = exact_scaled(eps.tolist(), x, side, order, n)
    scale = exact_scaled([abs(e) for e in eps.tolist()], abs(x), 1, order, n)
    assert abs(got - ref) <= 1e-13 * max(scale, 1e-300)


def test_compensated_horner_ill_conditioned():
    # (z - 1)^7 expanded, evaluated very close to its root
    coeffs = np.array([math.comb(7, k) * (-1) ** (7 - k) for k in range(8)], dtype=float)
    z = 1.0 + 2.0 ** -10
    assert compensated_horner(coeffs, z) == pytest.approx(2.0 ** -70, rel=1e-10)


def test_basis_matches_eval_scaled():
    p = sample_polynomial(200, "gaussian", seed=3)
    xs = np.array([-5.0, 0.0, 2.5])
    for side in (1, -1):
        for order in (0, 1, 2):
            via_basis = scaled_basis(200, xs, side, order) @ p.coefficients
            direct = eval_scaled(p, xs, side, order)
            assert np.allclose(via_basis, direct, rtol=1e-11, atol=1e-12)


def test_eval_rejects_wide_window():
    with pytest.raises(ValueError):
        eval_scaled(poly((1, 1, 1)), 5.0)
    with pytest.raises(ValueError):
        eval_scaled(poly((1, 1)), 0.0, side=2)


def test_variance_identity_exact():
    # E|g_n(0)|^2 = (n+1)/n; derivative orders approach I_{2j}(0) from below
    for n in (1, 10, 2000):
        assert variance_at_zero_exact(n, 0) == Fraction(n + 1, n)
    for n in (10, 100, 2000):
        v1 = variance_at_zero_exact(n, 1)
        v2 = variance_at_zero_exact(n, 2)
        assert v1 <= 1 and v2 <= 1
        assert abs(float(v1) - 1 / 3) < 2 / n
        assert abs(float(v2) - 1 / 5) < 3 / n


def test_empirical_variance_at_zero():
    mat = sample_coefficient_matrix(1000, "gaussian", 5, range(10_000))
    est = empirical_cov(mat, [0.0], [0])
    assert abs(est.cov[0, 0] - 1.0) <= 3 * est.se[0, 0]


@pytest.fixture(scope="module")
def ensemble_2000():
    return sample_coefficient_matrix(2000, "rademacher", 8, range(10_000))


def test_empirical_cov_cross_side(ensemble_2000):
    est = empirical_cov(ensemble_2000, [0.0], [0], sides=(1, -1))
    assert abs(est.cov[0, 0]) <= 3 * est.se[0, 0]


def test_empirical_cov_same_side(ensemble_2000):
    est = empirical_cov(ensemble_2000, [1.0], [0])
    assert abs(est.cov[0, 0] - (math.e ** 2 - 1) / 2) <= 3 * est.se[0, 0]
    est2 = empirical_cov(ensemble_2000, [0.0], [2])
    assert abs(est2.cov[0, 0] - 0.2) <= 3 * est2.se[0, 0]


def test_empirical_cov_list_input_and_labels():
    ens = [sample_polynomial(50, "uniform", 1, t) for t in range(200)]
    est = empirical_cov(ens, [0.0, 1.0], [0, 1])
    assert est.labels_a == [(0.0, 0), (0.0, 1), (1.0, 0), (1.0, 1)]
    assert est.cov.shape == (4, 4)
    assert np.allclose(est.cov, est.cov.T)
    assert est.trials == 200


def test_jackknife_se_matches_loop():
    rng = np.random.default_rng(0)
    fa = rng.standard_normal((40, 2))
    fb = fa + rng.standard_normal((40, 2))
    from unitroots.model import covariance_with_se
    c, se = covariance_with_se(fa, fb)
    loo = np.array([np.cov(np.delete(fa, i, 0)[:, 0], np.delete(fb, i, 0)[:, 1])[0, 1] for i in range(40)])
    ref = math.sqrt(39 / 40 * ((loo - loo.mean()) ** 2).sum())
    assert se[0, 1] == pytest.approx(ref, rel=1e-10)
    assert c[0, 1] == pytest.approx(np.cov(fa[:, 0], fb[:, 1])[0, 1], rel=1e-12)


def test_derivative_moment_bound_small():
    # grid max of |g_n^(j)| on [-1, 1] stays below e^M on average
    mat = sample_coefficient_matrix(100, "rademacher", 6, range(2000)).astype(float)
    xs = np.linspace(-1, 1, 41)
    for j in range(3):
        m = np.abs(mat @ scaled_basis(100, xs, 1, j).T).max(axis=1)
        assert m.mean() <= math.e + 3 * m.std(ddof=1) / math.sqrt(m.size)


def test_cov_limit_same_side_grid(ensemble_2000):
    xs = [-2.0, 0.0, 2.0]
    est = empirical_cov(ensemble_2000, xs, [0, 1])
    for a, (x, i) in enumerate(est.labels_a):
        for b, (y, j) in enumerate(est.labels_b):
            assert abs(est.cov[a, b] - cov(i, j, x, y)) <= 5 * est.se[a, b]
