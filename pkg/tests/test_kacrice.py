import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitroots.kacrice import (PoissonNull, condition_pair, condition_pair_direct, expected_count,
                               intensity, intensity_det_route, pair_intensity, poisson_null,
                               second_factorial_moment)
from unitroots.limit import GridSpec, path_root_counts
from unitroots.stats import mean_se

RHO1_ZERO = 1.0 / (2.0 * math.sqrt(3.0) * math.pi)


def test_intensity_at_zero():
    assert intensity(0.0) == pytest.approx(RHO1_ZERO, rel=1e-14)
    assert intensity(0.0) == pytest.approx(0.091888, abs=5e-7)


def test_intensity_matches_oracle(oracle):
    for x, ref in oracle["rho1"].items():
        assert intensity(float(x)) == pytest.approx(ref, rel=1e-12), x


@given(st.floats(-60, 60))
def test_intensity_two_routes_agree(x):
    assert intensity_det_route(x) == pytest.approx(intensity(x), rel=1e-9, abs=1e-300)


@given(st.floats(-60, 60))
def test_intensity_mirror_symmetric(x):
    assert intensity(x) == pytest.approx(intensity(-x), rel=1e-10)


def test_intensity_tail_decay():
    # rho_1(x) ~ 1 / (2 pi |x|) far from the origin
    for x in (50.0, 200.0):
        assert intensity(x) * 2 * math.pi * x == pytest.approx(1.0, rel=0.02)


def test_expected_count_oracle(oracle):
    for m, ref in oracle["expected_count"].items():
        assert expected_count(float(m)) == pytest.approx(ref, rel=1e-9), m


def test_expected_count_zero_and_additivity():
    assert expected_count(0.0) == 0.0
    for m in (0.5, 3.0, 10.0):
        whole = expected_count(m)
        parts = expected_count(-m, 0.0) + expected_count(0.0, m)
        assert abs(whole - parts) <= 1e-9


def test_expected_count_small_window_taylor():
    ratios = [expected_count(d) / (2 * d * RHO1_ZERO) for d in (0.4, 0.2, 0.1, 0.05)]
    gaps = [abs(r - 1) for r in ratios]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_pair_intensity_oracle(oracle):
    for key, ref in oracle["rho2"].items():
        x, y = map(float, key.split(","))
        assert pair_intensity(x, y) == pytest.approx(ref, rel=1e-6), key


def test_pair_intensity_linear_decay():
    deltas = np.array([0.1, 0.05, 0.025])
    vals = np.array([pair_intensity(d, -d) for d in deltas])
    c = vals / (2 * deltas)
    # one constant bounds all three
    assert c.max() / c.min() < 1.01
    assert np.all(vals <= c.max() * 2 * deltas * (1 + 1e-12))


def test_pair_intensity_vanishes_on_diagonal():
    vals = [pair_intensity(0.5, 0.5 + h) for h in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-5
    assert pair_intensity(0.5, 0.5) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(-8, 8), st.floats(-8, 8))
def test_pair_intensity_symmetric_nonnegative(x, y):
    a = pair_intensity(x, y)
    assert a >= 0
    assert a == pytest.approx(pair_intensity(y, x), rel=1e-9, abs=1e-15)
    assert a == pytest.approx(pair_intensity(-x, -y), rel=1e-9, abs=1e-15)


def test_pair_independent_far_apart():
    # correlations vanish for well separated points: rho_2 -> rho_1 rho_1
    x, y = -20.0, 20.0
    assert pair_intensity(x, y) == pytest.approx(intensity(x) * intensity(y), rel=0.05)


def test_conditioning_routes_agree():
    for x, y in ((0.0, 2.0), (-1.0, 3.0), (-0.5, -3.5)):
        a, b = condition_pair(x, y), condition_pair_direct(x, y)
        assert a.sigma1 == pytest.approx(b.sigma1, rel=1e-8)
        assert a.sigma2 == pytest.approx(b.sigma2, rel=1e-8)
        assert a.rho == pytest.approx(b.rho, rel=1e-7, abs=1e-9)


def test_pair_intensity_monte_carlo():
    grid = GridSpec(4.0, 0.05)
    bins = [(0.0, 0.1), (3.9, 4.0)]
    counts, _ = path_root_counts(grid, range(100_000), seed=21, intervals=bins)
    est, se = mean_se(counts[:, 0] * counts[:, 1] / 0.01)
    ref = pair_intensity(0.05, 3.95)
    assert ref >= 0
    assert abs(est - ref) <= 3 * se


def test_second_factorial_moment_oracle(oracle):
    for d, ref in oracle["factorial2"].items():
        d = float(d)
        assert second_factorial_moment(-d, d) == pytest.approx(ref, rel=1e-5)


def test_second_factorial_moment_slope():
    deltas = [0.4, 0.2, 0.1]
    vals = [second_factorial_moment(-d, d) for d in deltas]
    slope = np.polyfit(np.log(deltas), np.log(vals), 1)[0]
    assert slope >= 2.7


def test_second_factorial_moment_empty():
    assert second_factorial_moment(1.0, 1.0) == 0.0
    assert second_factorial_moment(1.0, 0.5) == 0.0


@given(st.floats(0, 30))
def test_poisson_formula(m):
    null = PoissonNull(m)
    assert null.p_more_than_one == pytest.approx(1 - math.exp(-m) * (1 + m), abs=1e-15)
    assert null.p0 + null.p1 + null.p_more_than_one == pytest.approx(1.0, abs=1e-14)


def test_poisson_small_window_ratio():
    ratios = []
    for d in (0.2, 0.05, 0.0125):
        null = poisson_null(-d, d)
        ratios.append(null.p_more_than_one / null.mean ** 2)
    assert all(abs(b - 0.5) < abs(a - 0.5) for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(0.5, rel=0.01)


def test_repulsion_relative_to_poisson():
    # the factorial-moment bound on P(nu > 1) falls faster than the Poisson value
    r = [second_factorial_moment(-d, d) / poisson_null(-d, d).p_more_than_one for d in (0.4, 0.2, 0.1)]
    assert r[0] > r[1] > r[2]
    assert r[2] < 0.02
