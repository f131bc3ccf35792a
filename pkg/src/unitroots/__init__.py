"""Real roots of random polynomials near +-1 and their Gaussian-process limit."""

__version__ = "0.1.0"

from .kernel import correlation, cov, exp_moment
from .kacrice import (expected_count, intensity, pair_intensity, poisson_null,
                      second_factorial_moment)
from .limit import GridSpec, PathSample, gram_matrix, roots_of_path, sample_paths
from .model import CoefficientLaw, PolynomialSample, empirical_cov, eval_scaled, sample_polynomial
from .roots import RootPointSet, count_real_roots_exact, find_window_roots, scaled_root_ensemble
from .stats import (PointProcessSummary, cross_side_independence, expected_total_roots_check,
                    repulsion_slope, root_near_one_curve, sign_pattern_probe, summarize)

__all__ = [
    "CoefficientLaw", "GridSpec", "PathSample", "PointProcessSummary", "PolynomialSample",
    "RootPointSet", "correlation", "count_real_roots_exact", "cov", "cross_side_independence",
    "empirical_cov", "eval_scaled", "exp_moment", "expected_count", "expected_total_roots_check",
    "find_window_roots", "gram_matrix", "intensity", "pair_intensity", "poisson_null",
    "repulsion_slope", "root_near_one_curve", "roots_of_path", "sample_paths",
    "sample_polynomial", "scaled_root_ensemble", "second_factorial_moment",
    "sign_pattern_probe", "summarize",
]
