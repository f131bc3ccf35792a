"""Ensemble statistics for rescaled root point processes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .model import CoefficientLaw, sample_coefficient_matrix, scaled_basis
from .roots import GRID_STEP, RootPointSet, count_real_roots_exact, count_window_roots

GAP_BINS = np.linspace(0.0, 8.0, 33)


def mean_se(x) -> tuple[float, float]:
    """Sample mean and its jackknife standard error (``sd / sqrt(T)``)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def correlation_se(a, b) -> tuple[float, float]:
    """Pearson correlation with a jackknife standard error.

    Leave-one-out correlations come from running sums, so the jackknife is
    O(T). A constant series has correlation ``nan``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = a.size
    if t < 3:
        raise ValueError("need at least three trials")
    sa, sb = a.sum(), b.sum()
    saa, sbb, sab = (a * a).sum(), (b * b).sum(), (a * b).sum()

    def corr(n, s_a, s_b, s_aa, s_bb, s_ab):
        ca = s_aa - s_a * s_a / n
        cb = s_bb - s_b * s_b / n
        cab = s_ab - s_a * s_b / n
        with np.errstate(divide="ignore", invalid="ignore"):
            return cab / np.sqrt(ca * cb)

    full = float(corr(t, sa, sb, saa, sbb, sab))
    loo = corr(t - 1, sa - a, sb - b, saa - a * a, sbb - b * b, sab - a * b)
    if not np.all(np.isfinite(loo)):
        return full, math.nan
    se = math.sqrt((t - 1) / t * float(((loo - loo.mean()) ** 2).sum()))
    return full, se


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def as_dict(self) -> dict:
        return {"value": self.value, "se": self.se}


@dataclass
class IntervalStats:
    """Count statistics of one interval across trials."""

    interval: tuple[float, float]
    mean: Estimate
    variance: float
    factorial2: Estimate        # E[N(N-1)]
    exceed2: Estimate           # P(N >= 2)
    events: int                 # trials with N >= 2
    histogram: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"interval": list(self.interval), "mean": self.mean.as_dict(),
                "variance": self.variance, "factorial2": self.factorial2.as_dict(),
                "exceed2": self.exceed2.as_dict(), "events": self.events,
                "histogram": {str(k): v for k, v in self.histogram.items()}}


def interval_stats(counts: np.ndarray, interval: tuple[float, float]) -> IntervalStats:
    counts = np.asarray(counts, dtype=np.int64)
    fact = counts * (counts - 1)
    exceed = (counts >= 2).astype(float)
    values, freq = np.unique(counts, return_counts=True)
    var = float(counts.var(ddof=1)) if counts.size > 1 else math.nan
    return IntervalStats((float(interval[0]), float(interval[1])), Estimate(*mean_se(counts)), var,
                         Estimate(*mean_se(fact)), Estimate(*mean_se(exceed)),
                         int(exceed.sum()), {int(v): int(f) for v, f in zip(values, freq)})


@dataclass
class PointProcessSummary:
    """Ensemble statistics of one or both windows.

    ``counts[side]`` is a ``(trials, intervals)`` array; ``stats[side]`` the
    matching :class:`IntervalStats`. ``cross`` holds count correlations
    between the +1 and -1 windows per interval when both are present.
    """

    M: float
    trials: int
    intervals: list
    counts: dict
    stats: dict
    gap_histogram: np.ndarray
    cross: dict = field(default_factory=dict)
    flagged: int = 0

    def exceedance(self, side: int = 1) -> dict:
        """``{delta: (events, trials)}`` for the symmetric intervals ``[-delta, delta]``."""
        out = {}
        for st in self.stats[side]:
            a, b = st.interval
            if a == -b and b > 0:
                out[b] = (st.events, self.trials)
        return out


def summarize_counts(counts: Mapping[int, np.ndarray], intervals: Sequence[tuple[float, float]],
                     M: float = math.nan, gaps: np.ndarray | None = None,
                     flagged: int = 0) -> PointProcessSummary:
    """Summary from per-trial counts (rows are trials, columns intervals)."""
    intervals = [(float(a), float(b)) for a, b in intervals]
    sides = sorted(counts)
    trials = {np.asarray(counts[s]).shape[0] for s in sides}
    if len(trials) != 1:
        raise ValueError("sides have different numbers of trials")
    t = trials.pop()
    stats = {s: [interval_stats(np.asarray(counts[s])[:, j], iv) for j, iv in enumerate(intervals)]
             for s in sides}
    cross = {}
    if 1 in counts and -1 in counts and t >= 3:
        for j, iv in enumerate(intervals):
            cross[iv] = Estimate(*correlation_se(counts[1][:, j], counts[-1][:, j]))
    hist = np.histogram(gaps if gaps is not None else np.empty(0), bins=GAP_BINS)[0]
    return PointProcessSummary(M, t, intervals, {s: np.asarray(counts[s]) for s in sides},
                               stats, hist, cross, flagged)


def summarize(ensembles: Sequence[RootPointSet],
              intervals: Sequence[tuple[float, float]]) -> PointProcessSummary:
    """Aggregate point sets (one per trial and side) over the given intervals.

    Sets are ordered by ``(trial, side)`` first, so the result does not
    depend on the input order. Every trial must appear once per side.
    """
    ensembles = sorted(ensembles, key=lambda r: (r.trial, -r.side))
    if not ensembles:
        raise ValueError("no point sets to summarize")
    meta = {(r.M, r.n) for r in ensembles}
    if len(meta) != 1:
        raise ValueError(f"inconsistent window metadata: {sorted(meta)}")
    M = ensembles[0].M
    for a, b in intervals:
        if a > b or max(abs(a), abs(b)) > M:
            raise ValueError(f"interval ({a}, {b}) is empty or outside the window")
    by_side: dict = {}
    for r in ensembles:
        by_side.setdefault(r.side, []).append(r)
    trial_sets = {s: [r.trial for r in rs] for s, rs in by_side.items()}
    ref = next(iter(trial_sets.values()))
    for s, ids in trial_sets.items():
        if ids != ref or len(set(ids)) != len(ids):
            raise ValueError("each trial must appear exactly once per side")
    counts = {s: np.array([[r.count(a, b) for a, b in intervals] for r in rs], dtype=np.int64)
              .reshape(len(rs), len(intervals)) for s, rs in by_side.items()}
    gaps = np.concatenate([np.diff(r.points) for r in ensembles] or [np.empty(0)])
    flagged = sum(1 for r in ensembles if r.unresolved)
    return summarize_counts(counts, intervals, M, gaps, flagged)


# ---------------------------------------------------------------- repulsion

@dataclass
class SlopeFit:
    """Weighted least-squares slope of ``log p`` against ``log delta``."""

    slope: float
    se: float
    ci: tuple[float, float]
    deltas: list
    probabilities: list
    events: list
    dropped: list

    def as_dict(self) -> dict:
        return {"slope": self.slope, "se": self.se, "ci": list(self.ci), "deltas": self.deltas,
                "probabilities": self.probabilities, "events": self.events,
                "dropped": self.dropped}


def repulsion_slope(table, deltas: Sequence[float] | None = None, *, level: float = 0.95) -> SlopeFit:
    """Slope of ``log P(N[-delta, delta] >= 2)`` versus ``log delta``.

    ``table`` is a :class:`PointProcessSummary` or a mapping
    ``delta -> (events, trials)``. Each point is weighted by its event count,
    the inverse of the delta-method variance of ``log p``. Deltas with no
    events are dropped and listed in ``dropped``.
    """
    from scipy import stats as sps

    if isinstance(table, PointProcessSummary):
        table = table.exceedance(1)
    deltas = sorted(table) if deltas is None else sorted(deltas)
    used, probs, events, dropped = [], [], [], []
    for d in deltas:
        if d not in table:
            raise ValueError(f"no exceedance estimate for delta={d}")
        k, t = table[d]
        if k == 0:
            dropped.append(float(d))
            continue
        used.append(float(d))
        probs.append(k / t)
        events.append(int(k))
    if len(used) < 2:
        raise ValueError(f"need two deltas with events, have {len(used)} (dropped {dropped})")
    x = np.log(used)
    y = np.log(probs)
    w = np.asarray(events, dtype=float)
    xm = np.sum(w * x) / w.sum()
    ym = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    se = float(1.0 / math.sqrt(sxx))
    z = sps.norm.ppf(0.5 + level / 2)
    return SlopeFit(slope, se, (slope - z * se, slope + z * se), used, probs, events, dropped)


def censored_slope_bound(table: Mapping[float, tuple[int, int]], *, level: float = 0.95) -> float:
    """One-sided lower bound on the repulsion slope when small deltas have no events.

    Pairs the largest delta with events against each smaller zero-event
    delta, replacing the zero estimate by its Clopper-Pearson upper bound;
    returns the largest resulting slope, or ``nan`` if no such pair exists.
    """
    from scipy import stats as sps

    with_events = [d for d in table if table[d][0] > 0]
    if not with_events:
        return math.nan
    hi = max(with_events)
    k, t = table[hi]
    best = math.nan
    for d in table:
        kd, td = table[d]
        if d < hi and kd == 0:
            p_up = sps.beta.ppf(level, 1, td)
            b = math.log((k / t) / p_up) / math.log(hi / d)
            best = b if math.isnan(best) else max(best, b)
    return best


def poisson_exceedance_table(means: Mapping[float, float], trials: int, seed: int) -> dict:
    """Simulated ``{delta: (events, trials)}`` for Poisson counts with the given means."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 3], dtype=np.uint64)))
    out = {}
    for d in sorted(means):
        counts = rng.poisson(means[d], trials)
        out[d] = (int(np.count_nonzero(counts >= 2)), trials)
    return out


def ratio_upper_bound(events: int, trials: int, p_null: float, level: float = 0.95) -> float:
    """One-sided Clopper-Pearson upper bound of ``P_hat / p_null``."""
    from scipy import stats as sps

    if events >= trials:
        return 1.0 / p_null
    upper = sps.beta.ppf(level, events + 1, trials - events)
    return float(upper / p_null)


# ---------------------------------------------------------------- polynomial probes

def _batches(trials: int, batch: int):
    for lo in range(0, trials, batch):
        yield range(lo, min(trials, lo + batch))


@dataclass
class CurvePoint:
    M: float
    p_no_root: float
    se: float


def root_near_one_curve(n: int, law: "str | CoefficientLaw", trials: int, M_list: Sequence[float], *,
                        seed: int, grid_step: float = GRID_STEP, batch: int = 256) -> list[CurvePoint]:
    """``P(no root of f_n in [1 - M/n, 1 + M/n])`` per ``M``, with SEs."""
    M_list = [float(m) for m in M_list]
    if any(m < 0 for m in M_list):
        raise ValueError("M must be non-negative")
    intervals = [(-m, m) for m in M_list]
    none = np.empty((0, len(M_list)), dtype=bool)
    for ids in _batches(trials, batch):
        coeffs = sample_coefficient_matrix(n, law, seed, ids)
        wc = count_window_roots(coeffs, n, 1, intervals, grid_step=grid_step)
        none = np.vstack([none, wc.counts == 0])
    return [CurvePoint(m, *mean_se(none[:, j])) for j, m in enumerate(M_list)]


@dataclass
class SignProbe:
    probability: float
    se: float
    baseline: float
    bound: float
    trials: int


def sign_pattern_probe(n: int, law: "str | CoefficientLaw", trials: int, alpha: float, k: int, *,
                       seed: int, batch: int = 4096) -> SignProbe:
    """Probability that ``g_n(alpha^(j-1))``, ``j = 1..k``, all share a sign.

    ``baseline`` is the value ``2^(1-k)`` for independent signs and
    ``bound`` the upper bound ``2^(2-k)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    pts = np.unique(alpha ** np.arange(k, dtype=float))
    if pts[-1] > n:
        raise ValueError("alpha^(k-1) exceeds n")
    basis = scaled_basis(n, pts, 1, 0, normalized=False)
    same = np.empty(0, dtype=bool)
    for ids in _batches(trials, batch):
        coeffs = sample_coefficient_matrix(n, law, seed, ids).astype(float)
        s = np.sign(coeffs @ basis.T)
        same = np.concatenate([same, np.all(s == s[:, :1], axis=1) & (s[:, 0] != 0)])
    p, se = mean_se(same)
    return SignProbe(p, se, 2.0 ** (1 - k), 2.0 ** (2 - k), trials)


def cross_side_independence(summary: PointProcessSummary,
                            interval: tuple[float, float] | None = None) -> Estimate:
    """Correlation of the +1 and -1 window counts on ``interval`` (default: first)."""
    if not summary.cross:
        raise ValueError("summary does not hold both sides")
    key = summary.intervals[0] if interval is None else (float(interval[0]), float(interval[1]))
    return summary.cross[key]


@dataclass
class TotalCountRow:
    n: int
    mean: float
    se: float
    asymptotic: float
    ratio: float


def expected_total_roots_check(n_list: Sequence[int], law: "str | CoefficientLaw", trials: int, *,
                               seed: int) -> list[TotalCountRow]:
    """Mean exact real-root count against ``(2/pi) log n``."""
    if CoefficientLaw.parse(law) is not CoefficientLaw.RADEMACHER:
        raise ValueError("exact counting needs integer (rademacher) coefficients")
    rows = []
    for n in n_list:
        coeffs = sample_coefficient_matrix(n, law, seed, range(trials))
        counts = [count_real_roots_exact(c) for c in coeffs]
        m, se = mean_se(counts)
        asym = 2.0 / math.pi * math.log(n)
        rows.append(TotalCountRow(int(n), m, se, asym, m / asym))
    return rows
