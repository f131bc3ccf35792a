"""Named experiments, configuration, and reproducible output.

Every experiment writes plot-ready CSV files plus ``summary.json`` into the
output directory. ``summary.json`` depends only on the configuration (minus
the output path and worker count), the seed and the package version, so
repeated runs are byte-identical. Wall time and the full configuration go to
``run.json`` alongside it.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .kacrice import (PAIR_REACH, PoissonNull, expected_count, intensity, pair_intensity,
                      second_factorial_moment)
from .kernel import cov
from .limit import GridSpec, path_root_counts, sample_path_matrix
from .model import CoefficientLaw, covariance_with_se, sample_coefficient_matrix, scaled_basis
from .roots import count_window_roots, scaled_root_ensemble
from .stats import (censored_slope_bound, correlation_se, expected_total_roots_check, mean_se,
                    poisson_exceedance_table, ratio_upper_bound, repulsion_slope,
                    sign_pattern_probe)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("covariance", "roots", "limit-paths", "kacrice-table", "repulsion",
               "near-one", "independence", "total-count")

OUT_ENV = "UNITROOTS_OUT"

# trials per work unit; fixed so results never depend on the worker count
CHUNK = 4096

DEFAULT_DELTAS = (0.8, 0.4, 0.2, 0.1)
DEFAULT_M_LIST = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
DEFAULT_XS = (-2.0, -1.0, 0.0, 1.0, 2.0)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    """Configuration problems, one message per entry of ``errors``."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    """One experiment run. ``None`` means "use the experiment's default"."""

    experiment: str
    seed: int | None = None
    n: int | None = None
    n_list: list | None = None
    law: str | None = None
    trials: int | None = None
    M: float | None = None
    M_list: list | None = None
    delta_list: list | None = None
    alpha: float | None = None
    k: int | None = None
    grid_step: float | None = None
    xs: list | None = None
    trial_cap: int | None = None
    path_cap: int | None = None
    min_events: int | None = None
    save_paths: int | None = None
    workers: int = 1
    out: str = "results"

    def result_dict(self) -> dict:
        """Fields that can change results (everything but ``out`` and ``workers``)."""
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


# per-experiment defaults; fields absent here are rejected when given
_DEFAULTS: dict[str, dict[str, Any]] = {
    "covariance": dict(n=2000, law="rademacher", trials=10_000, xs=list(DEFAULT_XS)),
    "roots": dict(n=2000, law="rademacher", trials=1000, M=8.0, grid_step=0.01),
    "limit-paths": dict(trials=10_000, M=1.0, grid_step=0.005, save_paths=100),
    "kacrice-table": dict(M=4.0, grid_step=0.01),
    "repulsion": dict(n=2000, law="rademacher", trials=1 << 16, delta_list=list(DEFAULT_DELTAS),
                      grid_step=0.01, trial_cap=1 << 21, path_cap=1 << 26, min_events=20),
    "near-one": dict(n=2000, law="rademacher", trials=1000, M_list=list(DEFAULT_M_LIST),
                     grid_step=0.01, alpha=4.0, k=5),
    "independence": dict(n=2000, law="rademacher", trials=10_000, M=2.0, grid_step=0.01),
    "total-count": dict(n_list=[50, 100, 200], law="rademacher", trials=500),
}

_ALWAYS = {"experiment", "seed", "workers", "out"}


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """Fill defaults and check consistency; raises :class:`ConfigError`."""
    errors = []
    if config.experiment not in EXPERIMENTS:
        raise ConfigError([f"unknown experiment {config.experiment!r}; choose from {EXPERIMENTS}"])
    defaults = _DEFAULTS[config.experiment]
    values = dataclasses.asdict(config)
    for name, value in values.items():
        if name in _ALWAYS or value is None:
            continue
        if name not in defaults:
            errors.append(f"{name} is not used by the {config.experiment} experiment")
    if config.seed is None:
        errors.append("seed is required")
    elif not isinstance(config.seed, int) or isinstance(config.seed, bool) or config.seed < 0:
        errors.append("seed must be a non-negative integer")
    if not isinstance(config.workers, int) or config.workers < 1:
        errors.append("workers must be a positive integer")
    if errors:
        raise ConfigError(errors)

    filled = {k: (v if v is not None else defaults.get(k)) for k, v in values.items()}
    cfg = ExperimentConfig(**filled)
    if cfg.law is not None:
        try:
            cfg.law = CoefficientLaw.parse(cfg.law).value
        except ValueError:
            errors.append(f"unknown law {cfg.law!r}")
    for name in ("trials", "n", "trial_cap", "path_cap", "min_events", "k"):
        v = getattr(cfg, name)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 1):
            errors.append(f"{name} must be a positive integer")
    if cfg.save_paths is not None and (not isinstance(cfg.save_paths, int) or cfg.save_paths < 0):
        errors.append("save_paths must be a non-negative integer")
    if cfg.grid_step is not None and not (0 < cfg.grid_step <= 1.0):
        errors.append("grid_step must lie in (0, 1]")
    if cfg.alpha is not None and cfg.alpha < 1:
        errors.append("alpha must be at least 1")
    if cfg.M is not None and not (cfg.M > 0 and math.isfinite(cfg.M)):
        errors.append("M must be positive and finite")
    for name in ("M_list", "delta_list", "xs", "n_list"):
        v = getattr(cfg, name)
        if v is not None and len(v) == 0:
            errors.append(f"{name} must not be empty")
    if cfg.delta_list and any(d <= 0 for d in cfg.delta_list):
        errors.append("deltas must be positive")
    if cfg.delta_list and len(cfg.delta_list) < 3:
        errors.append("the slope fit needs at least three deltas")
    if cfg.M_list and any(m < 0 for m in cfg.M_list):
        errors.append("M values must be non-negative")
    if cfg.trial_cap is not None and cfg.trials is not None and cfg.trial_cap < cfg.trials:
        errors.append("trial_cap is below trials")
    if cfg.path_cap is not None and cfg.trials is not None and cfg.path_cap < cfg.trials:
        errors.append("path_cap is below trials")
    if cfg.n_list and any(not isinstance(n, int) or n < 1 or n > 200 for n in cfg.n_list):
        errors.append("total-count degrees must be integers in [1, 200]")

    # the window must stay within |x| <= n/2
    if cfg.n is not None:
        reach = {"roots": cfg.M, "independence": cfg.M,
                 "near-one": max(cfg.M_list) if cfg.M_list else None,
                 "repulsion": max(cfg.delta_list) if cfg.delta_list else None,
                 "covariance": max(abs(x) for x in cfg.xs) if cfg.xs else None}.get(cfg.experiment)
        if reach is not None and reach > cfg.n / 2:
            errors.append(f"window {reach} exceeds n/2 = {cfg.n / 2}")
        if cfg.experiment == "near-one" and cfg.alpha is not None and cfg.k is not None \
                and cfg.alpha ** (cfg.k - 1) > cfg.n / 2:
            errors.append("alpha^(k-1) exceeds n/2")
    if cfg.experiment == "limit-paths" and cfg.M is not None and cfg.grid_step is not None:
        ratio = cfg.M / cfg.grid_step
        if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1):
            errors.append("M / grid_step must be an integer for limit paths")
        if cfg.M < 1.0:
            errors.append("limit-paths needs M >= 1 to report counts on [-1, 1]")
    if cfg.experiment == "kacrice-table" and cfg.M is not None and cfg.M > PAIR_REACH:
        errors.append(f"kacrice-table supports M <= {PAIR_REACH}")
    if cfg.experiment == "total-count" and cfg.law != "rademacher":
        errors.append("total-count needs the rademacher law")
    if errors:
        raise ConfigError(errors)
    return cfg


# ---------------------------------------------------------------- helpers

def version_string() -> str:
    """Package version, with ``git describe`` appended when available."""
    here = Path(__file__).resolve().parent
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=here,
                              capture_output=True, text=True, timeout=10)
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{__version__}+{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _plain(obj):
    # JSON-safe copy with numpy scalars converted and non-finite floats as strings
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _pmap(fn: Callable, tasks: list, workers: int) -> list:
    """Ordered map, in-process or across worker processes."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _chunks(lo: int, hi: int) -> list[tuple[int, int]]:
    # aligned to CHUNK so the same trial always lands in the same unit
    out = []
    start = lo
    while start < hi:
        stop = min(hi, (start // CHUNK + 1) * CHUNK)
        out.append((start, stop))
        start = stop
    return out


# ---------------------------------------------------------------- work units

def _cov_features(n, law, seed, lo, hi, xs):
    coeffs = sample_coefficient_matrix(n, law, seed, range(lo, hi)).astype(float)
    feats = []
    for side in (1, -1):
        cols = [scaled_basis(n, [x], side, o)[0] for x in xs for o in (0, 1)]
        feats.append(coeffs @ np.array(cols).T)
    return np.hstack(feats)


def _window_counts(n, law, seed, lo, hi, sides, intervals, grid_step):
    coeffs = sample_coefficient_matrix(n, law, seed, range(lo, hi))
    out = []
    for side in sides:
        wc = count_window_roots(coeffs, n, side, intervals, grid_step=grid_step)
        out.append((wc.counts, wc.flagged))
    return out


def _roots_unit(n, law, seed, lo, hi, M, grid_step):
    return scaled_root_ensemble(n, law, range(lo, hi), M, (1, -1), seed=seed, grid_step=grid_step)


def _path_counts(M, step, seed, lo, hi, intervals, substream):
    grid = GridSpec(M, step, True)
    return path_root_counts(grid, range(lo, hi), seed, intervals, substream=substream)


# ---------------------------------------------------------------- experiments

def _covariance(cfg: ExperimentConfig, out: Path) -> dict:
    xs = [float(x) for x in cfg.xs]
    tasks = [(cfg.n, cfg.law, cfg.seed, lo, hi, xs) for lo, hi in _chunks(0, cfg.trials)]
    feats = np.vstack(_pmap(_cov_features, tasks, cfg.workers))
    labels = [(side, x, o) for side in (1, -1) for x in xs for o in (0, 1)]
    c, se = covariance_with_se(feats, feats)
    rows, z_same, z_cross = [], [], []
    for a, (sa, xa, oa) in enumerate(labels):
        for b, (sb, xb, ob) in enumerate(labels):
            if b < a:
                continue
            limit = float(cov(oa, ob, xa, xb)) if sa == sb else 0.0
            z = (c[a, b] - limit) / se[a, b] if se[a, b] > 0 else 0.0
            (z_same if sa == sb else z_cross).append(abs(z))
            rows.append((sa, xa, oa, sb, xb, ob, c[a, b], se[a, b], limit, z))
    write_csv(out / "covariance.csv",
              ["side_a", "x_a", "order_a", "side_b", "x_b", "order_b", "estimate", "se", "limit", "z"],
              rows)
    return {"entries": len(rows), "max_abs_z_same_side": max(z_same),
            "max_abs_z_cross_side": max(z_cross),
            "same_side_within_5se": bool(max(z_same) <= 5), "cross_side_within_5se": bool(max(z_cross) <= 5)}


def _roots(cfg: ExperimentConfig, out: Path) -> dict:
    tasks = [(cfg.n, cfg.law, cfg.seed, lo, hi, cfg.M, cfg.grid_step) for lo, hi in _chunks(0, cfg.trials)]
    sets = [r for part in _pmap(_roots_unit, tasks, cfg.workers) for r in part]
    rows = [(r.trial, r.side, x, c) for r in sets for x, c in zip(r.points, r.certified)]
    write_csv(out / "roots.csv", ["trial", "side", "x", "certified"], rows)
    est = {}
    expected = expected_count(cfg.M)
    for side in (1, -1):
        counts = [r.points.size for r in sets if r.side == side]
        m, se = mean_se(counts)
        est[f"side_{side:+d}"] = {"mean_count": m, "se": se, "z": (m - expected) / se if se else 0.0}
    est["kacrice_expected_count"] = expected
    est["flagged_sets"] = sum(1 for r in sets if r.unresolved)
    est["uncertified_points"] = int(sum((~r.certified).sum() for r in sets))
    return est


def _limit_paths(cfg: ExperimentConfig, out: Path) -> dict:
    grid = GridSpec(cfg.M, cfg.grid_step, True)
    keep = min(cfg.save_paths, cfg.trials)
    if keep:
        values, _ = sample_path_matrix(grid, range(keep), cfg.seed)
        nodes = grid.nodes
        write_csv(out / "paths.csv", ["path_id", "node", "value"],
                  ((p, nodes[j], values[p, j]) for p in range(keep) for j in range(nodes.size)))
    w = 0.5
    intervals = [(-1.0, 1.0), (-w, w), (-cfg.M, cfg.M)]
    tasks = [(cfg.M, cfg.grid_step, cfg.seed, lo, hi, intervals, 1) for lo, hi in _chunks(0, cfg.trials)]
    parts = _pmap(_path_counts, tasks, cfg.workers)
    counts = np.vstack([p[0] for p in parts])
    flagged = int(sum(p[1].sum() for p in parts))
    c1 = counts[:, 0]
    m, se = mean_se(c1)
    fm, fse = mean_se(c1 * (c1 - 1))
    rho_m, rho_se = mean_se(counts[:, 1] / (2 * w))
    write_csv(out / "path_counts.csv", ["path_id", "count_1", f"count_{w}", "count_M"],
              ((i, *counts[i]) for i in range(counts.shape[0])))
    return {
        "mean_count_1": {"value": m, "se": se, "kacrice": expected_count(1.0)},
        "factorial2_1": {"value": fm, "se": fse, "kacrice": second_factorial_moment(-1.0, 1.0)},
        "rho1_at_0": {"value": rho_m, "se": rho_se, "window": w, "kacrice": float(intensity(0.0))},
        "mean_count_M": dict(zip(("value", "se"), mean_se(counts[:, 2]))),
        "flagged_cells": flagged,
    }


def _kacrice_table(cfg: ExperimentConfig, out: Path) -> dict:
    k = int(round(cfg.M / cfg.grid_step))
    xs = np.linspace(-cfg.M, cfg.M, 2 * k + 1)
    write_csv(out / "intensity.csv", ["x", "rho1"], zip(xs, intensity(xs)))
    pair_step = 0.25
    kp = int(math.floor(cfg.M / pair_step))
    px = np.arange(-kp, kp + 1) * pair_step
    write_csv(out / "pair.csv", ["x", "y", "rho2"],
              ((x, y, pair_intensity(x, y)) for x in px for y in px))
    moments = {}
    for d in DEFAULT_DELTAS:
        f2, err = second_factorial_moment(-d, d, return_error=True)
        null = PoissonNull(expected_count(d))
        moments[str(d)] = {"factorial2": f2, "quad_error": err, "mean": null.mean,
                           "poisson_p_more_than_one": null.p_more_than_one}
    logd = np.log(DEFAULT_DELTAS)
    logf = np.log([moments[str(d)]["factorial2"] for d in DEFAULT_DELTAS])
    slope = float(np.polyfit(logd, logf, 1)[0])
    return {"expected_count_M": expected_count(cfg.M), "rho1_at_0": float(intensity(0.0)),
            "small_windows": moments, "factorial2_loglog_slope": slope}


def _escalate(run_more: Callable[[int, int], np.ndarray], start: int, cap: int, min_events: int,
              event_col: int) -> tuple[np.ndarray, bool]:
    """Double the ensemble until ``min_events`` exceedances or the cap."""
    counts = run_more(0, start)
    total = start
    while (counts[:, event_col] >= 2).sum() < min_events and total < cap:
        new_total = min(cap, 2 * total)
        counts = np.vstack([counts, run_more(total, new_total)])
        total = new_total
    censored = bool((counts[:, event_col] >= 2).sum() < min_events)
    return counts, censored


def _repulsion(cfg: ExperimentConfig, out: Path) -> dict:
    deltas = sorted(float(d) for d in cfg.delta_list)
    dmin = min(deltas)
    intervals = [(-d, d) for d in deltas]
    rows = []
    nulls = {d: PoissonNull(expected_count(d)) for d in deltas}

    # limit process: one ensemble per delta, grid of at most 0.02 fitted to the window
    limit_table, limit_censored = {}, {}
    for i, d in enumerate(deltas):
        step = d / math.ceil(d / 0.02 - 1e-9)

        def more(lo, hi, d=d, step=step, i=i):
            tasks = [(d, step, cfg.seed, a, b, [(-d, d)], 10 + i) for a, b in _chunks(lo, hi)]
            return np.vstack([p[0] for p in _pmap(_path_counts, tasks, cfg.workers)])

        counts, censored = _escalate(more, cfg.trials, cfg.path_cap, cfg.min_events, 0)
        limit_table[d] = (int((counts[:, 0] >= 2).sum()), counts.shape[0])
        limit_censored[d] = censored

    # polynomials: one ensemble, nested windows
    def more_gn(lo, hi):
        tasks = [(cfg.n, cfg.law, cfg.seed, a, b, (1,), intervals, cfg.grid_step)
                 for a, b in _chunks(lo, hi)]
        return np.vstack([p[0][0] for p in _pmap(_window_counts, tasks, cfg.workers)])

    gn_counts, gn_censored = _escalate(more_gn, cfg.trials, cfg.trial_cap, cfg.min_events,
                                       deltas.index(dmin))
    gn_table = {d: (int((gn_counts[:, j] >= 2).sum()), gn_counts.shape[0]) for j, d in enumerate(deltas)}

    poisson_trials = 1 << 22
    pois_table = poisson_exceedance_table({d: nulls[d].mean for d in deltas}, poisson_trials, cfg.seed)

    fits = {}
    for name, table in (("limit", limit_table), ("polynomial", gn_table), ("poisson", pois_table)):
        for d in deltas:
            k, t = table[d]
            p = k / t
            rows.append((name, d, t, k, p, math.sqrt(p * (1 - p) / t), nulls[d].p_more_than_one))
        try:
            fits[name] = repulsion_slope(table, deltas).as_dict()
        except ValueError as exc:
            fits[name] = {"error": str(exc), "slope_lower_95": censored_slope_bound(table)}
    write_csv(out / "repulsion.csv",
              ["source", "delta", "trials", "events", "p_hat", "se", "poisson_p"], rows)

    p_null_hat = pois_table[dmin][0] / pois_table[dmin][1]
    ratios = {}
    for name, table in (("limit", limit_table), ("polynomial", gn_table)):
        k, t = table[dmin]
        ratios[name] = {"delta": dmin, "ratio": (k / t) / p_null_hat if p_null_hat else math.nan,
                        "ratio_exact_null": (k / t) / nulls[dmin].p_more_than_one,
                        "upper_95": ratio_upper_bound(k, t, nulls[dmin].p_more_than_one)}
    return {"slopes": fits, "ratio_at_smallest_delta": ratios,
            "censored": {"limit": {str(d): c for d, c in limit_censored.items()},
                         "polynomial": gn_censored},
            "poisson_trials": poisson_trials,
            "kacrice_factorial2": {str(d): second_factorial_moment(-d, d) for d in deltas}}


def _near_one(cfg: ExperimentConfig, out: Path) -> dict:
    M_list = sorted(float(m) for m in cfg.M_list)
    intervals = [(-m, m) for m in M_list]
    tasks = [(cfg.n, cfg.law, cfg.seed, lo, hi, (1,), intervals, cfg.grid_step)
             for lo, hi in _chunks(0, cfg.trials)]
    parts = _pmap(_window_counts, tasks, cfg.workers)
    counts = np.vstack([p[0][0] for p in parts])
    curve = [(m, *mean_se(counts[:, j] == 0)) for j, m in enumerate(M_list)]
    write_csv(out / "near_one.csv", ["M", "p_no_root", "se"], curve)
    monotone = all(curve[j + 1][1] <= curve[j][1] + 2 * math.hypot(curve[j][2], curve[j + 1][2])
                   for j in range(len(curve) - 1))
    probe = sign_pattern_probe(cfg.n, cfg.law, cfg.trials, cfg.alpha, cfg.k, seed=cfg.seed)
    return {"curve": [{"M": m, "p_no_root": p, "se": s} for m, p, s in curve],
            "non_increasing_within_2se": monotone,
            "p_no_root_at_max_M": curve[-1][1],
            "flagged_cells": int(sum(p[0][1].sum() for p in parts)),
            "sign_probe": dataclasses.asdict(probe) | {"alpha": cfg.alpha, "k": cfg.k}}


def _independence(cfg: ExperimentConfig, out: Path) -> dict:
    interval = [(-cfg.M, cfg.M)]
    tasks = [(cfg.n, cfg.law, cfg.seed, lo, hi, (1, -1), interval, cfg.grid_step)
             for lo, hi in _chunks(0, cfg.trials)]
    parts = _pmap(_window_counts, tasks, cfg.workers)
    plus = np.concatenate([p[0][0][:, 0] for p in parts])
    minus = np.concatenate([p[1][0][:, 0] for p in parts])
    write_csv(out / "counts.csv", ["trial", "plus", "minus"],
              ((i, plus[i], minus[i]) for i in range(plus.size)))
    r, se = correlation_se(plus, minus)
    return {"correlation": r, "se": se, "within_3se": bool(abs(r) <= 3 * se),
            "mean_plus": mean_se(plus), "mean_minus": mean_se(minus),
            "kacrice_expected_count": expected_count(cfg.M)}


def _total_count(cfg: ExperimentConfig, out: Path) -> dict:
    rows = expected_total_roots_check(cfg.n_list, cfg.law, cfg.trials, seed=cfg.seed)
    write_csv(out / "total_count.csv", ["n", "mean", "se", "asymptotic", "ratio"],
              ((r.n, r.mean, r.se, r.asymptotic, r.ratio) for r in rows))
    return {"rows": [dataclasses.asdict(r) for r in rows],
            "within_band": all(0.75 <= r.ratio <= 1.45 for r in rows), "diagnostic": True}


_RUNNERS = {"covariance": _covariance, "roots": _roots, "limit-paths": _limit_paths,
            "kacrice-table": _kacrice_table, "repulsion": _repulsion, "near-one": _near_one,
            "independence": _independence, "total-count": _total_count}


@dataclass
class RunResult:
    out: Path
    summary: dict
    wall_time: float
    files: list = field(default_factory=list)


def run(config: ExperimentConfig) -> RunResult:
    """Validate, execute and persist one experiment."""
    cfg = validate(config)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    estimates = _RUNNERS[cfg.experiment](cfg, out)
    wall = time.perf_counter() - t0
    summary = {"experiment": cfg.experiment, "version": version_string(),
               "config": cfg.result_dict(), "estimates": estimates}
    text = json.dumps(_plain(summary), indent=2, sort_keys=True) + "\n"
    (out / "summary.json").write_text(text)
    meta = {"config": dataclasses.asdict(cfg), "wall_time_s": wall, "version": version_string()}
    (out / "run.json").write_text(json.dumps(_plain(meta), indent=2, sort_keys=True) + "\n")
    files = sorted(p.name for p in out.iterdir() if p.is_file())
    return RunResult(out, _plain(summary), wall, files)


# ---------------------------------------------------------------- CLI

def load_toml(path: str | os.PathLike) -> dict:
    """Flat experiment table: top-level keys or a single ``[experiment]`` table."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    if isinstance(data.get("experiment"), dict):
        table = dict(data["experiment"])
        if "name" in table:
            table["experiment"] = table.pop("name")
        return table
    return data


_FIELD_TYPES = {"n": int, "trials": int, "k": int, "trial_cap": int, "path_cap": int,
                "min_events": int, "save_paths": int, "seed": int, "workers": int,
                "M": float, "alpha": float, "grid_step": float, "law": str, "out": str}
_LIST_TYPES = {"n_list": int, "M_list": float, "delta_list": float, "xs": float}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="python -m unitroots",
                                description="Run a named random-polynomial experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="TOML file with a flat experiment table")
    for name, typ in _FIELD_TYPES.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ, default=None)
    for name, typ in _LIST_TYPES.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ, nargs="+", default=None)
    return p


def config_from_args(argv: Sequence[str] | None = None) -> ExperimentConfig:
    """Merge TOML file, ``UNITROOTS_OUT`` and command-line flags (in that order)."""
    args = _parser().parse_args(argv)
    values: dict[str, Any] = {}
    if args.config:
        values.update(load_toml(args.config))
        file_exp = values.pop("experiment", args.experiment)
        if file_exp != args.experiment:
            raise ConfigError([f"config file is for {file_exp!r}, not {args.experiment!r}"])
    if os.environ.get(OUT_ENV):
        values["out"] = os.environ[OUT_ENV]
    for name in list(_FIELD_TYPES) + list(_LIST_TYPES):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError([f"unknown config key {k!r}" for k in unknown])
    values.setdefault("workers", 1)
    values.setdefault("out", "results")
    return ExperimentConfig(experiment=args.experiment, **values)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = validate(config_from_args(argv))
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except Exception as exc:  # noqa: BLE001 - any failure maps to the runtime exit code
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{cfg.experiment}: wrote {', '.join(result.files)} to {result.out} "
          f"in {result.wall_time:.1f} s")
    return EXIT_OK
