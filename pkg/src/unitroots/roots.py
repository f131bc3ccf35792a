"""Real roots of ``f_n`` in the rescaled windows around +1 and -1.

Windows are scanned on a lattice of step ``grid_step`` with values and first
derivatives. Each cell is classified with the cubic Hermite interpolant of
its end data: cells whose interpolant stays well away from zero hold no root,
cells with a clean sign change hold exactly one, and everything else
(interpolant dipping through zero, or a value and slope both small) is
re-sampled at ten times the resolution with direct evaluation. Cells still
ambiguous after that are reported as unresolved rather than guessed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import (CoefficientLaw, PolynomialSample, EvaluationOverflow, compensated_horner,
                    sample_coefficient_matrix, scale_factor, scaled_basis)

X_TOL = 1e-10
GRID_STEP = 1e-2
VALUE_TOL = 1e-8
SUBSAMPLE = 10
MAX_EXACT_DEGREE = 200

# largest basis block (grid nodes x coefficients) built at once
_BASIS_BLOCK = 1 << 22


@dataclass(frozen=True)
class RootPointSet:
    """Rescaled real roots of one polynomial in one window.

    ``points`` are sorted rescaled locations ``x`` in ``[-M, M]``; ``certified``
    marks points whose bracket has width at most the bisection tolerance and
    whose value is within ``value_tol`` of zero relative to ``Var g_n(x)``.
    ``unresolved`` lists cells where a tangency could not be decided.
    """

    side: int
    points: np.ndarray
    M: float
    n: int
    certified: np.ndarray
    trial: int = -1
    unresolved: tuple = ()

    def __post_init__(self):
        if self.points.size > 1 and np.any(np.diff(self.points) <= 0):
            raise ValueError("points must be strictly increasing")
        if self.certified.shape != self.points.shape:
            raise ValueError("certified flags must match points")

    def count(self, a: float, b: float) -> int:
        """Number of points in the closed interval ``[a, b]``."""
        return int(np.count_nonzero((self.points >= a) & (self.points <= b)))

    @property
    def flagged(self) -> bool:
        return bool(self.unresolved)


def window_grid(M: float, step: float = GRID_STEP) -> np.ndarray:
    """Nodes ``k * step`` inside ``[-M, M]`` plus the endpoints ``+-M``.

    Nodes do not depend on ``M`` beyond the end cells, so windows nest.
    """
    if not (M > 0 and math.isfinite(M)):
        raise ValueError("window half-width must be positive and finite")
    if not step > 0:
        raise ValueError("grid step must be positive")
    k = int(math.floor(M / step + 1e-9))
    inner = np.arange(-k, k + 1) * step
    if M - k * step > 1e-12 * max(M, 1.0):
        return np.concatenate(([-M], inner, [M]))
    inner[0], inner[-1] = -M, M
    return inner


# ---------------------------------------------------------------- cell analysis

def hermite_cells(v0, v1, d0, d1, h):
    """Classify cells by the cubic Hermite interpolant of their end data.

    Returns ``(count, crit_min, u_crit)``: the number of sign changes of the
    interpolant strictly inside each cell, the smallest ``|p|`` at an interior
    critical point (``inf`` if none), and the two critical points in local
    coordinates ``u in [0, 1]`` (``nan`` if outside).
    """
    a1 = h * d0
    a2 = -3.0 * v0 - 2.0 * h * d0 + 3.0 * v1 - h * d1
    a3 = 2.0 * v0 + h * d0 - 2.0 * v1 + h * d1
    qa, qb, qc = 3.0 * a3, 2.0 * a2, a1
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        disc = qb * qb - 4.0 * qa * qc
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (qb + np.copysign(root, qb))
        r1 = q / qa
        r2 = qc / q
        lin = qa == 0
        r1 = np.where(lin, -qc / qb, r1)
        r2 = np.where(lin, np.nan, r2)
    crit = []
    for r in (np.fmin(r1, r2), np.fmax(r1, r2)):
        inside = (r > 0) & (r < 1)
        crit.append(np.where(inside, r, np.nan))

    def cubic(u):
        return v0 + u * (a1 + u * (a2 + u * a3))

    seq = [v0]
    crit_min = np.full(np.shape(v0), np.inf)
    for u in crit:
        ok = ~np.isnan(u)
        pu = np.where(ok, cubic(np.where(ok, u, 0.0)), v0)
        crit_min = np.where(ok, np.minimum(crit_min, np.abs(pu)), crit_min)
        seq.append(pu)
    seq.append(v1)
    count = np.zeros(np.shape(v0), dtype=np.int64)
    last = np.sign(seq[0])
    for val in seq[1:]:
        s = np.sign(val)
        count += (s != 0) & (last != 0) & (s != last)
        last = np.where(s != 0, s, last)
    return count, crit_min, np.stack(crit)


def curvature_bound(d, h):
    # 2 x largest mean |g''| over the cell and its two neighbours
    c = np.abs(np.diff(d, axis=-1)) / h
    padded = np.pad(c, [(0, 0)] * (c.ndim - 1) + [(1, 1)], mode="edge")
    return 2.0 * np.maximum(np.maximum(padded[..., :-2], padded[..., 1:-1]), padded[..., 2:])


@dataclass
class CellAnalysis:
    """Hermite analysis restricted to the cells that can hold a root.

    On a cell with end values of one sign, the Hermite basis gives
    ``|p| >= min(|v0|, |v1|) - (4/27) h (|d0| + |d1|)``, so cells where that
    bound clears the tangency margin have no root and are skipped.
    """

    index: tuple            # (row, cell) indices of analysed cells
    count: np.ndarray       # interpolant sign changes inside each analysed cell
    crit_min: np.ndarray
    u_crit: np.ndarray
    margin: np.ndarray
    near_node: np.ndarray


def analyse_cells(v, d, xs) -> CellAnalysis:
    """Run :func:`hermite_cells` on the candidate cells of ``(T, G)`` data."""
    h = np.broadcast_to(np.diff(xs), v[:, 1:].shape)
    v0, v1 = v[:, :-1], v[:, 1:]
    d0, d1 = d[:, :-1], d[:, 1:]
    kappa = curvature_bound(d, h)
    margin = kappa * h * h / 8.0
    low = np.minimum(np.abs(v0), np.abs(v1))
    cand = (np.sign(v0) * np.sign(v1) <= 0) | (low <= (4.0 / 27.0) * h * (np.abs(d0) + np.abs(d1)) + margin)
    cand |= ~np.isfinite(v0) | ~np.isfinite(v1)
    idx = np.nonzero(cand)
    m = margin[idx]
    k = kappa[idx] * h[idx]
    near = ((np.abs(v0[idx]) <= m) & (np.abs(d0[idx]) <= k)) | \
           ((np.abs(v1[idx]) <= m) & (np.abs(d1[idx]) <= k))
    count, crit_min, u_crit = hermite_cells(v0[idx], v1[idx], d0[idx], d1[idx], h[idx])
    return CellAnalysis(idx, count, crit_min, u_crit, m, near)


def classify_cells(v, d, xs):
    """Split cells into clean brackets and cells needing a closer look.

    ``v`` and ``d`` have shape ``(T, G)``; ``xs`` holds the ``G`` nodes (or
    one row of nodes per trial). Returns ``(bracket, suspicious)`` boolean
    masks of shape ``(T, G - 1)``.
    """
    cells = analyse_cells(v, d, xs)
    idx = cells.index
    change = np.sign(v[:, :-1]) * np.sign(v[:, 1:]) < 0
    susp = (cells.crit_min <= cells.margin) | (cells.count >= 2) | cells.near_node
    susp |= ~np.isfinite(v[:, :-1][idx]) | ~np.isfinite(v[:, 1:][idx])
    suspicious = np.zeros(change.shape, dtype=bool)
    suspicious[idx] = susp
    return change & ~suspicious, suspicious


# ---------------------------------------------------------------- evaluation

def _scan_values(coeffs, n, side, xs):
    """Values and first derivatives on ``xs`` for every coefficient row."""
    t = coeffs.shape[0]
    v = np.empty((t, xs.size))
    d = np.empty((t, xs.size))
    block = max(1, _BASIS_BLOCK // (n + 1))
    cf = coeffs.astype(float, copy=False)
    # unnormalized bases: sums of integer coefficients stay exact at x = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, xs.size, block):
            part = xs[lo:lo + block]
            v[:, lo:lo + block] = cf @ scaled_basis(n, part, side, 0, normalized=False).T
            d[:, lo:lo + block] = cf @ scaled_basis(n, part, side, 1, normalized=False).T
    if not (np.isfinite(v).all() and np.isfinite(d).all()):
        raise EvaluationOverflow(f"window too wide for double precision at n={n}")
    v *= scale_factor(n, side, 0)
    d *= scale_factor(n, side, 1)
    return v, d


def _direct(coeff_rows, n, side, x, order=0):
    # row-wise evaluation at one point per row
    basis = scaled_basis(n, x, side, order, normalized=False)
    raw = np.einsum("ij,ij->i", coeff_rows.astype(float, copy=False), basis)
    return raw * scale_factor(n, side, order)


def _scale(n, x):
    """Standard deviation of ``g_n(x)`` for unit-variance coefficients."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = 2.0 * np.log(np.abs(1.0 + x / n))
        ratio = np.expm1((n + 1) * lq) / np.expm1(lq)
    ratio = np.where(lq == 0, n + 1.0, ratio)
    return np.sqrt(ratio / n)


@dataclass
class Scan:
    """Outcome of scanning a batch of polynomials over one window."""

    rows: np.ndarray        # coefficient row of each bracket
    lo: np.ndarray
    hi: np.ndarray
    zero_rows: np.ndarray   # roots sitting exactly on a node
    zero_x: np.ndarray
    flag_rows: np.ndarray   # unresolved cells
    flag_lo: np.ndarray
    flag_hi: np.ndarray


def _resolve(coeffs, n, side, rows, lo, hi, depth=1):
    """Re-sample suspicious cells at ``SUBSAMPLE`` times the resolution.

    Returns ``(bracket rows, lo, hi, zero rows, zero x, flag rows, flag lo,
    flag hi)``. Sub-cells that stay suspicious are refined once more while
    ``depth > 0`` and flagged after that; a sign change is kept as a bracket
    even when flagged, since at least one root is certain.
    """
    if rows.size == 0:
        ei, ef = np.empty(0, dtype=np.int64), np.empty(0)
        return ei, ef, ef, ei, ef, ei, ef, ef
    u = np.linspace(0.0, 1.0, SUBSAMPLE + 1)
    sub = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    sub[:, -1] = hi
    rep = coeffs[np.repeat(rows, SUBSAMPLE + 1)]
    v = _direct(rep, n, side, sub.ravel(), 0).reshape(sub.shape)
    d = _direct(rep, n, side, sub.ravel(), 1).reshape(sub.shape)
    bracket, susp = classify_cells(v, d, sub)
    change = np.sign(v[:, :-1]) * np.sign(v[:, 1:]) < 0

    br, bc = np.nonzero(bracket)
    # interior nodes only; the cell ends belong to the caller
    zr, zc = np.nonzero(v[:, 1:-1] == 0)
    zc = zc + 1
    sr, sc = np.nonzero(susp)
    out = [rows[br], sub[br, bc], sub[br, bc + 1], rows[zr], sub[zr, zc]]
    if depth > 0:
        more = _resolve(coeffs, n, side, rows[sr], sub[sr, sc], sub[sr, sc + 1], depth - 1)
        for i in range(5):
            out[i] = np.concatenate([out[i], more[i]])
        return (*out, *more[5:])
    keep = change[sr, sc]
    out[0] = np.concatenate([out[0], rows[sr[keep]]])
    out[1] = np.concatenate([out[1], sub[sr[keep], sc[keep]]])
    out[2] = np.concatenate([out[2], sub[sr[keep], sc[keep] + 1]])
    return (*out, rows[sr], sub[sr, sc], sub[sr, sc + 1])


def scan_window(coeffs: np.ndarray, n: int, side: int, xs: np.ndarray) -> Scan:
    """Bracket every root of each row's rescaled polynomial on the nodes ``xs``."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    coeffs = np.atleast_2d(coeffs)
    # bound on log |f'| over the window: sum |c| * n * max|z|^n
    reach = float(np.max(np.abs(1.0 + xs / n)))
    log_bound = math.log(max(float(np.abs(coeffs).sum(axis=1).max()), 1.0)) + math.log(n + 1) \
        + n * math.log(max(reach, 1.0))
    if log_bound > 700.0:
        raise EvaluationOverflow(f"window too wide for double precision at n={n}")
    v, d = _scan_values(coeffs, n, side, xs)
    bracket, susp = classify_cells(v, d, xs)
    br, bc = np.nonzero(bracket)
    zr, zc = np.nonzero(v == 0)
    tang = (d[zr, zc] == 0)
    sr, sc = np.nonzero(susp)
    # a suspicious cell next to a node zero would double count that zero
    res = _resolve(coeffs, n, side, sr, xs[sc], xs[sc + 1])
    fr = np.concatenate([res[5], zr[tang]])
    flo = np.concatenate([res[6], xs[zc[tang]]])
    fhi = np.concatenate([res[7], xs[zc[tang]]])
    return Scan(np.concatenate([br, res[0]]), np.concatenate([xs[bc], res[1]]),
                np.concatenate([xs[bc + 1], res[2]]),
                np.concatenate([zr, res[3]]), np.concatenate([xs[zc], res[4]]),
                fr, flo, fhi)


def bisect_brackets(coeffs, n, side, rows, lo, hi, x_tol=X_TOL):
    """Bisection on all brackets at once; returns final ``(lo, hi)``."""
    lo = lo.copy()
    hi = hi.copy()
    if rows.size == 0:
        return lo, hi
    sub = coeffs[rows]
    s_lo = np.sign(_direct(sub, n, side, lo))
    for _ in range(200):
        live = (hi - lo) > x_tol
        if not live.any():
            break
        idx = np.flatnonzero(live)
        mid = 0.5 * (lo[idx] + hi[idx])
        s_mid = np.sign(_direct(sub[idx], n, side, mid))
        exact = s_mid == 0
        left = (s_mid != s_lo[idx]) & ~exact
        hi[idx[left]] = mid[left]
        right = ~left & ~exact
        lo[idx[right]] = mid[right]
        lo[idx[exact]] = mid[exact]
        hi[idx[exact]] = mid[exact]
    return lo, hi


# ---------------------------------------------------------------- public API

def _point_sets(coeffs, n, side, M, scan, x_tol, value_tol, trials):
    lo, hi = bisect_brackets(coeffs, n, side, scan.rows, scan.lo, scan.hi, x_tol)
    rows = np.concatenate([scan.rows, scan.zero_rows])
    pts = np.concatenate([0.5 * (lo + hi), scan.zero_x])
    width_ok = np.concatenate([(hi - lo) <= x_tol, np.ones(scan.zero_x.size, dtype=bool)])
    if rows.size:
        val = compensated_horner(coeffs[rows], side * (1.0 + pts / n)) / math.sqrt(n)
        cert = width_ok & (np.abs(val) <= value_tol * _scale(n, pts))
    else:
        cert = width_ok
    order = np.lexsort((pts, rows))
    rows, pts, cert = rows[order], pts[order], cert[order]
    starts = np.searchsorted(rows, np.arange(coeffs.shape[0] + 1))
    out = []
    for row in range(coeffs.shape[0]):
        p_row = pts[starts[row]:starts[row + 1]]
        c_row = cert[starts[row]:starts[row + 1]]
        if p_row.size > 1:
            keep = np.concatenate(([True], np.diff(p_row) > 0))
            p_row, c_row = p_row[keep], c_row[keep]
        fsel = scan.flag_rows == row
        flags = tuple(sorted(zip(scan.flag_lo[fsel].tolist(), scan.flag_hi[fsel].tolist())))
        out.append(RootPointSet(side, p_row, float(M), n, c_row, trials[row], flags))
    return out


def find_window_roots(p: PolynomialSample, side: int, M: float, *, grid_step: float = GRID_STEP,
                      x_tol: float = X_TOL, value_tol: float = VALUE_TOL) -> RootPointSet:
    """All roots of ``g_n`` (side +1) or ``h_n`` (side -1) in ``[-M, M]``.

    Parameters
    ----------
    p : PolynomialSample
    side : {+1, -1}
    M : float
        Window half-width. Windows with ``M >= n`` are accepted; there
        ``1 + x/n`` changes sign and ``x`` is just the window coordinate.
    grid_step : float
        Scan lattice spacing.
    x_tol : float
        Final bracket width of the bisection.
    value_tol : float
        Certification threshold on ``|g_n(x)| / sd(g_n(x))``.
    """
    xs = window_grid(M, grid_step)
    coeffs = p.coefficients[None, :]
    scan = scan_window(coeffs, p.n, side, xs)
    return _point_sets(coeffs, p.n, side, M, scan, x_tol, value_tol, [p.trial])[0]


def scaled_root_ensemble(n: int, law: "str | CoefficientLaw", trials: int | Iterable[int], M: float,
                         sides: Sequence[int] = (1, -1), *, seed: int, grid_step: float = GRID_STEP,
                         x_tol: float = X_TOL, value_tol: float = VALUE_TOL,
                         batch: int = 1024) -> list[RootPointSet]:
    """Window roots for many polynomials, ordered by trial then side."""
    trial_ids = list(range(trials)) if isinstance(trials, int) else list(trials)
    xs = window_grid(M, grid_step)
    out = []
    for start in range(0, len(trial_ids), batch):
        ids = trial_ids[start:start + batch]
        coeffs = sample_coefficient_matrix(n, law, seed, ids)
        per_side = []
        for side in sides:
            scan = scan_window(coeffs, n, side, xs)
            per_side.append(_point_sets(coeffs, n, side, M, scan, x_tol, value_tol, ids))
        for i in range(len(ids)):
            out.extend(ps[i] for ps in per_side)
    return out


@dataclass
class WindowCounts:
    """Root counts per trial and interval, without locating the roots."""

    counts: np.ndarray       # (trials, intervals)
    flagged: np.ndarray      # (trials,) number of unresolved cells
    intervals: list = field(default_factory=list)


def count_window_roots(coeffs: np.ndarray, n: int, side: int,
                       intervals: Sequence[tuple[float, float]], *,
                       grid_step: float = GRID_STEP, x_tol: float = X_TOL) -> WindowCounts:
    """Count roots in closed intervals for each coefficient row.

    Brackets lying inside or outside an interval are decided without
    refinement; only brackets straddling an interval end are bisected.
    """
    intervals = [(float(a), float(b)) for a, b in intervals]
    M = max(max(max(abs(a), abs(b)) for a, b in intervals), grid_step)
    xs = window_grid(M, grid_step)
    coeffs = np.atleast_2d(coeffs)
    scan = scan_window(coeffs, n, side, xs)
    t = coeffs.shape[0]
    counts = np.zeros((t, len(intervals)), dtype=np.int64)
    tol = 1e-12 * max(M, 1.0)
    ends = np.array([e for iv in intervals for e in iv])
    straddle = np.zeros(scan.rows.size, dtype=bool)
    for e in ends:
        straddle |= (scan.lo < e - tol) & (scan.hi > e + tol)
    lo, hi = scan.lo.copy(), scan.hi.copy()
    if straddle.any():
        idx = np.flatnonzero(straddle)
        blo, bhi = bisect_brackets(coeffs, n, side, scan.rows[idx], lo[idx], hi[idx], x_tol)
        lo[idx] = hi[idx] = 0.5 * (blo + bhi)
    for j, (a, b) in enumerate(intervals):
        inside = (lo >= a - tol) & (hi <= b + tol)
        counts[:, j] += np.bincount(scan.rows[inside], minlength=t)
        zin = (scan.zero_x >= a) & (scan.zero_x <= b)
        counts[:, j] += np.bincount(scan.zero_rows[zin], minlength=t)
    flagged = np.bincount(scan.flag_rows, minlength=t)
    return WindowCounts(counts, flagged, intervals)


# ---------------------------------------------------------------- exact counting

def _trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _content(p: list[int]) -> int:
    return math.gcd(*p)


def _primitive(p: list[int]) -> list[int]:
    g = _content(p)
    return [c // g for c in p] if g > 1 else p


def _derivative(p: list[int]) -> list[int]:
    return [k * p[k] for k in range(1, len(p))]


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder ``lc(b)^(deg a - deg b + 1) a mod b`` (low-to-high lists)."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    delta = len(a) - len(b) + 1
    while len(r) - 1 >= db and r:
        lr = r.pop()
        shift = len(r) - db
        if lb != 1:
            r = [c * lb for c in r]
        for k in range(db):
            r[shift + k] -= lr * b[k]
        delta -= 1
        _trim(r)
    if delta > 0 and lb != 1:
        f = lb ** delta
        r = [c * f for c in r]
    return r


def _exact_quotient(a: list[int], b: list[int]) -> list[int]:
    # a / b over Q, scaled to an integer primitive polynomial
    num = [Fraction(c) for c in a]
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    for k in range(len(q) - 1, -1, -1):
        q[k] = num[k + len(b) - 1] / b[-1]
        for j, c in enumerate(b):
            num[k + j] -= q[k] * c
    den = 1
    for c in q:
        den = den * c.denominator // math.gcd(den, c.denominator)
    return _primitive([int(c * den) for c in q])


def sturm_chain(p: list[int]) -> list[list[int]]:
    """Sturm sequence with each member reduced to its primitive part.

    Pseudo-remainders carry the factor ``lc^k``; its sign is undone so the
    sign pattern matches the classical chain.
    """
    chain = [p, _primitive(_derivative(p))]
    while len(chain[-1]) > 1:
        a, b = chain[-2], chain[-1]
        k = len(a) - len(b) + 1
        r = _trim(_prem(a, b))
        if not r:
            break
        sign = -1 if (b[-1] < 0 and k % 2 == 1) else 1
        chain.append([-sign * c for c in _primitive(r)])
    return chain


def _sign_at(p: list[int], x) -> int:
    if x == math.inf or x == -math.inf:
        lead = p[-1]
        deg = len(p) - 1
        neg = x < 0 and deg % 2 == 1
        return (-1 if lead < 0 else 1) * (-1 if neg else 1)
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    deg = len(p) - 1
    total = 0
    for k, c in enumerate(p):
        total += c * num ** k * den ** (deg - k)
    return (total > 0) - (total < 0)


def _variations(chain, x) -> int:
    signs = [s for s in (_sign_at(q, x) for q in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots_exact(coeffs: Sequence[int], interval: tuple | None = None) -> int:
    """Exact number of distinct real roots of ``sum_k coeffs[k] z^k``.

    Parameters
    ----------
    coeffs : sequence of int
        Coefficients from the constant term up.
    interval : (a, b), optional
        Restrict to the closed interval ``[a, b]``; ends may be floats,
        Fractions or infinities. Defaults to the whole line.
    """
    p = []
    for c in coeffs:
        if isinstance(c, (float, np.floating)) and not float(c).is_integer():
            raise ValueError("exact counting needs integer coefficients")
        p.append(int(c))
    _trim(p)
    if not p:
        raise ValueError("zero polynomial")
    if len(p) - 1 > MAX_EXACT_DEGREE:
        raise ValueError(f"degree {len(p) - 1} exceeds {MAX_EXACT_DEGREE}")
    if len(p) == 1:
        return 0
    # the classical chain of p counts distinct roots as long as the ends are
    # not multiple roots; only then is the square-free part needed
    chain = sturm_chain(_primitive(p))
    a, b = (-math.inf, math.inf) if interval is None else interval
    if a > b:
        return 0
    last = chain[-1]
    if len(last) > 1 and any(e not in (-math.inf, math.inf) and _sign_at(last, e) == 0 for e in (a, b)):
        sqfree = _exact_quotient(p, _primitive(last))
        if len(sqfree) == 1:
            return 0
        chain = sturm_chain(sqfree)
    n_roots = _variations(chain, a) - _variations(chain, b)
    # Sturm counts (a, b]; add a root sitting exactly on a
    if a != -math.inf and _sign_at(chain[0], a) == 0:
        n_roots += 1
    return n_roots
