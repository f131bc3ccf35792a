"""Sample paths of the limit process ``g`` on a grid and their zeros."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg

from .kernel import cov
from .model import stream
from .roots import RootPointSet, analyse_cells

# substream of the limit-path generator (coefficients use 0)
PATH_STREAM = 1

# paths drawn from one counter block; fixed so results never depend on how
# trials are split into calls
PATH_BLOCK = 4096

JITTER = 1e-12
MAX_ESCALATIONS = 3


class FactorizationError(np.linalg.LinAlgError):
    """The Gram matrix stayed indefinite after all jitter escalations."""


@dataclass(frozen=True)
class GridSpec:
    """Symmetric lattice ``k * step``, ``|k| <= M / step``."""

    M: float
    step: float
    include_derivative: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.M >= 0:
            raise ValueError("M must be non-negative")
        k = self.M / self.step
        if abs(k - round(k)) > 1e-9 * max(k, 1.0):
            raise ValueError("M / step must be an integer")

    @property
    def half_count(self) -> int:
        return int(round(self.M / self.step))

    @property
    def nodes(self) -> np.ndarray:
        k = self.half_count
        return np.arange(-k, k + 1) * self.step

    @property
    def orders(self) -> tuple[int, ...]:
        return (0, 1) if self.include_derivative else (0,)

    @property
    def dim(self) -> int:
        return self.nodes.size * len(self.orders)


@dataclass(frozen=True)
class PathSample:
    """One realization of ``g`` (and ``g'``) on the nodes of ``grid``."""

    grid: GridSpec
    values: np.ndarray
    derivatives: np.ndarray | None = None
    path_id: int = -1

    def __post_init__(self):
        size = self.grid.nodes.size
        if self.values.shape != (size,):
            raise ValueError("values do not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")
        if self.derivatives is not None and self.derivatives.shape != (size,):
            raise ValueError("derivatives do not match the grid")


def gram_matrix(points: Sequence[float], orders: Sequence[int] = (0,)) -> np.ndarray:
    """Covariance of ``(g^(o)(x))`` over ``x in points`` (outer) and ``o in orders``.

    Raises ``ValueError`` for repeated points, where the matrix is singular
    by construction.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise ValueError("need a non-empty list of points")
    if np.unique(pts).size != pts.size:
        raise ValueError("duplicate points make the Gram matrix singular")
    orders = list(orders)
    x = np.repeat(pts, len(orders))
    o = np.tile(orders, pts.size)
    out = np.empty((x.size, x.size))
    for a in set(orders):
        for b in set(orders):
            ia, ib = np.flatnonzero(o == a), np.flatnonzero(o == b)
            out[np.ix_(ia, ib)] = cov(a, b, x[ia][:, None], x[ib][None, :])
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class Factor:
    """``Sigma ~ (d L)(d L)^T`` with ``d`` the standard deviations."""

    lower: np.ndarray
    scale: np.ndarray
    jitter: float


_FACTOR_CACHE: dict = {}


def factor_grid(grid: GridSpec) -> Factor:
    """Jittered Cholesky factor of the grid's Gram matrix (cached).

    The matrix is first scaled to unit diagonal, so the jitter
    ``1e-12 * trace / dim`` is the same relative size at every node even
    though ``Var g(x) = I_0(2x)`` spans many orders of magnitude.
    """
    key = (grid.M, grid.step, grid.include_derivative)
    if key in _FACTOR_CACHE:
        return _FACTOR_CACHE[key]
    sigma = gram_matrix(grid.nodes, grid.orders)
    scale = np.sqrt(np.diag(sigma))
    corr = sigma / np.outer(scale, scale)
    jitter = JITTER * np.trace(corr) / corr.shape[0]
    for _ in range(MAX_ESCALATIONS + 1):
        try:
            lower = linalg.cholesky(corr + jitter * np.eye(corr.shape[0]), lower=True)
            break
        except linalg.LinAlgError:
            jitter *= 10.0
    else:
        raise FactorizationError(f"Cholesky failed with jitter up to {jitter / 10.0:.1e}")
    fac = Factor(lower, scale, jitter)
    _FACTOR_CACHE[key] = fac
    return fac


def sample_path_matrix(grid: GridSpec, trials: Iterable[int] | range, seed: int,
                       substream: int = PATH_STREAM) -> tuple[np.ndarray, np.ndarray | None]:
    """Values (and derivatives) for the given path ids, one row per path.

    Path ``i`` uses row ``i % PATH_BLOCK`` of the normals drawn for block
    ``i // PATH_BLOCK``, so a path is the same whichever call produces it.
    """
    ids = np.asarray(list(trials) if not isinstance(trials, range) else trials, dtype=np.int64)
    fac = factor_grid(grid)
    dim = fac.lower.shape[0]
    out = np.empty((ids.size, dim))
    blocks = ids // PATH_BLOCK
    for b in np.unique(blocks):
        sel = np.flatnonzero(blocks == b)
        rows = ids[sel] % PATH_BLOCK
        # only draw up to the last needed row; a prefix of the block's normals
        z = stream(seed, int(b), substream).standard_normal((int(rows.max()) + 1, dim))
        out[sel] = (z[rows] @ fac.lower.T) * fac.scale
    k = len(grid.orders)
    values = out[:, 0::k]
    derivs = out[:, 1::k] if grid.include_derivative else None
    return np.ascontiguousarray(values), (None if derivs is None else np.ascontiguousarray(derivs))


def sample_paths(grid: GridSpec, count: int, seed: int, *, start: int = 0,
                 substream: int = PATH_STREAM) -> list[PathSample]:
    """``count`` independent paths with ids ``start .. start + count - 1``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    values, derivs = sample_path_matrix(grid, range(start, start + count), seed, substream)
    return [PathSample(grid, values[i], None if derivs is None else derivs[i], start + i)
            for i in range(count)]


def _cubic_roots(v0, v1, d0, d1, h, u_crit):
    """Roots of each cell's Hermite cubic, by bisection on its monotone pieces."""
    a1 = h * d0
    a2 = -3.0 * v0 - 2.0 * h * d0 + 3.0 * v1 - h * d1
    a3 = 2.0 * v0 + h * d0 - 2.0 * v1 + h * d1

    def cubic(u):
        return v0 + u * (a1 + u * (a2 + u * a3))

    cuts = np.vstack([np.zeros_like(v0), np.fmin(u_crit[0], 1.0), np.fmin(u_crit[1], 1.0),
                      np.ones_like(v0)])
    # unused critical points collapse onto the previous cut
    cuts[1] = np.where(np.isnan(cuts[1]), 0.0, cuts[1])
    cuts[2] = np.where(np.isnan(cuts[2]), cuts[1], cuts[2])
    found_cell, found_u = [], []
    for piece in range(3):
        lo, hi = cuts[piece].copy(), cuts[piece + 1].copy()
        flo, fhi = cubic(lo), cubic(hi)
        live = (flo * fhi < 0) & (hi > lo)
        idx = np.flatnonzero(live)
        if idx.size == 0:
            continue
        lo, hi, flo = lo[idx], hi[idx], flo[idx]
        sub = (v0[idx], a1[idx], a2[idx], a3[idx])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = sub[0] + mid * (sub[1] + mid * (sub[2] + mid * sub[3]))
            left = np.sign(fm) != np.sign(flo)
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fm)
        found_cell.append(idx)
        found_u.append(0.5 * (lo + hi))
    if not found_cell:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate(found_cell), np.concatenate(found_u)


def _path_cells(values, derivs, xs):
    """Hermite root count per cell and the cells flagged as grazing zero."""
    cells = analyse_cells(values, derivs, xs)
    per_cell = np.zeros((values.shape[0], xs.size - 1), dtype=np.int64)
    per_cell[cells.index] = cells.count
    graze = ((cells.crit_min <= cells.margin) & (cells.count % 2 == 0)) | (cells.count == 3)
    return cells, per_cell, graze


def roots_of_path(path: PathSample) -> RootPointSet:
    """Zeros of one path as a :class:`RootPointSet` (``n = 0`` marks the limit).

    Without derivatives each sign change gives one root by linear
    interpolation. With derivatives every cell is replaced by its cubic
    Hermite interpolant, whose roots are all reported, including pairs
    hidden between two nodes of equal sign; cells where the interpolant
    grazes zero are listed as unresolved.
    """
    xs = path.grid.nodes
    v = path.values
    zeros = xs[v == 0]
    if path.derivatives is None:
        v0, v1 = v[:-1], v[1:]
        idx = np.flatnonzero(v0 * v1 < 0)
        pts = xs[idx] - v0[idx] * (xs[idx + 1] - xs[idx]) / (v1[idx] - v0[idx])
        flags = ()
    else:
        d = path.derivatives
        cells, _, graze = _path_cells(v[None, :], d[None, :], xs)
        c = cells.index[1]
        h = xs[c + 1] - xs[c]
        which, u = _cubic_roots(v[c], v[c + 1], d[c], d[c + 1], h, cells.u_crit)
        pts = xs[c[which]] + u * h[which]
        flags = tuple((float(xs[i]), float(xs[i + 1])) for i in c[graze])
    pts = np.unique(np.concatenate([pts, zeros]))
    return RootPointSet(1, pts, float(path.grid.M), 0, np.ones(pts.size, dtype=bool),
                        path.path_id, flags)


def count_path_roots(values: np.ndarray, derivs: np.ndarray | None, xs: np.ndarray,
                     intervals: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Zero counts per path and closed interval; interval ends must be nodes.

    Returns ``(counts, flagged)`` with shapes ``(paths, intervals)`` and
    ``(paths,)``.
    """
    if derivs is None:
        per_cell = (values[:, :-1] * values[:, 1:] < 0).astype(np.int64)
        flagged = np.zeros(values.shape[0], dtype=np.int64)
    else:
        cells, per_cell, graze = _path_cells(values, derivs, xs)
        flagged = np.bincount(cells.index[0][graze], minlength=values.shape[0])
    tol = 1e-9 * np.max(np.abs(xs))
    counts = np.empty((values.shape[0], len(intervals)), dtype=np.int64)
    for j, (a, b) in enumerate(intervals):
        for e in (a, b):
            if np.min(np.abs(xs - e)) > tol:
                raise ValueError(f"interval end {e} is not a grid node")
        cells = (xs[:-1] >= a - tol) & (xs[1:] <= b + tol)
        nodes = (xs >= a - tol) & (xs <= b + tol)
        counts[:, j] = per_cell[:, cells].sum(axis=1) + (values[:, nodes] == 0).sum(axis=1)
    return counts, flagged


def path_root_counts(grid: GridSpec, trials: Iterable[int] | range, seed: int,
                     intervals: Sequence[tuple[float, float]], *, substream: int = PATH_STREAM,
                     chunk: int = PATH_BLOCK) -> tuple[np.ndarray, np.ndarray]:
    """:func:`count_path_roots` over many paths, sampled a chunk at a time."""
    ids = np.asarray(list(trials) if not isinstance(trials, range) else trials, dtype=np.int64)
    counts = np.empty((ids.size, len(intervals)), dtype=np.int64)
    flagged = np.empty(ids.size, dtype=np.int64)
    xs = grid.nodes
    for lo in range(0, ids.size, chunk):
        part = ids[lo:lo + chunk]
        values, derivs = sample_path_matrix(grid, part, seed, substream)
        counts[lo:lo + part.size], flagged[lo:lo + part.size] = \
            count_path_roots(values, derivs, xs, intervals)
    return counts, flagged
