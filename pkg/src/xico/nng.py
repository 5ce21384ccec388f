"""Directed nearest-neighbor graphs with reproducible uniform tie-breaking.

Every node ``i`` points at one other node ``nn[i]`` that minimizes the
Euclidean distance from point ``i``. When ``m > 1`` nodes share the minimum,
the candidates are sorted by index and the one at position
``floor(u[i] * m)`` is taken, so the result depends only on the points and
the pre-drawn uniforms, never on search order.

Indices are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, FewerThanTwoPoints
from .ranks import RankVectors

BRUTE_FORCE_MAX_N = 256
KDTREE_MAX_D = 16
_FLOAT_MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class NngGraph:
    nn: np.ndarray
    tie_draws: np.ndarray
    tie_counts: np.ndarray
    metric_space: str  # "rank" or "raw"

    @property
    def n(self) -> int:
        return self.nn.shape[0]

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.nn, minlength=self.n)


@dataclass(frozen=True)
class GraphFunctionals:
    """``t_sum`` counts ordered mutual pairs; ``c_sum`` counts ordered
    pairs ``(i, j)``, ``i != j``, that point at the same node."""

    t_sum: int
    c_sum: int
    n: int

    @property
    def t_mean(self) -> float:
        return self.t_sum / self.n

    @property
    def c_mean(self) -> float:
        return self.c_sum / self.n


def draw_ties(n: int, seed=None) -> np.ndarray:
    """The tie-break uniforms ``U_1..U_n`` for a seed, SeedSequence or Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.random(n)


def _coerce_points(points):
    if isinstance(points, RankVectors):
        return np.asarray(points.counts, dtype=np.int64), "rank"
    arr = np.asarray(points)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"points must be (n, d), got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64), "raw"
    return arr.astype(float), "raw"


def _sq_dist(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # coordinate-sequential accumulation keeps float results identical on
    # every code path, which exact tie detection relies on
    out = (p[..., 0] - q[..., 0]) ** 2
    for j in range(1, p.shape[-1]):
        out = out + (p[..., j] - q[..., j]) ** 2
    return out


def _sentinel(dtype):
    return np.iinfo(np.int64).max if np.issubdtype(dtype, np.integer) else np.inf


def _pick(cand_idx: np.ndarray, cand_mask: np.ndarray, u: np.ndarray, n: int):
    """Choose among masked candidates: sort by index, take floor(u * m)."""
    m = cand_mask.sum(axis=1)
    keyed = np.where(cand_mask, cand_idx, n)
    keyed.sort(axis=1)
    pos = np.minimum((u * m).astype(np.int64), m - 1)
    return keyed[np.arange(keyed.shape[0]), pos], m


def _brute(coords, u, chunk=512):
    n = coords.shape[0]
    nn = np.empty(n, dtype=np.int64)
    ties = np.empty(n, dtype=np.int64)
    big = _sentinel(coords.dtype)
    all_idx = np.arange(n)
    for start in range(0, n, chunk):
        rows = all_idx[start:start + chunk]
        sq = _sq_dist(coords[None, :, :], coords[rows, None, :])
        sq[np.arange(rows.size), rows] = big
        best = sq.min(axis=1)
        mask = sq == best[:, None]
        cand = np.broadcast_to(all_idx, mask.shape)
        nn[rows], ties[rows] = _pick(cand, mask, u[rows], n)
    return nn, ties


def _kdtree(coords, u):
    n = coords.shape[0]
    exact_int = np.issubdtype(coords.dtype, np.integer)
    fcoords = coords.astype(float)
    tree = cKDTree(fcoords)
    big = _sentinel(coords.dtype)
    nn = np.empty(n, dtype=np.int64)
    ties = np.empty(n, dtype=np.int64)
    # leaf order keeps neighboring queries close in memory
    todo = np.asarray(tree.indices, dtype=np.int64)
    for k in (4, 32):
        if todo.size == 0:
            break
        k = min(k, n)
        dist, idx = tree.query(fcoords[todo], k=k)
        raw = _sq_dist(coords[idx], coords[todo, None, :])
        sq = np.where(idx == todo[:, None], big, raw)
        best = sq.min(axis=1)
        mask = sq == best[:, None]
        if k == n:
            overflow = np.zeros(todo.size, dtype=bool)
        elif exact_int:
            overflow = raw.max(axis=1) <= best
        else:
            overflow = dist[:, -1] <= np.sqrt(best) * (1 + _FLOAT_MARGIN)
        done = ~overflow
        nn[todo[done]], ties[todo[done]] = _pick(idx[done], mask[done], u[todo[done]], n)
        todo = todo[overflow]
    # rare: more than 31 points at the minimum distance (heavy duplication)
    for i in todo:
        row = np.delete(np.arange(n), i)
        sq = _sq_dist(coords[row], coords[i])
        best = sq.min()
        radius = float(np.sqrt(best)) * (1 + _FLOAT_MARGIN) + 1e-12
        cand = np.asarray(tree.query_ball_point(fcoords[i], radius), dtype=np.int64)
        cand = cand[cand != i]
        csq = _sq_dist(coords[cand], coords[i])
        cand = np.sort(cand[csq == best])
        ties[i] = cand.size
        nn[i] = cand[min(int(u[i] * cand.size), cand.size - 1)]
    return nn, ties


def build_nng(points, tie_draws, metric_space=None, method="auto") -> NngGraph:
    """Nearest-neighbor graph of ``points``.

    ``points`` is a :class:`~xico.ranks.RankVectors` (distances are then
    compared exactly on integer rank counts) or an ``(n, d)`` array.
    ``method`` is ``"auto"``, ``"brute"`` or ``"kdtree"``; all give the same
    graph.
    """
    coords, default_space = _coerce_points(points)
    n = coords.shape[0]
    if n < 2:
        raise FewerThanTwoPoints(f"need at least 2 points, got {n}")
    u = np.asarray(tie_draws, dtype=float)
    if u.shape != (n,):
        raise DimensionMismatch(f"tie_draws must have length {n}, got shape {u.shape}")
    if np.any((u < 0) | (u >= 1)):
        raise ValueError("tie_draws must lie in [0, 1)")
    if method == "auto":
        method = "brute" if n <= BRUTE_FORCE_MAX_N or coords.shape[1] > KDTREE_MAX_D else "kdtree"
    if method == "brute":
        nn, ties = _brute(coords, u)
    elif method == "kdtree":
        nn, ties = _kdtree(coords, u)
    else:
        raise ValueError(f"unknown method {method!r}")
    for a in (nn, ties):
        a.setflags(write=False)
    return NngGraph(nn, u, ties, metric_space or default_space)


def graph_functionals(g: NngGraph) -> GraphFunctionals:
    n = g.n
    t_sum = int(np.count_nonzero(g.nn[g.nn] == np.arange(n)))
    indeg = g.in_degree()
    c_sum = int(np.dot(indeg, indeg - 1))
    return GraphFunctionals(t_sum, c_sum, n)
