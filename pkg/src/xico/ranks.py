"""Coordinate-wise empirical CDF images and response ECDF/survival values.

Ranks use the ``<=`` counting convention: tied values all receive the
largest rank of their tie group. Everything is kept as integer counts; the
division by ``n`` happens only when a float view is requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset


@dataclass(frozen=True, eq=False)
class RankVectors:
    """Entry ``(i, j)`` of :attr:`counts` is ``#{k : X[k, j] <= X[i, j]}``."""

    counts: np.ndarray
    n: int

    @property
    def r(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def d(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    f_counts: np.ndarray  # #{k : Y_k <= Y_i}
    g_counts: np.ndarray  # #{k : Y_k >= Y_i}
    n: int

    @property
    def f(self) -> np.ndarray:
        return self.f_counts / self.n

    @property
    def g(self) -> np.ndarray:
        return self.g_counts / self.n


def ecdf_counts(values) -> np.ndarray:
    """``#{k : v_k <= v_i}`` for each ``i`` via one sort and a binary search."""
    v = np.asarray(values)
    return np.searchsorted(np.sort(v), v, side="right").astype(np.int64)


def survival_counts(values) -> np.ndarray:
    """``#{k : v_k >= v_i}`` for each ``i``."""
    v = np.asarray(values)
    return (v.shape[0] - np.searchsorted(np.sort(v), v, side="left")).astype(np.int64)


def rank_matrix(ds) -> RankVectors:
    """Marginal ECDF images of the covariates.

    Accepts a :class:`~xico.data.Dataset` or a bare ``(n, d)`` array.
    """
    x = ds.x if isinstance(ds, Dataset) else np.asarray(ds, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n, d = x.shape
    counts = np.empty((n, d), dtype=np.int64)
    for j in range(d):
        counts[:, j] = ecdf_counts(x[:, j])
    counts.setflags(write=False)
    return RankVectors(counts, n)


def response_ecdf(y) -> EmpiricalCdf:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] < 2:
        raise ValueError("y must be a vector of length >= 2")
    return EmpiricalCdf(ecdf_counts(y), survival_counts(y), y.shape[0])
