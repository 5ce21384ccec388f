"""The xi coefficient on the rank neighbor graph and on raw covariates.

With integer counts ``f_i = #{k : Y_k <= Y_i}`` and ``g_i = #{k : Y_k >= Y_i}``
the coefficient is

    xi = (n * sum_i min(f_i, f_{N(i)}) - sum_i g_i**2) / sum_i g_i * (n - g_i)

which is evaluated in exact integer arithmetic with a single final division,
so the value does not depend on summation order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Union

import numpy as np

from .data import Dataset, require_valid
from .errors import ConstantResponse, XicoError
from .nng import NngGraph, build_nng, draw_ties
from .ranks import rank_matrix, response_ecdf

VARIANTS = ("rank_ac", "ac")


@dataclass(frozen=True)
class XiEstimate:
    xi: float
    q_n: float
    p_n: float
    variant: str
    n: int
    d: int
    seed: object = None

    def as_dict(self) -> dict:
        seed = self.seed if isinstance(self.seed, (int, type(None))) else repr(self.seed)
        return {
            "variant": self.variant,
            "xi": self.xi,
            "q_n": self.q_n,
            "p_n": self.p_n,
            "n": self.n,
            "d": self.d,
            "seed": seed,
        }


def substream(seed, index: int) -> np.random.SeedSequence:
    """Child ``index`` of ``seed``; equal to ``SeedSequence(seed).spawn(...)[index]``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + (index,))
    return np.random.SeedSequence(seed, spawn_key=(index,))


def xi_from_graph(y, nn) -> tuple:
    """``(xi, q_n, p_n)`` for a response vector and a neighbor map."""
    ecdf = response_ecdf(y)
    n = ecdf.n
    f, g = ecdf.f_counts, ecdf.g_counts
    min_sum = int(np.minimum(f, f[np.asarray(nn)]).sum())
    g_sq = int(np.dot(g, g))
    num = n * min_sum - g_sq
    den = int(np.dot(g, n - g))
    if den == 0:
        raise ConstantResponse()
    n3 = n ** 3
    return num / den, num / n3, den / n3


def _estimate(ds: Dataset, seed, variant: str, graph_out=None) -> XiEstimate:
    require_valid(ds)
    u = draw_ties(ds.n, seed)
    points = rank_matrix(ds) if variant == "rank_ac" else ds.x
    g = build_nng(points, u, metric_space="rank" if variant == "rank_ac" else "raw")
    if graph_out is not None:
        graph_out.append(g)
    xi, q_n, p_n = xi_from_graph(ds.y, g.nn)
    return XiEstimate(xi, q_n, p_n, variant, ds.n, ds.d, seed)


def xi_rank(ds: Dataset, seed=0) -> XiEstimate:
    """Rank-based coefficient: neighbors are found among the marginal ECDF images."""
    return _estimate(ds, seed, "rank_ac")


def xi_ac(ds: Dataset, seed=0) -> XiEstimate:
    """Original coefficient: neighbors are found among the raw covariates."""
    return _estimate(ds, seed, "ac")


def xi(ds: Dataset, seed=0, variant: str = "rank_ac") -> XiEstimate:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return _estimate(ds, seed, variant)


def xi_with_graph(ds: Dataset, seed=0, variant: str = "rank_ac"):
    """Like :func:`xi` but also return the :class:`~xico.nng.NngGraph` used."""
    out: List[NngGraph] = []
    est = _estimate(ds, seed, variant, out)
    return est, out[0]


def xi_batch(datasets: Iterable[Dataset], seed=0) -> List[Union[XiEstimate, XicoError]]:
    """Evaluate :func:`xi_rank` on each dataset with seed ``substream(seed, i)``.

    Failures do not abort the batch; the exception instance takes the place
    of the estimate. Reordering the inputs changes each dataset's substream
    index and therefore, where ties occur, possibly its estimate.
    """
    out: List[Union[XiEstimate, XicoError]] = []
    for i, ds in enumerate(datasets):
        try:
            out.append(xi_rank(ds, substream(seed, i)))
        except XicoError as exc:
            out.append(exc)
    return out
