"""Asymptotic independence test based on the rank coefficient.

The statistic ``z = sqrt(n) * xi_n / sigma_d`` is compared with the right
tail of the standard normal. Dependence pushes ``xi_n`` upwards, so only
the right tail carries power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .asymptotics import sigma_sq
from .data import Dataset, require_valid
from .estimator import xi_rank

WARN_D2 = "d=2 variance conjectured"
WARN_TIES = "asymptotic test requires continuous distributions"


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_sf(z: float) -> float:
    """``1 - normal_cdf(z)`` without cancellation in the far right tail."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class TestResult:
    xi: float
    z: float
    p_one_sided: float
    level: float
    reject: bool
    d: int
    n: int
    conjectured_variance: bool
    sigma_sq: float
    seed: object = None
    warnings: List[str] = field(default_factory=list)

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "z": self.z,
            "p_one_sided": self.p_one_sided,
            "level": self.level,
            "reject": self.reject,
            "n": self.n,
            "d": self.d,
            "sigma_sq": self.sigma_sq,
            "conjectured_variance": self.conjectured_variance,
            "seed": self.seed if isinstance(self.seed, (int, type(None))) else repr(self.seed),
            "warnings": list(self.warnings),
        }


def z_test(xi: float, n: int, d: int, level: float = 0.05):
    """``(z, p, reject)`` for an already computed coefficient."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    sigma = math.sqrt(sigma_sq(d).sigma_sq)
    z = math.sqrt(n) * xi / sigma
    p = normal_sf(z)
    return z, p, p < level


def _has_ties(ds: Dataset) -> bool:
    cols = [ds.y] + [ds.x[:, j] for j in range(ds.d)]
    return any(np.unique(c).size < c.size for c in cols)


def independence_test(ds: Dataset, level: float = 0.05, seed=0) -> TestResult:
    require_valid(ds)
    est = xi_rank(ds, seed)
    z, p, reject = z_test(est.xi, ds.n, ds.d, level)
    warnings = []
    if ds.d == 2:
        warnings.append(WARN_D2)
    if _has_ties(ds):
        warnings.append(WARN_TIES)
    return TestResult(
        xi=est.xi,
        z=z,
        p_one_sided=p,
        level=level,
        reject=reject,
        d=ds.d,
        n=ds.n,
        conjectured_variance=ds.d == 2,
        sigma_sq=sigma_sq(ds.d).sigma_sq,
        seed=seed,
        warnings=warnings,
    )
