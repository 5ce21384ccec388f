"""Monte Carlo studies: the Gaussian benchmark model, the mean/RMSE/rejection
tables, the null variance of ``sqrt(n) * xi_n`` and nearest-neighbor graph
functional averages.

Randomness discipline: every replication ``r`` owns the seed sequence
``substream(seed, r)``. Its child 0 drives data generation and its child 1
the tie-break draws (shared by every estimator and every scaling factor of
that replication). The reference sample uses ``substream(seed,
REFERENCE_KEY)``. Results therefore do not depend on worker count or
scheduling.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .asymptotics import q_const, o_const, sigma_sq
from .data import Dataset
from .errors import DomainError, NonPsdCovariance
from .estimator import substream, xi_ac, xi_rank
from .inference import normal_sf
from .nng import build_nng, draw_ties, graph_functionals
from .ranks import rank_matrix

REFERENCE_KEY = 2**32 - 1
REFERENCE_N = 50_000
_PSD_TOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    d: int
    n: int
    rho: float = 0.0
    alpha: Tuple[float, ...] = (1.0,)
    replications: int = 1000
    seed: int = 0
    estimators: Tuple[str, ...] = ("rank_ac", "ac")
    levels: Tuple[float, ...] = (0.05, 0.1)
    strict_psd: bool = True
    reference_n: int = REFERENCE_N

    def __post_init__(self):
        alpha = self.alpha
        alpha = (float(alpha),) if np.ndim(alpha) == 0 else tuple(float(a) for a in alpha)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.d < 2:
            raise DomainError("the benchmark model needs d >= 2")
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if any(a <= 0 for a in alpha):
            raise DomainError("scaling factors must be positive")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        bad = set(self.estimators) - {"rank_ac", "ac"}
        if bad:
            raise DomainError(f"unknown estimators {sorted(bad)}")

    @property
    def psd_valid(self) -> bool:
        return psd_valid(self.d, self.rho)


def psd_valid(d: int, rho: float) -> bool:
    return rho * rho * (d - 1) <= 1 + _PSD_TOL


def model_covariance(d: int, rho: float) -> np.ndarray:
    """Covariance of ``(Z_1, ..., Z_d, W)``: ``Z_1..Z_{d-1}`` correlate with ``W`` at ``rho``."""
    cov = np.eye(d + 1)
    cov[: d - 1, d] = rho
    cov[d, : d - 1] = rho
    return cov


def nearest_correlation(a: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Nearest correlation matrix by alternating projections with Dykstra's correction."""
    y = a.copy()
    ds = np.zeros_like(a)
    for _ in range(max_iter):
        r = y - ds
        w, v = np.linalg.eigh(r)
        x = (v * np.maximum(w, 0.0)) @ v.T
        ds = x - r
        y_new = x.copy()
        np.fill_diagonal(y_new, 1.0)
        if np.linalg.norm(y_new - y, "fro") < tol:
            y = y_new
            break
        y = y_new
    return (y + y.T) / 2


def _factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # singular but PSD (e.g. rho^2 (d-1) == 1): rank-deficient factor
        w, v = np.linalg.eigh(cov)
        return v * np.sqrt(np.maximum(w, 0.0))


@lru_cache(maxsize=None)
def _model_factor(d: int, rho: float, strict: bool) -> Tuple[np.ndarray, bool]:
    cov = model_covariance(d, rho)
    adjusted = False
    if not psd_valid(d, rho):
        if strict:
            raise NonPsdCovariance(d, rho)
        cov = nearest_correlation(cov)
        adjusted = True
    f = _factor(cov)
    f.setflags(write=False)
    return f, adjusted


def _rng(stream) -> np.random.Generator:
    return stream if isinstance(stream, np.random.Generator) else np.random.default_rng(stream)


def draw_model(d: int, n: int, rho: float, stream, strict_psd: bool = True):
    """``(z, w)``: ``n`` draws of the ``(d+1)``-variate normal before scaling."""
    factor, _ = _model_factor(d, float(rho), strict_psd)
    g = _rng(stream).standard_normal((n, d + 1))
    zw = g @ factor.T
    return zw[:, :d], zw[:, d]


def scale_last(z: np.ndarray, alpha: float) -> np.ndarray:
    x = z.copy()
    x[:, -1] *= alpha
    return x


def generate_model(cfg: SimConfig, stream) -> Dataset:
    """One sample of size ``cfg.n`` with ``X = (Z_1, ..., alpha Z_d)`` and ``Y = W``.

    Uses the first entry of ``cfg.alpha``.
    """
    z, w = draw_model(cfg.d, cfg.n, cfg.rho, stream, cfg.strict_psd)
    return Dataset(scale_last(z, cfg.alpha[0]), w)


def reference_xi_estimate(cfg: SimConfig, stream) -> float:
    """``xi_ac`` on an independent large sample at ``alpha = 1``.

    The last covariate is independent of everything else, so the population
    coefficient does not depend on its scale.
    """
    rng = _rng(stream)
    z, w = draw_model(cfg.d, cfg.reference_n, cfg.rho, rng, cfg.strict_psd)
    return xi_ac(Dataset(z, w), rng).xi


@lru_cache(maxsize=64)
def _cached_reference(d, rho, strict, reference_n, seed) -> float:
    cfg = SimConfig(d=d, n=2, rho=rho, strict_psd=strict, reference_n=reference_n, seed=seed)
    return reference_xi_estimate(cfg, np.random.default_rng(substream(seed, REFERENCE_KEY)))


@dataclass(frozen=True)
class SimCell:
    estimator: str
    alpha: float
    mean: float
    rmse: float
    rf: Dict[float, float]
    se_mean: float
    se_rf: Dict[float, float]


@dataclass
class SimReport:
    config: SimConfig
    cells: List[SimCell]
    reference_xi: float
    reference_method: str
    replications_used: int
    sigma_sq: float
    covariance_adjusted: bool = False
    notes: List[str] = field(default_factory=list)

    def cell(self, estimator: str, alpha: float) -> SimCell:
        for c in self.cells:
            if c.estimator == estimator and c.alpha == float(alpha):
                return c
        raise KeyError((estimator, alpha))

    def header(self) -> List[str]:
        cols = ["d", "n", "alpha", "Mean_RAC", "Mean_AC", "RMSE_RAC", "RMSE_AC"]
        for lv in self.config.levels:
            cols += [f"RF_{lv:g}^RAC", f"RF_{lv:g}^AC"]
        return cols

    def rows(self) -> List[list]:
        """One row per scaling factor: d, n, alpha, then means, RMSEs and RFs."""
        out = []
        names = {"rank_ac": "RAC", "ac": "AC"}
        for a in self.config.alpha:
            got = {names[c.estimator]: c for c in self.cells if c.alpha == a}

            def val(est, attr, level=None):
                c = got.get(est)
                if c is None:
                    return None
                return getattr(c, attr)[level] if level is not None else getattr(c, attr)

            row = [self.config.d, self.config.n, a]
            row += [val("RAC", "mean"), val("AC", "mean"), val("RAC", "rmse"), val("AC", "rmse")]
            for lv in self.config.levels:
                row += [val("RAC", "rf", lv), val("AC", "rf", lv)]
            out.append(row)
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_text(self) -> str:
        header = self.header()
        lines = []
        for row in self.rows():
            cells = []
            for v in row:
                if v is None:
                    cells.append("")
                elif isinstance(v, float) and not float(v).is_integer():
                    cells.append(f"{v:.3f}")
                elif isinstance(v, float):
                    cells.append(f"{v:g}")
                else:
                    cells.append(str(v))
            lines.append(cells)
        widths = [max(len(h), *(len(r[i]) for r in lines)) for i, h in enumerate(header)]
        fmt = "  ".join(f"{{:>{w}}}" for w in widths)
        out = [fmt.format(*header)] + [fmt.format(*r) for r in lines]
        out.append(
            f"# rho={self.config.rho:g} reps={self.replications_used} seed={self.config.seed} "
            f"reference_xi={self.reference_xi:.4f} ({self.reference_method}) "
            f"sigma_sq={self.sigma_sq:.4f}"
        )
        out += [f"# {note}" for note in self.notes]
        return "\n".join(out)

    def as_dict(self) -> dict:
        return {
            "header": self.header(),
            "rows": self.rows(),
            "reference_xi": self.reference_xi,
            "reference_method": self.reference_method,
            "replications": self.replications_used,
            "sigma_sq": self.sigma_sq,
            "seed": self.config.seed,
            "covariance_adjusted": self.covariance_adjusted,
            "notes": list(self.notes),
        }


def _table_replication(cfg: SimConfig, r: int) -> np.ndarray:
    """Estimates for one replication: shape ``(len(estimators), len(alpha))``."""
    rep = substream(cfg.seed, r)
    z, w = draw_model(cfg.d, cfg.n, cfg.rho, substream(rep, 0), cfg.strict_psd)
    tie_seed = substream(rep, 1)
    out = np.empty((len(cfg.estimators), len(cfg.alpha)))
    for j, a in enumerate(cfg.alpha):
        ds = Dataset(scale_last(z, a), w)
        for i, est in enumerate(cfg.estimators):
            fn = xi_rank if est == "rank_ac" else xi_ac
            out[i, j] = fn(ds, tie_seed).xi
    return out


def _run_chunks(fn, args_list, n_jobs: int):
    if n_jobs == 1 or len(args_list) < 2:
        return [fn(*a) for a in args_list]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*a) for a in args_list)


def _chunked(fn, cfg, reps: int, n_jobs: int, chunk: int = 100):
    def run(start, stop):
        return [fn(cfg, r) for r in range(start, stop)]

    bounds = [(s, min(s + chunk, reps)) for s in range(0, reps, chunk)]
    parts = _run_chunks(run, bounds, n_jobs)
    return [x for part in parts for x in part]


def table_study(cfg: SimConfig, n_jobs: int = 1) -> SimReport:
    """Means, RMSE against the reference coefficient, and rejection
    frequencies of the one-sided normal test at each level.

    Both estimators are standardized with the same ``sigma_d``.
    """
    factor, adjusted = _model_factor(cfg.d, float(cfg.rho), cfg.strict_psd)
    notes = []
    if adjusted:
        notes.append(
            "covariance not PSD; projected to the nearest correlation matrix "
            "(differs from the nominal data-generating model)"
        )
    if cfg.rho == 0:
        ref, ref_method = 0.0, "exact: independence"
    else:
        ref = _cached_reference(cfg.d, float(cfg.rho), cfg.strict_psd, cfg.reference_n, cfg.seed)
        ref_method = f"xi_ac on an independent sample of size {cfg.reference_n}"
    s2 = sigma_sq(cfg.d).sigma_sq
    est = np.array(_chunked(_table_replication, cfg, cfg.replications, n_jobs))
    reps = est.shape[0]
    z = math.sqrt(cfg.n) * est / math.sqrt(s2)
    p = np.vectorize(normal_sf)(z)
    cells = []
    for i, name in enumerate(cfg.estimators):
        for j, a in enumerate(cfg.alpha):
            v = est[:, i, j]
            mean = float(v.mean())
            rmse = float(np.sqrt(np.mean((v - ref) ** 2)))
            se_mean = float(v.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
            rf, se_rf = {}, {}
            for lv in cfg.levels:
                frac = float(np.mean(p[:, i, j] < lv))
                rf[lv] = frac
                se_rf[lv] = math.sqrt(frac * (1 - frac) / reps)
            cells.append(SimCell(name, a, mean, rmse, rf, se_mean, se_rf))
    return SimReport(cfg, cells, ref, ref_method, reps, s2, adjusted, notes)


def _null_replication(args, r):
    d, n, seed = args
    rep = substream(seed, r)
    rng = np.random.default_rng(substream(rep, 0))
    x = rng.standard_normal((n, d))
    y = rng.standard_normal(n)
    return math.sqrt(n) * xi_rank(Dataset(x, y), substream(rep, 1)).xi


def null_sample(d: int, n: int, replications: int, seed=0, n_jobs: int = 1) -> np.ndarray:
    """``sqrt(n) * xi_n`` for independent standard normal ``X`` in ``R^d`` and ``Y``."""
    return np.array(_chunked(_null_replication, (d, n, seed), replications, n_jobs))


def variance_with_se(values) -> Tuple[float, float]:
    """Unbiased sample variance and its large-sample standard error."""
    v = np.asarray(values, dtype=float)
    m = v.size
    var = float(v.var(ddof=1))
    m4 = float(np.mean((v - v.mean()) ** 4))
    return var, math.sqrt(max(m4 - var * var * (m - 3) / (m - 1), 0.0) / m)


def null_variance_study(d: int, n: int, replications: int, seed=0, n_jobs: int = 1):
    """``(variance, standard_error)`` of ``sqrt(n) * xi_n`` under independence."""
    if d < 1:
        raise DomainError("d must be >= 1")
    if replications < 1000:
        raise DomainError("use at least 1000 replications")
    return variance_with_se(null_sample(d, n, replications, seed, n_jobs))


def d1_exact_expectations(n: int) -> Tuple[float, float]:
    """Exact ``(E[t_sum/n], E[c_sum/n])`` for the rank graph of ``d = 1`` continuous data.

    The rank points are equally spaced, so each interior point has two tied
    neighbors and picks one with probability 1/2; the end points have one.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if n == 2:
        return 1.0, 0.0
    if n == 3:
        return 2.0 / 3.0, 2.0 / 3.0
    # end pairs are mutual w.p. 1/2, the n - 3 interior pairs w.p. 1/4
    t = 2.0 * (2 * 0.5 + (n - 3) * 0.25) / n
    # nodes 2 and n-1 are shared w.p. 1/2, the n - 4 others w.p. 1/4
    c = 2.0 * (2 * 0.5 + (n - 4) * 0.25) / n
    return t, c


def d1_naive_expectations(n: int) -> Tuple[float, float]:
    """A finite-``n`` formula that counts one mutual pair too many; kept for comparison."""
    return 2.0 / n * (1 + (n - 2) / 4), 2.0 / n * (1 + (n - 4) / 4)


@dataclass(frozen=True)
class FunctionalReport:
    d: int
    n: int
    replications: int
    t_mean: float
    t_se: float
    c_mean: float
    c_se: float
    t_limit: Optional[float] = None
    c_limit: Optional[float] = None
    t_exact: Optional[float] = None
    c_exact: Optional[float] = None
    t_naive: Optional[float] = None
    c_naive: Optional[float] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _functional_replication(args, r):
    d, n, seed = args
    rep = substream(seed, r)
    pts = np.random.default_rng(substream(rep, 0)).random((n, d))
    g = build_nng(rank_matrix(pts), draw_ties(n, substream(rep, 1)))
    f = graph_functionals(g)
    return f.t_sum, f.c_sum


def functional_convergence_study(d: int, n: int, replications: int, seed=0, n_jobs: int = 1):
    """Monte Carlo means of ``t_sum/n`` and ``c_sum/n`` on rank graphs of uniform data."""
    if d < 1:
        raise DomainError("d must be >= 1")
    sums = np.array(_chunked(_functional_replication, (d, n, seed), replications, n_jobs), dtype=float) / n
    t, c = sums[:, 0], sums[:, 1]
    se = lambda v: float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    kw = {}
    if d == 1:
        kw["t_exact"], kw["c_exact"] = d1_exact_expectations(n)
        kw["t_naive"], kw["c_naive"] = d1_naive_expectations(n)
        kw["t_limit"], kw["c_limit"] = 0.5, 0.5
    else:
        kw["t_limit"], kw["c_limit"] = q_const(d), o_const(d)[0]
    return FunctionalReport(d, n, t.size, float(t.mean()), se(t), float(c.mean()), se(c), **kw)
