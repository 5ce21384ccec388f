"""scikit-learn compatible front ends."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import Dataset
from .estimator import VARIANTS, xi_with_graph
from .inference import independence_test


def _check_xy(X, y):
    X, y = check_X_y(X, y, y_numeric=True, ensure_min_samples=2, dtype=np.float64)
    return Dataset(X, y)


class RankTransformer(TransformerMixin, BaseEstimator):
    """Map each column to its empirical CDF learned on the training sample.

    ``transform(x)[i, j]`` is the fraction of training values in column ``j``
    that are ``<= x[i, j]``; on the training data this is exactly
    :func:`xico.ranks.rank_matrix`.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        self.sorted_columns_ = np.sort(X, axis=0)
        self.n_samples_fit_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "sorted_columns_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but RankTransformer was fitted with "
                f"{self.n_features_in_}"
            )
        counts = np.column_stack([
            np.searchsorted(self.sorted_columns_[:, j], X[:, j], side="right")
            for j in range(X.shape[1])
        ])
        return counts / self.n_samples_fit_


class XiCorrelation(BaseEstimator):
    """Nearest-neighbor dependence coefficient of ``y`` on ``X``.

    Parameters
    ----------
    variant : {"rank_ac", "ac"}
        ``"rank_ac"`` builds the neighbor graph on coordinate-wise ranks and
        is invariant to monotone rescaling of any covariate; ``"ac"`` uses the
        raw covariates.
    random_state : int, SeedSequence, Generator or None
        Seed for the tie-break uniforms.

    Attributes
    ----------
    xi_ : float
    estimate_ : XiEstimate
    neighbors_ : ndarray of shape (n_samples,)
        Index of each sample's nearest neighbor.
    """

    def __init__(self, variant="rank_ac", random_state=0):
        self.variant = variant
        self.random_state = random_state

    def fit(self, X, y):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        ds = _check_xy(X, y)
        est, graph = xi_with_graph(ds, self.random_state, self.variant)
        self.estimate_ = est
        self.xi_ = est.xi
        self.q_n_ = est.q_n
        self.p_n_ = est.p_n
        self.neighbors_ = graph.nn
        self.n_features_in_ = ds.d
        return self


class XiIndependenceTest(BaseEstimator):
    """One-sided asymptotic test of independence between ``X`` and ``y``."""

    def __init__(self, level=0.05, random_state=0):
        self.level = level
        self.random_state = random_state

    def fit(self, X, y):
        ds = _check_xy(X, y)
        res = independence_test(ds, self.level, self.random_state)
        self.result_ = res
        self.statistic_ = res.xi
        self.zscore_ = res.z
        self.pvalue_ = res.p_one_sided
        self.reject_ = res.reject
        self.n_features_in_ = ds.d
        return self
