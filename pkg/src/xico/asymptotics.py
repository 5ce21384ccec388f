"""Null-variance constants of the rank-based coefficient.

Under independence ``sqrt(n) * xi_n`` is asymptotically normal with variance
``1`` for ``d = 1`` and ``2/5 + 2/5 q_d + 4/5 o_d`` for ``d >= 2`` where

* ``q_d = 1 / (2 - I_{3/4}((d+1)/2, 1/2))`` is the limiting mean fraction of
  points in mutual nearest-neighbor pairs;
* ``o_d`` integrates ``exp(-V_d(x1, x2))`` over the pairs ``(x1, x2)`` that
  are both closer to the origin than to each other, ``V_d`` being the
  volume of the union of the balls ``B(x1, |x1|)`` and ``B(x2, |x2|)``.

``o_d`` is computed by integrating the common radial scale out analytically,
leaving a smooth two-dimensional integral that tensor Gauss-Legendre
quadrature resolves to near machine precision. A Monte Carlo estimator in
``R^{2d}`` is provided as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, PrecisionNotReached

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000


def _betacf(x, a, b):
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _CF_EPS
        if not active.any():
            return h
    raise PrecisionNotReached("incomplete beta continued fraction did not converge")


def reg_incomplete_beta(x, a, b):
    """Regularized incomplete beta function ``I_x(a, b)``.

    Works elementwise on arrays (broadcasting ``x``, ``a`` and ``b``) and
    returns a Python float for scalar input.
    """
    scalar = np.ndim(x) == 0 and np.ndim(a) == 0 and np.ndim(b) == 0
    x, a, b = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(x, a, b))
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("I_x(a, b) requires a > 0 and b > 0")
    if np.any(~((x >= 0) & (x <= 1))):
        raise DomainError("I_x(a, b) requires 0 <= x <= 1")
    out = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0) & (x < 1)
    if inner.any():
        xi, ai, bi = x[inner], a[inner], b[inner]
        log_front = (
            gammaln(ai + bi) - gammaln(ai) - gammaln(bi)
            + ai * np.log(xi) + bi * np.log1p(-xi)
        )
        front = np.exp(log_front)
        # the fraction converges fast only below the switch point; use the
        # reflection I_x(a, b) = 1 - I_{1-x}(b, a) above it
        flip = xi > (ai + 1.0) / (ai + bi + 2.0)
        xs = np.where(flip, 1.0 - xi, xi)
        as_ = np.where(flip, bi, ai)
        bs = np.where(flip, ai, bi)
        cf = _betacf(xs, as_, bs)
        val = front * cf / as_
        out[inner] = np.clip(np.where(flip, 1.0 - val, val), 0.0, 1.0)
    return float(out) if scalar else out


def unit_ball_volume(d: int) -> float:
    """``pi^(d/2) / Gamma(d/2 + 1)``."""
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))


def sphere_area(k: int) -> float:
    """Surface area of the unit ``k``-sphere in ``R^(k+1)``; ``sphere_area(0)`` is 2."""
    return 2.0 * math.exp(0.5 * (k + 1) * math.log(math.pi) - math.lgamma(0.5 * (k + 1)))


@dataclass(frozen=True)
class BallGeometry:
    d: int
    unit_ball_volume: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "unit_ball_volume", unit_ball_volume(self.d))

    def ball_volume(self, r):
        return self.unit_ball_volume * np.asarray(r, dtype=float) ** self.d

    def cap_volume(self, r, h):
        """Volume of the cap of height ``h`` cut from a ball of radius ``r``."""
        r = np.asarray(r, dtype=float)
        h = np.clip(np.asarray(h, dtype=float), 0.0, 2.0 * r)
        r, h = np.broadcast_arrays(r, h)
        full = self.ball_volume(r)
        small = np.minimum(h, 2.0 * r - h)  # cap height on the short side
        with np.errstate(invalid="ignore", divide="ignore"):
            arg = np.where(r > 0, (2.0 * r * small - small * small) / np.where(r > 0, r * r, 1.0), 0.0)
        arg = np.clip(arg, 0.0, 1.0)
        half = 0.5 * full * reg_incomplete_beta(arg, 0.5 * (self.d + 1), 0.5)
        return np.where(h <= r, half, full - half)

    def intersection_volume(self, r1, r2, dist):
        """Volume of ``B(c1, r1) & B(c2, r2)`` with ``|c1 - c2| = dist``."""
        r1, r2, dist = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(r1, r2, dist))
        disjoint = dist >= r1 + r2
        contained = dist <= np.abs(r1 - r2)
        lens = ~(disjoint | contained)
        out = np.where(contained, self.ball_volume(np.minimum(r1, r2)), 0.0)
        if lens.any():
            a, b, D = r1[lens], r2[lens], dist[lens]
            a1 = (D * D + a * a - b * b) / (2.0 * D)
            out[lens] = self.cap_volume(a, a - a1) + self.cap_volume(b, b - (D - a1))
        return out

    def union_volume(self, r1, r2, dist):
        return self.ball_volume(r1) + self.ball_volume(r2) - self.intersection_volume(r1, r2, dist)


def union_volume(x1, x2) -> float:
    """Volume of ``B(x1, |x1|) | B(x2, |x2|)``."""
    x1 = np.asarray(x1, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x1.shape != x2.shape:
        raise DomainError("x1 and x2 must have the same dimension")
    geo = BallGeometry(x1.size)
    return float(geo.union_volume(np.linalg.norm(x1), np.linalg.norm(x2), np.linalg.norm(x1 - x2)))


def q_const(d: int) -> float:
    if d < 1:
        raise DomainError("d must be >= 1")
    return 1.0 / (2.0 - reg_incomplete_beta(0.75, 0.5 * (d + 1), 0.5))


def o_integrand(d: int, t, theta):
    """Integrand of ``o_d`` after the radial scale is integrated out.

    ``t = |x2| / |x1| <= 1`` and ``theta`` is the angle between ``x1`` and
    ``x2``; zero outside the region ``max(|x1|, |x2|) < |x1 - x2|``.
    """
    geo = BallGeometry(d)
    t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
    dist = np.sqrt(np.maximum(1.0 + t * t - 2.0 * t * np.cos(theta), 0.0))
    inside = dist > np.maximum(1.0, t)
    v = geo.union_volume(1.0, t, dist)
    val = t ** (d - 1) * np.sin(theta) ** (d - 2) / (d * v * v)
    return np.where(inside, val, 0.0)


def _o_quadrature(d: int, order: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # outer variable t in (0, 1)
    t = 0.5 * (nodes + 1.0)
    wt = 0.5 * weights
    # inner variable theta in (arccos(t/2), pi); the domain edge is built into
    # the limits so the integrand is smooth on each cell
    lo = np.arccos(t / 2.0)
    half = 0.5 * (np.pi - lo)
    theta = lo[:, None] + half[:, None] * (nodes[None, :] + 1.0)
    tt = np.broadcast_to(t[:, None], theta.shape)
    geo = BallGeometry(d)
    dist = np.sqrt(1.0 + tt * tt - 2.0 * tt * np.cos(theta))
    v = geo.union_volume(1.0, tt, dist)
    f = tt ** (d - 1) * np.sin(theta) ** (d - 2) / (d * v * v)
    inner = (f * weights[None, :]).sum(axis=1) * half
    total = float((inner * wt).sum())
    return 2.0 * sphere_area(d - 1) * sphere_area(d - 2) * total


def o_const(d: int, target_abs_error: float = 1e-8, max_order: int = 1024):
    """``(o_d, error_estimate)`` by Gauss-Legendre quadrature with order doubling.

    The error estimate is the change between the last two orders. Raises
    :class:`PrecisionNotReached` (carrying the best estimate) when
    ``max_order`` is reached first.
    """
    if d < 2:
        raise DomainError("o_d is defined for d >= 2")
    if not target_abs_error > 0:
        raise DomainError("target_abs_error must be positive")
    return _o_const_cached(int(d), float(target_abs_error), int(max_order))


@lru_cache(maxsize=None)
def _o_const_cached(d, target, max_order):
    order = 16
    prev = _o_quadrature(d, order)
    err = math.inf
    while True:
        order *= 2
        if order > max_order:
            raise PrecisionNotReached(
                f"o_{d}: quadrature did not reach {target:g} by order {max_order}",
                estimate=prev, error=err,
            )
        cur = _o_quadrature(d, order)
        err = abs(cur - prev)
        if err < target / 2:
            return cur, err
        prev = cur


def o_const_monte_carlo(d: int, samples: int = 1_000_000, seed=0, batch: int = 200_000):
    """``(o_d, standard_error)`` by importance sampling in ``R^{2d}``.

    Both points are drawn from an isotropic Gaussian whose scale is matched
    to the unit-volume ball; the tails of ``exp(-V_d)`` are then lighter than
    the proposal's, so the weights have finite variance.
    """
    if d < 2:
        raise DomainError("o_d is defined for d >= 2")
    rng = np.random.default_rng(seed)
    geo = BallGeometry(d)
    s = 2.0 * geo.unit_ball_volume ** (-1.0 / d) / math.sqrt(d)
    log_norm = -d * math.log(2.0 * math.pi * s * s)  # for the pair density
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        x1 = rng.normal(scale=s, size=(m, d))
        x2 = rng.normal(scale=s, size=(m, d))
        r1 = np.linalg.norm(x1, axis=1)
        r2 = np.linalg.norm(x2, axis=1)
        dist = np.linalg.norm(x1 - x2, axis=1)
        inside = dist > np.maximum(r1, r2)
        w = np.zeros(m)
        if inside.any():
            a, b, D = r1[inside], r2[inside], dist[inside]
            log_p = log_norm - (a * a + b * b) / (2.0 * s * s)
            w[inside] = np.exp(-geo.union_volume(a, b, D) - log_p)
        total += w.sum()
        total_sq += np.dot(w, w)
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples)


@dataclass(frozen=True)
class SigmaConstants:
    d: int
    q: Optional[float]
    o: Optional[float]
    sigma_sq: float
    o_abs_error: float
    method: str  # "closed_form_d1", "quadrature" or "monte_carlo"
    conjectured: bool

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "q_d": self.q,
            "o_d": self.o,
            "sigma_sq": self.sigma_sq,
            "o_abs_error": self.o_abs_error,
            "method": self.method,
            "conjectured": self.conjectured,
        }


def sigma_sq(d: int, target_abs_error: float = 1e-8) -> SigmaConstants:
    """Asymptotic null variance of ``sqrt(n) * xi_n``.

    ``d = 2`` uses the same formula but is flagged ``conjectured``: the
    limit theorem behind it excludes that dimension.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    if d == 1:
        return SigmaConstants(1, None, None, 1.0, 0.0, "closed_form_d1", False)
    q = q_const(d)
    o, err = o_const(d, target_abs_error)
    return SigmaConstants(
        d, q, o, 0.4 + 0.4 * q + 0.8 * o, err, "quadrature", d == 2
    )
