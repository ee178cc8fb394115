"""Asymptotic AR(1) estimator functionals under additive outliers.

Each functional maps the true coefficient ``theta`` of a stationary AR(1)
process, observed with i.i.d. symmetric additive outliers of probability ``p``
and magnitude ``zeta``, to the probability limit of the estimator:

* OLS -- closed form,
* LMS -- argmin over ``theta_tilde`` of the median ``c`` of the squared
  residual, where ``c`` solves a noncentral chi-square mixture equation,
* DR  -- median of the ratio ``(Y_t + Z_t) / (Y_{t-1} + Z_{t-1})``, a mixture
  of correlated-normal ratio CDFs.

``zeta = math.inf`` dispatches to the analytic limit forms. All functionals
accept a scalar or an array of ``theta`` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .specfun import chisq1_cdf, ratio_normal_cdf

__all__ = [
    "EstimatorKind",
    "FunctionalInput",
    "LmsConfig",
    "NoRootError",
    "DegenerateSampleError",
    "ols_functional",
    "tau_squared",
    "lms_constraint_rhs",
    "lms_scale",
    "lms_limit_scale",
    "lms_functional",
    "dr_equation_rhs",
    "dr_limit_rhs",
    "dr_functional",
    "functional",
    "finite_sample_estimate",
    "ols_estimate",
    "dr_estimate",
    "lms_estimate",
]

ZETA_INF = math.inf
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimatorKind(str, Enum):
    OLS = "OLS"
    LMS = "LMS"
    DR = "DR"
    CLAMPED_OLS = "ClampedOLS"
    FRAC_COUNTEREXAMPLE = "FracCounterexample"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        raise ValueError(f"unknown estimator {name!r}")


class NoRootError(ArithmeticError):
    """The scale equation has no finite root."""


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionalInput:
    theta: float
    p: float
    zeta: float

    def __post_init__(self):
        _validate(self.theta, self.p, self.zeta)


@dataclass(frozen=True)
class LmsConfig:
    theta_tilde_grid: int = 2001
    refine_tol: float = 1e-6
    root_tol: float = 1e-10

    def __post_init__(self):
        if self.theta_tilde_grid < 3:
            raise ValueError("theta_tilde_grid must have at least 3 points")
        if self.refine_tol <= 0 or self.root_tol <= 0:
            raise ValueError("tolerances must be positive")

    def grid(self):
        g = np.linspace(-1.0, 1.0, self.theta_tilde_grid)
        # exactly antisymmetric, with 0 and +-1 on the grid
        return 0.5 * (g - g[::-1])


def _validate(theta, p, zeta):
    if np.any(np.abs(theta) >= 1):
        raise ValueError("theta must satisfy |theta| < 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not zeta >= 0:
        raise ValueError("zeta must be >= 0")


# --------------------------------------------------------------------- OLS

def ols_functional(theta, p, zeta):
    """theta / (1 + p (1 - theta^2) zeta^2)."""
    _validate(theta, p, zeta)
    theta = np.asarray(theta, dtype=float)
    if math.isinf(zeta):
        out = theta if p == 0 else np.zeros_like(theta)
    else:
        out = theta / (1.0 + p * (1.0 - theta * theta) * zeta * zeta)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------- LMS

def tau_squared(theta, theta_tilde):
    """Variance of the one-step residual ``Y_t - theta_tilde Y_{t-1}``."""
    if np.any(np.abs(theta) >= 1):
        raise ValueError("tau_squared requires |theta| < 1")
    theta = np.asarray(theta, dtype=float)
    d = theta - theta_tilde
    return 1.0 + d * d / ((1.0 - theta) * (1.0 + theta))


def _lms_terms(theta_tilde, p, zeta, tau2):
    """(weight, noncentrality * tau^2) pairs of the residual mixture."""
    z2 = zeta * zeta
    q = 1.0 - p
    return (
        ((q * q), 0.0),
        (p * q, z2),
        (p * q, theta_tilde * theta_tilde * z2),
        (0.5 * p * p, (1.0 - theta_tilde) ** 2 * z2),
        (0.5 * p * p, (1.0 + theta_tilde) ** 2 * z2),
    )


def _lms_h(s, theta_tilde, p, zeta, tau2):
    """Mixture CDF of squared residual / tau^2 at ``s``, and its derivative."""
    s = np.maximum(s, 0.0)
    rs = np.sqrt(s)
    val = np.zeros(np.broadcast(s, theta_tilde, tau2).shape)
    der = np.zeros_like(val)
    with np.errstate(divide="ignore", invalid="ignore"):
        for w, nc in _lms_terms(theta_tilde, p, zeta, tau2):
            if np.all(w == 0):
                continue
            d = np.sqrt(nc / tau2)
            val = val + w * chisq1_cdf(s, d * d)
            dens = (np.exp(-0.5 * (rs - d) ** 2) + np.exp(-0.5 * (rs + d) ** 2)) / (
                2.0 * rs * math.sqrt(2.0 * math.pi)
            )
            der = der + w * np.where(rs > 0, dens, np.inf)
    return val, der


def lms_constraint_rhs(c, theta_tilde, theta, p, zeta):
    """Probability that the squared one-step residual is at most ``c``.

    Right-hand side of the LMS scale equation; ``1/2`` at the median.
    """
    if np.any(np.asarray(c) < 0):
        raise ValueError("c must be >= 0")
    tau2 = tau_squared(theta, theta_tilde)
    if math.isinf(zeta):
        mass = _lms_limit_mass(theta_tilde, p)
        out = mass * chisq1_cdf(np.asarray(c) / tau2, 0.0)
    else:
        out, _ = _lms_h(np.asarray(c, dtype=float) / tau2, theta_tilde, p, zeta, tau2)
    out = np.clip(out, 0.0, 1.0)
    return out[()] if np.ndim(out) == 0 else out


def _solve_lms(theta_tilde, theta, p, zeta, root_tol):
    """Vectorized root of the LMS scale equation; returns ``c``."""
    theta_tilde, theta = np.broadcast_arrays(
        np.asarray(theta_tilde, dtype=float), np.asarray(theta, dtype=float)
    )
    tau2 = tau_squared(theta, theta_tilde)
    # every noncentrality is at most (2 zeta)^2 / tau2, so H(hi) ~ 1 > 1/2
    lo = np.zeros(theta.shape)
    hi = (2.0 * zeta / np.sqrt(tau2) + 10.0) ** 2
    val, _ = _lms_h(hi, theta_tilde, p, zeta, tau2)
    if np.any(val < 0.5):
        raise NoRootError("LMS scale equation has no root in the search bracket")
    x = np.full(theta.shape, 0.4549364231195724)  # chi-square(1) median
    x = np.minimum(x, 0.5 * hi)
    for _ in range(400):
        val, der = _lms_h(x, theta_tilde, p, zeta, tau2)
        f = val - 0.5
        lo = np.where(f < 0, x, lo)
        hi = np.where(f >= 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            newton = x - f / der
        # bisect in log space over wide brackets
        mid = np.where((lo > 0) & (hi > 4.0 * lo), np.sqrt(lo * hi), 0.5 * (lo + hi))
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi)
        x_new = np.where(ok, newton, mid)
        done = (hi - lo) <= root_tol * np.maximum(1.0, hi)
        if np.all(done):
            break
        x = np.where(done, x, x_new)
    return tau2 * 0.5 * (lo + hi)


def lms_scale(theta_tilde, theta, p, zeta, root_tol=1e-10):
    """Median ``c`` of the squared residual at slope ``theta_tilde``.

    Returns ``math.inf`` in the ``zeta = inf`` regime when the residual mass
    that stays bounded is below one half.
    """
    _validate(theta, p, zeta)
    if math.isinf(zeta):
        return lms_limit_scale(theta_tilde, theta, p)
    out = _solve_lms(theta_tilde, theta, p, zeta, root_tol)
    return out[()] if out.ndim == 0 else out


def _lms_limit_mass(theta_tilde, p):
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    q = 1.0 - p
    mass = np.full(theta_tilde.shape, q * q)
    mass = mass + np.where(theta_tilde == 0.0, p * q, 0.0)
    mass = mass + np.where(np.abs(theta_tilde) == 1.0, 0.5 * p * p, 0.0)
    return mass


def lms_limit_scale(theta_tilde, theta, p):
    """LMS scale at ``zeta = inf``.

    Residual components whose noncentrality grows with ``zeta`` escape to
    infinity; what stays bounded is the clean part, plus the lagged-outlier
    part when ``theta_tilde = 0`` and the same-sign outlier pair when
    ``|theta_tilde| = 1``. With bounded mass ``M``, ``c = tau^2 * q`` where
    ``M * P[chi2_1 <= q] = 1/2``.
    """
    mass = _lms_limit_mass(theta_tilde, p)
    tau2 = tau_squared(theta, theta_tilde)
    with np.errstate(divide="ignore"):
        target = np.where(mass > 0.5, 0.5 / np.where(mass > 0, mass, 1.0), 1.0)
        # P[chi2_1 <= q] = 2 Phi(sqrt q) - 1
        q = special.ndtri(0.5 * (1.0 + target)) ** 2
    out = np.where(mass > 0.5, tau2 * q, np.inf)
    return out[()] if np.ndim(out) == 0 else out


def _lms_objective(theta_tilde, theta, p, zeta, root_tol):
    if math.isinf(zeta):
        return lms_limit_scale(theta_tilde, theta, p)
    return _solve_lms(theta_tilde, theta, p, zeta, root_tol)


def _rhs_at(c, theta_tilde, theta, p, zeta):
    tau2 = tau_squared(theta, theta_tilde)
    if math.isinf(zeta):
        return _lms_limit_mass(theta_tilde, p) * chisq1_cdf(c / tau2, 0.0)
    val, _ = _lms_h(c / tau2, theta_tilde, p, zeta, tau2)
    return val


def _tie_break(c, cand, theta, rel=1e-9):
    """Index of the minimal ``c`` per row; ties go nearest theta, then 0."""
    best = np.min(c, axis=1, keepdims=True)
    tied = c <= best * (1.0 + rel) + 1e-300
    key1 = np.where(tied, np.abs(cand - theta[:, None]), np.inf)
    k1 = np.min(key1, axis=1, keepdims=True)
    tied &= key1 <= k1 + 1e-15
    key2 = np.where(tied, np.abs(cand), np.inf)
    k2 = np.min(key2, axis=1, keepdims=True)
    tied &= key2 <= k2
    # remaining exact ties (+u vs -u): prefer the sign of theta, then the larger
    key3 = np.where(tied, -cand * np.where(theta[:, None] < 0, -1.0, 1.0), np.inf)
    return np.argmin(key3, axis=1)


def lms_functional(theta, p, zeta, cfg=LmsConfig(), chunk=128):
    """Asymptotic LMS estimate for each true ``theta``.

    Grid argmin over ``theta_tilde`` in [-1, 1] followed by golden-section
    refinement inside one grid cell on either side of the best point. Grid
    points whose scale cannot beat the current best are screened out with a
    single evaluation of the monotone constraint, so the result equals the
    full-grid argmin.
    """
    _validate(theta, p, zeta)
    theta = np.asarray(theta, dtype=float)
    flat = theta.reshape(-1)
    out = np.empty_like(flat)
    for start in range(0, flat.size, chunk):
        out[start:start + chunk] = _lms_chunk(flat[start:start + chunk], p, zeta, cfg)
    out = out.reshape(theta.shape)
    return out[()] if out.ndim == 0 else out


def _lms_chunk(theta, p, zeta, cfg):
    grid = cfg.grid()
    n, m = theta.size, grid.size
    tol = cfg.root_tol

    # seed the incumbent with the nearest grid point and the special slopes
    near = grid[np.clip(np.searchsorted(grid, theta), 0, m - 1)]
    seeds = np.stack([near, np.zeros(n), np.ones(n), -np.ones(n)], axis=1)
    seed_c = _lms_objective(seeds, theta[:, None], p, zeta, tol)
    c_best = np.min(seed_c, axis=1)

    # H(c_best) >= 1/2  <=>  c(theta_tilde) <= c_best
    cb = np.where(np.isfinite(c_best), c_best * (1.0 + 1e-9), np.finfo(float).max)
    rhs = _rhs_at(cb[:, None], grid[None, :], theta[:, None], p, zeta)
    keep = rhs >= 0.5
    c_grid = np.full((n, m), np.inf)
    rows, cols = np.nonzero(keep)
    if rows.size:
        c_grid[rows, cols] = _lms_objective(grid[cols], theta[rows], p, zeta, tol)
    if not np.any(np.isfinite(c_grid).any(axis=1) | np.isfinite(c_best)):
        raise NoRootError("LMS scale is unbounded for every theta_tilde")

    cand = np.broadcast_to(grid, (n, m))
    idx = _tie_break(c_grid, cand, theta)
    best_t = grid[idx]
    best_c = c_grid[np.arange(n), idx]
    # fall back to the seeds where screening left nothing finite
    bad = ~np.isfinite(best_c)
    if np.any(bad):
        j = _tie_break(seed_c, seeds, theta)
        best_t = np.where(bad, seeds[np.arange(n), j], best_t)
        best_c = np.where(bad, seed_c[np.arange(n), j], best_c)

    h = grid[1] - grid[0]
    t_ref, c_ref = _golden(best_t - h, best_t + h, theta, p, zeta, cfg)
    better = c_ref < best_c * (1.0 - 1e-12)
    return np.where(better, t_ref, best_t)


def _golden(a, b, theta, p, zeta, cfg):
    a = np.clip(a, -1.0, 1.0)
    b = np.clip(b, -1.0, 1.0)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = _lms_objective(x1, theta, p, zeta, cfg.root_tol)
    f2 = _lms_objective(x2, theta, p, zeta, cfg.root_tol)
    while np.max(b - a) > cfg.refine_tol:
        left = f1 <= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x2n = np.where(left, x1, a + _GOLDEN * (b - a))
        x1n = np.where(left, b - _GOLDEN * (b - a), x2)
        f_new = _lms_objective(np.where(left, x1n, x2n), theta, p, zeta, cfg.root_tol)
        f1, f2 = np.where(left, f_new, f2), np.where(left, f1, f_new)
        x1, x2 = x1n, x2n
    x = np.where(f1 <= f2, x1, x2)
    return x, np.minimum(f1, f2)


# ---------------------------------------------------------------------- DR

def _dr_var(theta):
    return 1.0 / ((1.0 - theta) * (1.0 + theta))


def dr_equation_rhs(c, theta, p, zeta):
    """CDF of the contaminated successive ratio at ``c``.

    ``G(c; a, b)`` is the CDF of ``(a + N1) / (b + N2)`` with ``N1, N2`` of
    variance ``1/(1 - theta^2)`` and correlation ``theta``. Since ``(N1, N2)``
    is symmetric under a joint sign flip, ``G(c; -a, -b) = G(c; a, b)`` and the
    nine outlier configurations reduce to five distinct terms.
    """
    _validate(theta, p, zeta)
    if math.isinf(zeta):
        return dr_limit_rhs(c, theta, p)
    c, theta = np.broadcast_arrays(np.asarray(c, dtype=float), np.asarray(theta, dtype=float))
    var = _dr_var(theta)
    q = 1.0 - p

    def g(a, b):
        return ratio_normal_cdf(c, a, b, var, theta)

    out = q * q * g(0.0, 0.0)
    if p > 0:
        out = out + p * q * (g(zeta, 0.0) + g(0.0, zeta))
        out = out + 0.5 * p * p * (g(zeta, zeta) + g(zeta, -zeta))
    out = np.clip(out, 0.0, 1.0)
    return out[()] if np.ndim(out) == 0 else out


def _step(x):
    return np.where(x > 0, 1.0, np.where(x == 0, 0.5, 0.0))


def dr_limit_rhs(c, theta, p):
    """``dr_equation_rhs`` at ``zeta = inf``.

    ``(zeta + N1)/N2`` has CDF 1/2 in the limit, ``N1/(zeta + N2)`` collapses
    to 0, and ``(zeta + N1)/(+-zeta + N2)`` collapses to +-1.
    """
    c, theta = np.broadcast_arrays(np.asarray(c, dtype=float), np.asarray(theta, dtype=float))
    q = 1.0 - p
    out = q * q * ratio_normal_cdf(c, 0.0, 0.0, _dr_var(theta), theta)
    out = out + p * q * (0.5 + _step(c))
    out = out + 0.5 * p * p * (_step(c - 1.0) + _step(c + 1.0))
    out = np.clip(out, 0.0, 1.0)
    return out[()] if np.ndim(out) == 0 else out


def dr_functional(theta, p, zeta, root_tol=1e-10):
    """Median of the contaminated ratio: ``inf {c : rhs(c) >= 1/2}``.

    Bisection keeps ``rhs(lo) < 1/2 <= rhs(hi)``, so jumps in the step-like
    large-``zeta`` mixture resolve to the jump location.
    """
    _validate(theta, p, zeta)
    theta = np.asarray(theta, dtype=float)
    shape = theta.shape
    th = theta.reshape(-1)
    lo = np.full(th.shape, -2.0)
    hi = np.full(th.shape, 2.0)
    for _ in range(200):
        r_lo = dr_equation_rhs(lo, th, p, zeta) >= 0.5
        r_hi = dr_equation_rhs(hi, th, p, zeta) < 0.5
        if not (r_lo.any() or r_hi.any()):
            break
        lo = np.where(r_lo, 2.0 * lo, lo)
        hi = np.where(r_hi, 2.0 * hi, hi)
    while np.max(hi - lo) > root_tol:
        mid = 0.5 * (lo + hi)
        up = dr_equation_rhs(mid, th, p, zeta) >= 0.5
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    out = (0.5 * (lo + hi)).reshape(shape)
    return out[()] if out.ndim == 0 else out


def functional(kind, theta, p, zeta, lms_cfg=LmsConfig(), root_tol=1e-10):
    """Dispatch to the asymptotic functional of ``kind``."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.OLS:
        return ols_functional(theta, p, zeta)
    if kind is EstimatorKind.LMS:
        return lms_functional(theta, p, zeta, lms_cfg)
    if kind is EstimatorKind.DR:
        return dr_functional(theta, p, zeta, root_tol)
    raise ValueError(f"{kind.value} has no asymptotic AR(1) functional")


# ------------------------------------------------------------ finite sample

def _lagged(y):
    y = np.asarray(getattr(y, "values", y), dtype=float)
    if y.size < 3:
        raise ValueError("finite-sample estimates need n >= 3")
    prev, cur = y[:-1], y[1:]
    if not np.any(prev):
        raise DegenerateSampleError("all lagged values are zero")
    return prev, cur


def ols_estimate(y):
    prev, cur = _lagged(y)
    return float(np.dot(cur, prev) / np.dot(prev, prev))


def dr_estimate(y):
    """Median of the successive ratios ``Y_t / Y_{t-1}`` (zero lags dropped)."""
    prev, cur = _lagged(y)
    nz = prev != 0
    return float(np.median(cur[nz] / prev[nz]))


def _low_median_sq(prev, cur, slopes):
    r = cur[None, :] - slopes[:, None] * prev[None, :]
    r *= r
    k = r.shape[1] // 2
    return np.partition(r, k, axis=1)[:, k]


def lms_estimate(y, grid=2001, refine_tol=1e-6, chunk=64):
    """Slope in [-1, 1] minimizing the low median of squared residuals.

    The low median is the ``floor(m/2) + 1``-th smallest of the ``m``
    squared residuals. Grid search, then golden-section refinement.
    """
    prev, cur = _lagged(y)
    slopes = LmsConfig(theta_tilde_grid=grid).grid()
    obj = np.concatenate([
        _low_median_sq(prev, cur, slopes[i:i + chunk]) for i in range(0, slopes.size, chunk)
    ])
    best = np.flatnonzero(obj == obj.min())
    # ties: the slope nearest zero
    i = best[np.argmin(np.abs(slopes[best]))]
    t0, f0 = slopes[i], obj[i]
    h = slopes[1] - slopes[0]
    a, b = max(-1.0, t0 - h), min(1.0, t0 + h)

    def f(t):
        return _low_median_sq(prev, cur, np.array([t]))[0]

    x1, x2 = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > refine_tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    return float(x) if fx < f0 else float(t0)


def finite_sample_estimate(kind, sample):
    """AR(1) estimate of ``kind`` from an observed path."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.OLS:
        return ols_estimate(sample)
    if kind is EstimatorKind.DR:
        return dr_estimate(sample)
    if kind is EstimatorKind.LMS:
        return lms_estimate(sample)
    raise ValueError(f"{kind.value} is not an AR(1) estimator")
