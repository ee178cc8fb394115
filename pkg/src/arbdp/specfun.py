"""Cumulative distribution functions used by the LMS and DR functionals.

Three families are provided:

* the standard normal CDF,
* the noncentral chi-square CDF (Poisson mixture of central chi-squares,
  plus an exact closed form for one degree of freedom),
* the CDF of the ratio of two correlated normals with equal variances,
  computed exactly through a bivariate-normal orthant reduction.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "NoncentralChiSqArgs",
    "RatioNormalArgs",
    "normal_cdf",
    "bivariate_normal_cdf",
    "noncentral_chisq_cdf",
    "chisq1_cdf",
    "ratio_normal_cdf",
]

# Poisson tail mass left out of the mixture series.
SERIES_TAIL = 1e-14
# P[(Z + d)^2 <= x] <= Phi(sqrt(x) - d) < 3.2e-14 once d - sqrt(x) > 7.5.
UNDERFLOW_GAP = 7.5
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class NoncentralChiSqArgs:
    x: float
    delta2: float
    df: int = 1

    def __post_init__(self):
        _check_ncx2(self.x, self.delta2, self.df)


@dataclass(frozen=True)
class RatioNormalArgs:
    x: float
    a: float
    b: float
    var: float
    rho: float

    def __post_init__(self):
        _check_ratio(self.var, self.rho)


def _check_ncx2(x, delta2, df):
    if np.any(np.asarray(x) < 0) or np.any(np.isnan(x)):
        raise ValueError("noncentral chi-square: x must be >= 0")
    if np.any(np.asarray(delta2) < 0) or np.any(np.isnan(delta2)):
        raise ValueError("noncentral chi-square: delta2 must be >= 0")
    if int(df) != df or df < 1:
        raise ValueError("noncentral chi-square: df must be a positive integer")


def _check_ratio(var, rho):
    if np.any(np.asarray(var) <= 0):
        raise ValueError("ratio of normals: var must be > 0")
    if np.any(np.abs(rho) >= 1):
        raise ValueError("ratio of normals: |rho| must be < 1")


def normal_cdf(x):
    """Standard normal CDF."""
    return special.ndtr(x)


def bivariate_normal_cdf(h, k, r, s=None, ah=None, ak=None):
    """P[X <= h, Y <= k] for standard normals with correlation ``r``.

    Owen's T representation with second arguments ``ah = (k - r h)/(h s)``
    and ``ak = (h - r k)/(k s)``. Callers may pass ``s = sqrt(1 - r**2)``
    and the two ratios precomputed, which avoids cancellation when ``|r|`` is
    within rounding of 1.
    """
    h, k, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (h, k, r)))
    if s is None:
        s = np.sqrt(np.clip(1.0 - r * r, 0.0, None))
    s = np.broadcast_to(np.asarray(s, dtype=float), h.shape)

    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (k - r * h) / (h * s) if ah is None else np.broadcast_to(ah, h.shape)
        ak = (h - r * k) / (k * s) if ak is None else np.broadcast_to(ak, h.shape)
    # T(0, +-inf) = +-1/4; the sign follows the other coordinate.
    th = np.where(h == 0, 0.25 * np.sign(k), special.owens_t(h, np.nan_to_num(ah, nan=0.0)))
    tk = np.where(k == 0, 0.25 * np.sign(h), special.owens_t(k, np.nan_to_num(ak, nan=0.0)))
    hk = h * k
    beta = np.where((hk < 0) | ((hk == 0) & (h + k < 0)), 0.5, 0.0)
    out = 0.5 * (special.ndtr(h) + special.ndtr(k)) - th - tk - beta
    both_zero = (h == 0) & (k == 0)
    if np.any(both_zero):
        out = np.where(both_zero, 0.25 + np.arctan2(r, s) / _TWO_PI, out)
    out = np.clip(out, 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def chisq1_cdf(x, delta2):
    """Noncentral chi-square CDF with one degree of freedom.

    Exact: ``P[(Z + d)^2 <= x] = Phi(sqrt(x) - d) - Phi(-sqrt(x) - d)``.
    """
    rx = np.sqrt(x)
    d = np.sqrt(delta2)
    # ndtr(-rx - d) is tiny compared to ndtr(rx - d) only when rx - d is not;
    # the complementary form keeps accuracy in the right tail.
    upper = special.ndtr(rx - d) - special.ndtr(-rx - d)
    right = special.ndtr(rx + d) - special.ndtr(d - rx)
    return np.clip(np.where(rx - d > 0, right, upper), 0.0, 1.0)


def _ncx2_series(x, delta2, df):
    if x == 0.0:
        return 0.0
    if delta2 == 0.0:
        return float(special.gammainc(0.5 * df, 0.5 * x))
    if np.sqrt(delta2) - np.sqrt(x) > UNDERFLOW_GAP:
        return 0.0
    mu = 0.5 * delta2
    half_x = 0.5 * x
    mode = int(np.floor(mu))

    def weight(j):
        return np.exp(j * np.log(mu) - mu - special.gammaln(j + 1.0))

    total = 0.0
    w_mode = weight(mode)
    # upward from the mode; w_{j+1} / w_j = mu / (j + 1)
    j, w = mode, w_mode
    while True:
        total += w * special.gammainc(0.5 * df + j, half_x)
        ratio = mu / (j + 2.0)
        w_next = w * mu / (j + 1.0)
        if ratio < 1.0 and w_next / (1.0 - ratio) < SERIES_TAIL:
            break
        j, w = j + 1, w_next
    # downward; w_{j-1} / w_j = j / mu
    j, w = mode, w_mode
    while j > 0:
        w = w * j / mu
        j -= 1
        total += w * special.gammainc(0.5 * df + j, half_x)
        ratio = j / mu
        if ratio < 1.0 and w * ratio / (1.0 - ratio) < SERIES_TAIL:
            break
    return min(max(total, 0.0), 1.0)


_ncx2_vec = np.vectorize(_ncx2_series, otypes=[float])


def noncentral_chisq_cdf(x, delta2=None, df=1):
    """P[Q <= x] for Q noncentral chi-square with ``df`` degrees of freedom.

    Poisson mixture of central chi-square CDFs summed outward from the Poisson
    mode until the neglected weight is below ``SERIES_TAIL``. When
    ``sqrt(delta2) - sqrt(x) > UNDERFLOW_GAP`` the CDF is below 3.2e-14 and
    zero is returned without summing.
    """
    if isinstance(x, NoncentralChiSqArgs):
        x, delta2, df = x.x, x.delta2, x.df
    _check_ncx2(x, delta2, df)
    out = _ncx2_vec(np.asarray(x, dtype=float), np.asarray(delta2, dtype=float), int(df))
    return out[()] if out.ndim == 0 else out


def ratio_normal_cdf(x, a=0.0, b=0.0, var=1.0, rho=0.0):
    """P[N1 / N2 <= x] for jointly normal (N1, N2).

    N1 and N2 have means ``a`` and ``b``, common variance ``var`` and
    correlation ``rho``. With ``U = N1 - x N2``,

        P[N1/N2 <= x] = P[U <= 0, N2 > 0] + P[U >= 0, N2 < 0],

    and both orthant probabilities are bivariate normal CDFs.
    """
    if isinstance(x, RatioNormalArgs):
        x, a, b, var, rho = x.x, x.a, x.b, x.var, x.rho
    _check_ratio(var, rho)
    x, a, b, var, rho = (np.asarray(v, dtype=float) for v in (x, a, b, var, rho))
    sd = np.sqrt(var)
    out = np.empty(np.broadcast(x, a, b, var, rho).shape)

    inf = np.isinf(x)
    xf = np.where(inf, 0.0, x)
    q = 1.0 - 2.0 * rho * xf + xf * xf
    sq = np.sqrt(q)
    # corr(U, N2) = (rho - x)/sqrt(q); sqrt(1 - corr^2) = sqrt(1 - rho^2)/sqrt(q)
    r = (rho - xf) / sq
    s = np.sqrt((1.0 - rho) * (1.0 + rho)) / sq
    h = -(a - xf * b) / (sd * sq)
    k = b / sd
    # Owen T ratios in closed form; the generic ones cancel badly for large |x|
    sr = np.sqrt((1.0 - rho) * (1.0 + rho))
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (b * (1.0 - rho * xf) + a * (xf - rho)) / ((xf * b - a) * sr)
        ak = (rho * b - a) / (b * sr)
    res = (bivariate_normal_cdf(h, k, -r, s, ah, ak)
           + bivariate_normal_cdf(-h, -k, -r, s, ah, ak))
    out[...] = np.where(inf, np.where(x > 0, 1.0, 0.0), res)
    out = np.clip(out, 0.0, 1.0)
    return out[()] if out.ndim == 0 else out
