"""AR(1) processes, additive outliers and the two regression demo estimators.

Random numbers come from numpy's PCG64 generator (``np.random.default_rng``)
so every seeded call reproduces the same stream on every platform.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal

__all__ = [
    "ARParams",
    "Contamination",
    "Sample",
    "DegenerateDesignError",
    "simulate_ar1",
    "contaminate",
    "regression_sample",
    "contaminate_pairs",
    "clamped_ols_estimator",
    "frac_counterexample_estimator",
    "write_sample_csv",
    "read_sample_csv",
]


class DegenerateDesignError(ValueError):
    """All regressor values are equal, so the OLS slope is undefined."""


@dataclass(frozen=True)
class ARParams:
    theta: float
    extended: bool = False

    def __post_init__(self):
        bound_ok = abs(self.theta) <= 1 if self.extended else abs(self.theta) < 1
        if not bound_ok:
            raise ValueError(f"theta={self.theta} outside the allowed AR(1) range")


@dataclass(frozen=True)
class Contamination:
    """Additive outlier law.

    Asymptotic mode uses ``p``: each time point is hit independently with
    probability ``p``. Finite-sample mode uses ``k`` outliers, at the 1-based
    time indices in ``positions`` when given. ``signs`` (+1/-1 per outlier)
    overrides the fair coin.
    """

    p: float = 0.0
    zeta: float = 0.0
    k: int = 0
    positions: tuple | None = None
    signs: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not self.zeta >= 0:
            raise ValueError("zeta must be >= 0")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.positions is not None:
            object.__setattr__(self, "positions", tuple(int(i) for i in self.positions))
            if len(self.positions) != self.k:
                raise ValueError("len(positions) must equal k")
            if len(set(self.positions)) != len(self.positions):
                raise ValueError("positions must be distinct")
        if self.signs is not None:
            object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
            if any(s not in (-1, 1) for s in self.signs):
                raise ValueError("signs must be +1 or -1")

    @property
    def finite(self):
        return self.k > 0 or self.positions is not None


@dataclass(frozen=True)
class Sample:
    values: np.ndarray
    seed: int | None = None
    outliers: tuple = field(default=(), compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("sample values must be one-dimensional")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    def __len__(self):
        return self.values.size


def simulate_ar1(params, n, seed):
    """Stationary AR(1) path ``Y_t = theta Y_{t-1} + e_t`` with N(0, 1) noise.

    ``Y_1`` is drawn from the stationary law N(0, 1/(1 - theta^2)).
    """
    if isinstance(params, (int, float)):
        params = ARParams(float(params))
    theta = params.theta
    if abs(theta) >= 1:
        raise ValueError("simulate_ar1 needs |theta| < 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    e[0] /= math.sqrt((1.0 - theta) * (1.0 + theta))
    return Sample(signal.lfilter([1.0], [1.0, -theta], e), seed)


def _shifts(n, c, rng):
    """(0-based indices, signed shifts) for one contamination draw."""
    if c.finite:
        if c.k > n:
            raise ValueError(f"k={c.k} exceeds n={n}")
        if c.positions is not None:
            pos = np.asarray(c.positions, dtype=int)
            if pos.size and (pos.min() < 1 or pos.max() > n):
                raise ValueError(f"outlier positions must lie in 1..{n}")
            idx = pos - 1
        else:
            idx = np.sort(rng.choice(n, size=c.k, replace=False))
    else:
        idx = np.flatnonzero(rng.random(n) < c.p)
    if c.signs is not None:
        if len(c.signs) != idx.size:
            raise ValueError("len(signs) must match the number of outliers")
        signs = np.asarray(c.signs, dtype=float)
    else:
        signs = np.where(rng.random(idx.size) < 0.5, -1.0, 1.0)
    return idx, signs


def contaminate(sample, c, seed=0):
    """Observe ``Y + Z``: add ``+-zeta`` at the outlier positions.

    Entries that receive no outlier are returned unchanged.
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    if c.zeta == 0 or (not c.finite and c.p == 0):
        return Sample(sample.values.copy(), sample.seed)
    rng = np.random.default_rng(seed)
    idx, signs = _shifts(sample.n, c, rng)
    values = sample.values.copy()
    values[idx] += signs * c.zeta
    return Sample(values, sample.seed, tuple(int(i) + 1 for i in idx))


def regression_sample(n, slope, rng):
    """Simple-regression data: N(0, 1) regressors, unit-variance errors."""
    x = rng.standard_normal(n)
    y = slope * x + rng.standard_normal(n)
    return x, y


def contaminate_pairs(x, y, c, seed=0):
    """Leverage outliers for regression: ``(x, y) -> (x + zeta, y +- zeta^2)``.

    A single such pair sends the OLS slope to ``+-zeta``.
    """
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    if c.zeta == 0 or (not c.finite and c.p == 0):
        return x, y
    idx, signs = _shifts(x.size, c, np.random.default_rng(seed))
    x[idx] += c.zeta
    y[idx] += signs * c.zeta * c.zeta
    return x, y


def _ols_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    sxx = np.dot(dx, dx)
    if sxx == 0:
        raise DegenerateDesignError("all regressor values are equal")
    return float(np.dot(dx, y - y.mean()) / sxx)


def clamped_ols_estimator(x, y, n=None):
    """OLS slope clamped to ``[-n, n]`` (``n`` defaults to the sample size)."""
    n = len(x) if n is None else n
    return max(-n, min(n, _ols_slope(x, y)))


def frac_counterexample_estimator(x, y, n=None):
    """Clamped OLS plus ``2 (frac(x_1) - 1) / n``.

    The perturbation keeps the fractional part of the first observation's
    regressor in the estimate. Because ``frac(x_1 + zeta) = frac(x_1)`` for
    integer ``zeta``, that information survives any integer-magnitude
    outlier.
    """
    n = len(x) if n is None else n
    x1 = float(x[0])
    return clamped_ols_estimator(x, y, n) + 2.0 * ((x1 - math.floor(x1)) - 1.0) / n


def write_sample_csv(sample, path):
    """Single-column CSV with header ``value``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value"])
        for v in np.asarray(getattr(sample, "values", sample), dtype=float):
            w.writerow([repr(float(v))])
    return path


def read_sample_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["value"]:
        raise ValueError(f"{path}: expected header 'value'")
    return Sample(np.array([float(r[0]) for r in rows[1:]]))
