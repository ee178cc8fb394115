"""Badness sets, their Lebesgue measure, and breakdown-point searches.

The badness set of an estimator under a contamination is the set of values
the estimator can take as the clean process ranges over a family. An
estimator has broken down once, for every compact family, the contaminated
badness set can be pushed (by choosing the outlier magnitude) onto a null set
of the clean one.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .estimators import EstimatorKind, LmsConfig, NoRootError, functional
from .model import (
    Contamination,
    clamped_ols_estimator,
    contaminate_pairs,
    frac_counterexample_estimator,
    regression_sample,
)

log = logging.getLogger(__name__)

__all__ = [
    "IntervalSet",
    "ProcessFamily",
    "BreakdownReport",
    "TraceRow",
    "measure",
    "intersect",
    "badness_set",
    "intersection_measure",
    "asymptotic_bdp",
    "finite_sample_bdp",
    "DEFAULT_WITNESSES",
    "DEFAULT_ZETA_SCHEDULE",
]

DEFAULT_ZETA_SCHEDULE = (1e1, 1e2, 1e3, 1e4, 1e6, math.inf)
MERGE_FACTOR = 4.0


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed intervals, kept sorted and disjoint."""

    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals, 0.0))

    @classmethod
    def from_points(cls, points, gap):
        """Cover sorted sample points, bridging gaps no wider than ``gap``."""
        pts = np.sort(np.asarray(points, dtype=float).ravel())
        pts = pts[np.isfinite(pts)]
        if pts.size == 0:
            return cls()
        breaks = np.flatnonzero(np.diff(pts) > gap)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [pts.size - 1]])
        return cls(tuple((float(pts[s]), float(pts[e])) for s, e in zip(starts, ends)))

    def measure(self):
        return float(sum(hi - lo for lo, hi in self.intervals))

    def intersect(self, other):
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))

    def union(self, other):
        return IntervalSet(self.intervals + other.intervals)

    def __contains__(self, x):
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def lo(self):
        return self.intervals[0][0] if self.intervals else math.nan

    @property
    def hi(self):
        return self.intervals[-1][1] if self.intervals else math.nan


def _normalize(intervals, gap):
    items = sorted((float(lo), float(hi)) for lo, hi in intervals)
    for lo, hi in items:
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
    merged = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1] + gap:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


def measure(s):
    """Lebesgue measure of an interval set."""
    return s.measure()


def intersect(a, b):
    return a.intersect(b)


@dataclass(frozen=True)
class ProcessFamily:
    """Compact range of AR(1) coefficients, sampled on a grid.

    ``spacing="atanh"`` places the grid uniformly in ``atanh(theta)``, which
    concentrates points near +-1 where the functionals vary fastest.
    ``extended=True`` admits the closed range [-1, 1] (OLS only).
    """

    theta_lo: float = -0.9
    theta_hi: float = 0.9
    grid_points: int = 2001
    spacing: str = "uniform"
    extended: bool = False

    def __post_init__(self):
        lo, hi = self.theta_lo, self.theta_hi
        if not -1.0 <= lo < hi <= 1.0:
            raise ValueError(f"need -1 <= theta_lo < theta_hi <= 1, got [{lo}, {hi}]")
        if not self.extended and (lo <= -1.0 or hi >= 1.0):
            raise ValueError("the stationary family needs -1 < theta_lo < theta_hi < 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.spacing not in ("uniform", "atanh"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "atanh" and self.extended:
            raise ValueError("atanh spacing needs a stationary family")

    def grid(self):
        return _grid(self)

    def contains(self, other):
        return self.theta_lo <= other.theta_lo and other.theta_hi <= self.theta_hi

    @property
    def label(self):
        return f"[{self.theta_lo:g},{self.theta_hi:g}]"


@lru_cache(maxsize=64)
def _grid(family):
    if family.spacing == "atanh":
        u = np.linspace(np.arctanh(family.theta_lo), np.arctanh(family.theta_hi), family.grid_points)
        g = np.tanh(u)
        g[0], g[-1] = family.theta_lo, family.theta_hi
    else:
        g = np.linspace(family.theta_lo, family.theta_hi, family.grid_points)
    g.setflags(write=False)
    return g


# The last five witnesses exhaust (-1, 1); see asymptotic_bdp.
DEFAULT_WITNESSES = (
    ProcessFamily(-0.9, 0.9),
    ProcessFamily(-0.5, 0.5),
    ProcessFamily(0.1, 0.8),
    ProcessFamily(-0.99, 0.99, spacing="atanh"),
    ProcessFamily(-0.999, 0.999, spacing="atanh"),
    ProcessFamily(-0.9999, 0.9999, spacing="atanh"),
    ProcessFamily(-0.99999, 0.99999, spacing="atanh"),
    ProcessFamily(-0.999999, 0.999999, spacing="atanh"),
)


def _evaluate(kind, family, p, zeta, lms_cfg):
    theta = family.grid()
    if family.extended and kind is not EstimatorKind.OLS:
        raise ValueError("only OLS is defined on the extended family")
    if family.extended:
        if math.isinf(zeta):
            return theta.copy() if p == 0 else np.where(np.abs(theta) == 1.0, theta, 0.0)
        return theta / (1.0 + p * (1.0 - theta * theta) * zeta * zeta)
    return np.asarray(functional(kind, theta, p, zeta, lms_cfg))


@lru_cache(maxsize=256)
def _reference(kind, family, lms_cfg):
    image = _evaluate(kind, family, 0.0, 0.0, lms_cfg)
    spacing = float(np.max(np.diff(np.sort(image))))
    gap = MERGE_FACTOR * spacing
    return IntervalSet.from_points(image, gap), gap


def merge_gap(kind, family, lms_cfg=LmsConfig()):
    """Gap bridged when covering image points: 4x the clean-image spacing."""
    return _reference(EstimatorKind.parse(kind), family, lms_cfg)[1]


def badness_set(kind, family, p, zeta, merge_gap=None, lms_cfg=LmsConfig()):
    """Image of the asymptotic functional over the family's theta grid.

    Image points are sorted and consecutive points closer than ``merge_gap``
    are joined into one interval. An estimator without a finite value
    anywhere on the family (LMS with no bounded residual median) has an
    empty badness set.
    """
    kind = EstimatorKind.parse(kind)
    if merge_gap is None:
        merge_gap = _reference(kind, family, lms_cfg)[1]
    try:
        image = _evaluate(kind, family, p, zeta, lms_cfg)
    except NoRootError:
        return IntervalSet()
    return IntervalSet.from_points(image, merge_gap)


def intersection_measure(kind, family, p, zeta, lms_cfg=LmsConfig()):
    """measure(badness(p, zeta) & badness(0)) on ``family``."""
    kind = EstimatorKind.parse(kind)
    clean, gap = _reference(kind, family, lms_cfg)
    return badness_set(kind, family, p, zeta, gap, lms_cfg).intersect(clean).measure()


@dataclass(frozen=True)
class TraceRow:
    search_var: float
    zeta: float
    measure: float
    broken: bool


@dataclass
class BreakdownReport:
    estimator: EstimatorKind
    mode: str
    bdp: float
    trace: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_csv(self):
        """Trace as ``estimator,mode,search_var,zeta,measure`` rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "mode", "search_var", "zeta", "measure"])
        for row in self.trace:
            w.writerow([
                self.estimator.value,
                self.mode,
                _fmt(row.search_var),
                _fmt(row.zeta),
                _fmt(row.measure),
            ])
        return buf.getvalue()

    def summary_line(self):
        return f"{self.estimator.value},{self.bdp:.3f}"


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def _witness_order(witnesses):
    # largest first: a surviving continuum there settles "not broken" early
    return sorted(witnesses, key=lambda w: w.theta_lo - w.theta_hi)


def asymptotic_bdp(
    kind,
    witnesses: Sequence[ProcessFamily] = DEFAULT_WITNESSES,
    collapse_eps=1e-3,
    zeta_schedule: Sequence[float] = DEFAULT_ZETA_SCHEDULE,
    width=5e-4,
    lms_cfg=LmsConfig(),
    progress: Callable | None = None,
):
    """Smallest outlier fraction ``p`` at which the estimator breaks down.

    ``p`` is broken when every witness family W satisfies

        min over zeta in the schedule of measure(R(p, zeta; W) & R(0; W)) < collapse_eps.

    The witness set stands in for "every compact subset of (-1, 1)"; because
    the measure grows with W for nested families, the default witnesses end
    with ranges approaching +-1. Bisection over [0, 1] stops at ``width`` and
    returns the midpoint of the final bracket.

    The trace holds, per probed ``p``, the measure on the largest witness at
    each ``zeta``.
    """
    kind = EstimatorKind.parse(kind)
    if collapse_eps <= 0:
        raise ValueError("collapse_eps must be positive")
    sched = [float(z) for z in zeta_schedule]
    if not sched or sched != sorted(sched) or not math.isinf(sched[-1]):
        raise ValueError("zeta schedule must be ascending and end with inf")
    order = _witness_order(witnesses)
    if not order:
        raise ValueError("need at least one witness family")

    report = BreakdownReport(
        kind, "asymptotic", math.nan,
        thresholds={
            "collapse_eps": collapse_eps,
            "width": width,
            "zeta_schedule": tuple(sched),
            "witnesses": tuple(w.label for w in order),
            "grid_points": tuple(w.grid_points for w in order),
            "theta_tilde_grid": lms_cfg.theta_tilde_grid,
        },
    )
    verdicts = {}

    def classify(p):
        if p in verdicts:
            return verdicts[p]
        broken = True
        rows = []
        for i, fam in enumerate(order):
            if i == 0:
                ms = [intersection_measure(kind, fam, p, z, lms_cfg) for z in sched]
                rows = ms
                fam_broken = min(ms) < collapse_eps
            else:
                # later witnesses only need one collapsing zeta; try inf first
                fam_broken = any(
                    intersection_measure(kind, fam, p, z, lms_cfg) < collapse_eps
                    for z in reversed(sched)
                )
            if not fam_broken:
                broken = False
                break
        for z, m in zip(sched, rows):
            report.trace.append(TraceRow(p, z, m, broken))
        verdicts[p] = broken
        if progress is not None:
            progress(p, broken)
        log.info("%s p=%.6f broken=%s", kind.value, p, broken)
        return broken

    lo, hi = 0.0, 1.0
    if classify(lo):
        report.diagnostics.append("broken at p=0")
        report.bdp = 0.0
        return report
    if not classify(hi):
        report.diagnostics.append("not broken at p=1")
        report.bdp = 1.0
        return report
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if classify(mid):
            hi = mid
        else:
            lo = mid
    report.bdp = 0.5 * (lo + hi)

    report.trace.sort(key=lambda r: (r.search_var, r.zeta))
    probed = sorted(verdicts.items())
    first_broken = next((p for p, b in probed if b), None)
    if first_broken is not None and any(not b for p, b in probed if p > first_broken):
        report.diagnostics.append("non-monotone classification in p")
    return report


# ----------------------------------------------------------- finite sample

def _adversarial_configs(n, k, zeta_schedule, max_position_sets=8):
    """Outlier placements for ``k`` outliers: position sets x 2 signs x zeta."""
    idx = np.arange(1, n + 1)
    sets = []
    for start in np.unique(np.linspace(1, n - k + 1, min(max_position_sets // 2, n - k + 1)).astype(int)):
        sets.append(tuple(range(start, start + k)))
    if k > 1:
        for off in range(min(max_position_sets // 2, n // k)):
            spread = tuple(int(v) for v in idx[off::max(1, n // k)][:k])
            if len(spread) == k:
                sets.append(spread)
    sets = list(dict.fromkeys(sets))
    for positions in sets:
        for sign_kind in ("plus", "alternate"):
            signs = tuple(1 if (sign_kind == "plus" or i % 2 == 0) else -1 for i in range(k))
            for z in zeta_schedule:
                yield positions, signs, float(z)


def _regression_mesh(n, trials, seed):
    rng = np.random.default_rng(seed)
    slopes = np.linspace(-n, n, trials)
    return [regression_sample(n, beta, rng) for beta in slopes]


def _ar_mesh(family, n, trials, seed):
    from .model import ARParams, simulate_ar1

    thetas = np.linspace(family.theta_lo, family.theta_hi, trials)
    return [simulate_ar1(ARParams(float(t)), n, seed + i) for i, t in enumerate(thetas)]


def finite_sample_bdp(
    kind,
    n=20,
    trials=200,
    collapse_eps=1e-3,
    zeta_schedule: Sequence[float] = (1e1, 1e3, 1e6, 1e9),
    family: ProcessFamily = ProcessFamily(-0.9, 0.9),
    seed=0,
    k_max=None,
    max_position_sets=8,
    samples: Iterable | None = None,
):
    """Finite-sample breakdown point ``(k - 1)/n`` by budgeted adversarial search.

    The clean family is a mesh of ``trials`` samples (AR(1) paths over the
    theta range of ``family`` for OLS/LMS/DR; regression data sets with
    slopes spread over [-n, n] for the clamped-OLS examples). For each ``k``
    the adversary tries every configuration from a fixed budget of position
    sets, two sign patterns and the ``zeta`` schedule; ``k`` breaks the
    estimator when some configuration drives the intersection measure below
    ``collapse_eps``.
    """
    kind = EstimatorKind.parse(kind)
    if n < 3:
        raise ValueError("n must be >= 3")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    k_max = n if k_max is None else min(k_max, n)
    regression = kind in (EstimatorKind.CLAMPED_OLS, EstimatorKind.FRAC_COUNTEREXAMPLE)

    if samples is None:
        samples = _regression_mesh(n, trials, seed) if regression else _ar_mesh(family, n, trials, seed)
    samples = list(samples)

    if regression:
        est = clamped_ols_estimator if kind is EstimatorKind.CLAMPED_OLS else frac_counterexample_estimator

        def image(cont):
            vals = []
            for x, y in samples:
                xc, yc = contaminate_pairs(x, y, cont)
                vals.append(est(xc, yc, n))
            return np.array(vals)
    else:
        from .estimators import finite_sample_estimate
        from .model import contaminate

        def image(cont):
            vals = []
            for s in samples:
                vals.append(finite_sample_estimate(kind, contaminate(s, cont, seed=0)))
            return np.array(vals)

    clean_img = image(Contamination())
    gap = MERGE_FACTOR * float(np.max(np.diff(np.sort(clean_img)))) if clean_img.size > 1 else 0.0
    clean = IntervalSet.from_points(clean_img, gap)

    report = BreakdownReport(
        kind, "finite-sample", math.nan,
        thresholds={
            "collapse_eps": collapse_eps,
            "zeta_schedule": tuple(zeta_schedule),
            "n": n,
            "trials": trials,
            "max_position_sets": max_position_sets,
            "merge_gap": gap,
        },
    )
    report.trace.append(TraceRow(0, 0.0, clean.measure(), clean.measure() < collapse_eps))
    if clean.measure() < collapse_eps:
        report.diagnostics.append("clean badness set already null")

    for k in range(1, k_max + 1):
        best = math.inf
        per_zeta = {}
        for positions, signs, z in _adversarial_configs(n, k, zeta_schedule, max_position_sets):
            cont = Contamination(k=k, zeta=z, positions=positions, signs=signs)
            m = IntervalSet.from_points(image(cont), gap).intersect(clean).measure()
            per_zeta[z] = min(per_zeta.get(z, math.inf), m)
            best = min(best, m)
        broken = best < collapse_eps
        for z in sorted(per_zeta):
            report.trace.append(TraceRow(k, z, per_zeta[z], broken))
        if broken:
            report.bdp = (k - 1) / n
            return report
    report.diagnostics.append(f"budget exceeded: no breakdown up to k={k_max}")
    report.bdp = math.nan
    return report
