"""Breakdown points of AR(1) estimators under additive outliers.

Badness sets, their Lebesgue measure and breakdown-point searches for the
OLS, least-median-of-squares and deepest-regression estimators of an AR(1)
coefficient, together with the special functions they need.
"""
from .breakdown import (
    BreakdownReport,
    IntervalSet,
    ProcessFamily,
    asymptotic_bdp,
    badness_set,
    finite_sample_bdp,
    intersect,
    measure,
)
from .estimators import (
    EstimatorKind,
    FunctionalInput,
    LmsConfig,
    dr_functional,
    finite_sample_estimate,
    lms_functional,
    ols_functional,
)
from .model import ARParams, Contamination, Sample, contaminate, simulate_ar1
from .specfun import noncentral_chisq_cdf, normal_cdf, ratio_normal_cdf

__version__ = "0.1.0"
