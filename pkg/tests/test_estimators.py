import math

import numpy as np
import pytest
from scipy import optimize, stats

from arbdp.estimators import (
    EstimatorKind,
    LmsConfig,
    NoRootError,
    DegenerateSampleError,
    dr_equation_rhs,
    dr_estimate,
    dr_functional,
    dr_limit_rhs,
    finite_sample_estimate,
    functional,
    lms_constraint_rhs,
    lms_estimate,
    lms_functional,
    lms_limit_scale,
    lms_scale,
    ols_estimate,
    ols_functional,
    tau_squared,
)
from arbdp.model import simulate_ar1

THETA_GRID = np.round(np.linspace(-0.9, 0.9, 19), 12)
ROOT_TOL = 1e-10
FISHER_TOL = 1e-4
MC_DRAWS = 2_000_000


def _mc_contaminated_pairs(theta, p, zeta, n, seed):
    """(lagged, current) observations of a contaminated stationary AR(1)."""
    rng = np.random.default_rng(seed)
    y0 = rng.standard_normal(n) / math.sqrt(1 - theta**2)
    y1 = theta * y0 + rng.standard_normal(n)
    hit = rng.random((2, n)) < p
    sgn = np.where(rng.random((2, n)) < 0.5, -1.0, 1.0)
    return y0 + hit[0] * sgn[0] * zeta, y1 + hit[1] * sgn[1] * zeta


class TestKinds:
    def test_parse(self):
        assert EstimatorKind.parse("ols") is EstimatorKind.OLS
        assert EstimatorKind.parse("Dr") is EstimatorKind.DR
        with pytest.raises(ValueError):
            EstimatorKind.parse("mm")

    def test_no_functional_for_regression_demos(self):
        with pytest.raises(ValueError):
            functional("ClampedOLS", 0.1, 0.0, 0.0)


class TestOLS:
    def test_worked_value(self):
        # 0.5 / (1 + 0.05 * 0.75 * 100)
        assert ols_functional(0.5, 0.05, 10.0) == pytest.approx(0.5 / 4.75, rel=1e-15)

    def test_infinite_zeta(self):
        assert ols_functional(0.5, 0.01, math.inf) == 0.0
        assert ols_functional(0.5, 0.0, math.inf) == 0.5

    @pytest.mark.parametrize("kw", [dict(theta=1.0, p=0.1, zeta=1.0), dict(theta=0.1, p=1.5, zeta=1.0),
                                    dict(theta=0.1, p=0.1, zeta=-2.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ols_functional(**kw)

    def test_monte_carlo(self):
        theta, p, zeta = 0.5, 0.05, 10.0
        prev, cur = _mc_contaminated_pairs(theta, p, zeta, MC_DRAWS, 1)
        est = np.dot(prev, cur) / np.dot(prev, prev)
        assert est == pytest.approx(ols_functional(theta, p, zeta), abs=0.01)


def _lms_rhs_oracle(c, tt, theta, p, zeta):
    """Mixture probability via scipy's noncentral chi-square."""
    tau2 = 1 + (theta - tt) ** 2 / (1 - theta**2)
    q = 1 - p
    parts = [(q * q, 0.0), (p * q, zeta**2), (p * q, (tt * zeta) ** 2),
             (p * p / 2, ((1 - tt) * zeta) ** 2), (p * p / 2, ((1 + tt) * zeta) ** 2)]
    total = 0.0
    for w, nc in parts:
        if w == 0:
            continue
        x, d2 = c / tau2, nc / tau2
        if d2 == 0:
            total += w * stats.chi2.cdf(x, 1)
        elif d2 < 1e3:
            total += w * stats.ncx2.cdf(x, 1, d2)
        else:
            # scipy's ncx2 overflows here; use P[|Z + d| <= sqrt(x)]
            d, r = math.sqrt(d2), math.sqrt(x)
            total += w * (stats.norm.sf(d - r) - stats.norm.sf(d + r))
    return total


def _lms_scale_oracle(tt, theta, p, zeta):
    # coarse scan for a sign change of rhs - 1/2, then brentq
    grid = np.concatenate([[0.0], np.logspace(-8, 12, 2001)])
    f = np.array([_lms_rhs_oracle(c, tt, theta, p, zeta) - 0.5 for c in grid])
    i = np.flatnonzero((f[:-1] < 0) & (f[1:] >= 0))[0]
    return optimize.brentq(lambda c: _lms_rhs_oracle(c, tt, theta, p, zeta) - 0.5,
                           grid[i], grid[i + 1], xtol=1e-13, rtol=1e-13)


class TestLMS:
    def test_tau(self):
        assert tau_squared(0.0, 0.0) == 1.0
        assert tau_squared(0.6, -0.2) == pytest.approx(1 + 0.64 / 0.64)

    @pytest.mark.parametrize("tt, theta, p, zeta", [
        (0.0, 0.0, 0.0, 0.0), (0.3, 0.5, 0.1, 3.0), (-0.7, 0.2, 0.2, 10.0),
        (0.9, 0.9, 0.25, 100.0), (1.0, -0.4, 0.3, 7.0), (0.0, 0.6, 0.45, 1e3),
    ])
    def test_scale_against_oracle(self, tt, theta, p, zeta):
        c = lms_scale(tt, theta, p, zeta)
        assert c == pytest.approx(_lms_scale_oracle(tt, theta, p, zeta), rel=1e-7)
        assert lms_constraint_rhs(c, tt, theta, p, zeta) == pytest.approx(0.5, abs=1e-9)

    def test_clean_scale_is_chi2_median(self):
        assert lms_scale(0.2, 0.2, 0.0, 0.0) == pytest.approx(stats.chi2.ppf(0.5, 1), rel=1e-10)

    def test_rhs_monte_carlo(self):
        theta, tt, p, zeta, c = 0.4, 0.25, 0.15, 2.0, 1.3
        prev, cur = _mc_contaminated_pairs(theta, p, zeta, MC_DRAWS, 2)
        hit = (cur - tt * prev) ** 2 <= c
        est, se = hit.mean(), hit.std() / math.sqrt(MC_DRAWS)
        assert abs(lms_constraint_rhs(c, tt, theta, p, zeta) - est) <= 4 * se

    def test_limit_scale_matches_large_zeta(self):
        for tt in (-1.0, -0.4, 0.0, 0.35, 1.0):
            lim = lms_limit_scale(tt, 0.3, 0.1)
            assert lms_scale(tt, 0.3, 0.1, 1e7) == pytest.approx(lim, rel=1e-6)

    def test_limit_unbounded_when_mass_small(self):
        # generic slope keeps (1 - p)^2 < 1/2 at p = 0.3
        assert math.isinf(lms_limit_scale(0.5, 0.0, 0.3))
        assert math.isfinite(lms_limit_scale(0.0, 0.0, 0.3))

    def test_no_root_past_half(self):
        with pytest.raises(NoRootError):
            lms_functional(0.3, 0.6, math.inf)

    def test_grid_symmetric(self):
        g = LmsConfig(theta_tilde_grid=11).grid()
        assert np.array_equal(g, -g[::-1])
        assert g[5] == 0.0 and g[0] == -1.0 and g[-1] == 1.0

    @pytest.mark.parametrize("p, zeta", [(0.0, 5.0), (0.2, 0.0)])
    def test_fisher_consistency(self, p, zeta):
        got = lms_functional(THETA_GRID, p, zeta)
        assert np.max(np.abs(got - THETA_GRID)) <= FISHER_TOL

    def test_odd_symmetry(self):
        got = lms_functional(THETA_GRID, 0.1, 4.0)
        assert np.max(np.abs(got + got[::-1])) <= 1e-6

    def test_functional_is_global_min(self):
        theta, p, zeta = 0.6, 0.15, 3.0
        t = lms_functional(theta, p, zeta)
        dense = np.linspace(-1, 1, 4001)
        c = lms_scale(dense, theta, p, zeta)
        assert lms_scale(t, theta, p, zeta) <= c.min() * (1 + 1e-9)

    def test_infinite_zeta_lands_on_special_slopes(self):
        # p = 0.25: generic slopes keep bounded mass 0.5625, slope 0 keeps 0.75,
        # slope 1 keeps 0.59375; hand-computed winners are 0 and 1
        got = lms_functional(np.array([0.3, 0.8]), 0.25, math.inf)
        assert got[0] == 0.0 and got[1] == 1.0


class TestDR:
    def test_nine_terms_reduce(self):
        from arbdp.specfun import ratio_normal_cdf

        theta, p, zeta, c = 0.35, 0.2, 3.0, np.linspace(-2, 2, 41)
        var = 1 / (1 - theta**2)
        q = 1 - p
        w = {0: q, 1: p / 2, -1: p / 2}
        nine = sum(w[s1] * w[s0] * ratio_normal_cdf(c, s1 * zeta, s0 * zeta, var, theta)
                   for s1 in (-1, 0, 1) for s0 in (-1, 0, 1))
        assert np.allclose(dr_equation_rhs(c, theta, p, zeta), nine, atol=1e-14)

    def test_rhs_monte_carlo(self):
        theta, p, zeta, c = -0.3, 0.2, 1.5, 0.1
        prev, cur = _mc_contaminated_pairs(theta, p, zeta, MC_DRAWS, 3)
        hit = cur / prev <= c
        est, se = hit.mean(), hit.std() / math.sqrt(MC_DRAWS)
        assert abs(dr_equation_rhs(c, theta, p, zeta) - est) <= 4 * se

    def test_limit_matches_large_zeta(self):
        c = np.array([-1.5, -0.7, 0.3, 0.8, 1.4])
        for theta in (-0.6, 0.0, 0.5):
            assert np.allclose(dr_equation_rhs(c, theta, 0.2, 1e8), dr_limit_rhs(c, theta, 0.2), atol=1e-6)

    def test_median_on_clean_model(self):
        assert np.max(np.abs(dr_functional(THETA_GRID, 0.0, 0.0) - THETA_GRID)) <= FISHER_TOL
        assert np.max(np.abs(dr_functional(THETA_GRID, 0.3, 0.0) - THETA_GRID)) <= FISHER_TOL

    def test_odd_symmetry(self):
        for zeta in (2.0, 1e3, math.inf):
            got = dr_functional(THETA_GRID, 0.2, zeta)
            assert np.max(np.abs(got + got[::-1])) <= 10 * ROOT_TOL

    def test_root_definition(self):
        theta, p, zeta = 0.5, 0.3, 50.0
        c = dr_functional(theta, p, zeta)
        assert dr_equation_rhs(c + 1e-8, theta, p, zeta) >= 0.5
        assert dr_equation_rhs(c - 1e-8, theta, p, zeta) < 0.5

    def test_monte_carlo_median(self):
        theta, p, zeta = 0.5, 0.1, 3.0
        prev, cur = _mc_contaminated_pairs(theta, p, zeta, MC_DRAWS, 4)
        assert np.median(cur / prev) == pytest.approx(dr_functional(theta, p, zeta), abs=5e-3)

    def test_high_p_limit_lands_on_jump(self):
        # above one half the limit mixture has its median at an outlier atom
        v = dr_functional(0.5, 0.9, math.inf)
        assert min(abs(v), abs(abs(v) - 1)) < 1e-8


class TestFiniteSample:
    def test_exact_geometric_path(self):
        y = 0.7 ** np.arange(30) * 3.0
        assert ols_estimate(y) == pytest.approx(0.7, abs=1e-12)
        assert dr_estimate(y) == pytest.approx(0.7, abs=1e-12)
        assert lms_estimate(y) == pytest.approx(0.7, abs=1e-6)

    def test_consistency(self):
        s = simulate_ar1(0.6, 20000, seed=0)
        for kind in ("OLS", "DR", "LMS"):
            assert finite_sample_estimate(kind, s) == pytest.approx(0.6, abs=0.05)

    def test_lms_low_median(self):
        # four residuals: the low median is the 3rd smallest
        y = np.array([1.0, 1.0, 2.0, 2.0, 3.0])
        prev, cur = y[:-1], y[1:]
        t = lms_estimate(y)
        r = np.sort((cur - t * prev) ** 2)
        for s in np.linspace(-1, 1, 201):
            assert r[2] <= np.sort((cur - s * prev) ** 2)[2] + 1e-9

    def test_dr_drops_zero_lags(self):
        y = np.array([1.0, 0.0, 2.0, 1.0, 0.5])
        # ratios with nonzero lag: 0/1, 1/2, 0.5/1
        assert dr_estimate(y) == pytest.approx(0.5)

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            ols_estimate(np.zeros(5))
        with pytest.raises(ValueError):
            dr_estimate(np.array([1.0, 2.0]))

    def test_wrong_kind(self):
        with pytest.raises(ValueError):
            finite_sample_estimate("ClampedOLS", np.arange(5.0))
