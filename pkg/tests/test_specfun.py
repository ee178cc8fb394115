import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbdp.specfun import (
    NoncentralChiSqArgs,
    RatioNormalArgs,
    bivariate_normal_cdf,
    chisq1_cdf,
    noncentral_chisq_cdf,
    normal_cdf,
    ratio_normal_cdf,
)

# quad of the standard normal density over (-inf, 1], epsabs=epsrel=1e-14
PHI_1 = 0.841344746068543
# erf(1/sqrt(2)) = P[|Z| <= 1]
CHI2_1_AT_1 = 0.6826894921370859


class TestNormalCdf:
    def test_center(self):
        assert normal_cdf(0.0) == 0.5

    def test_upper_tail(self):
        assert normal_cdf(40.0) == pytest.approx(1.0, abs=1e-15)

    def test_quadrature_value(self):
        assert normal_cdf(1.0) == pytest.approx(PHI_1, abs=1e-12)

    def test_monotone(self):
        x = np.linspace(-40, 40, 10001)
        assert np.all(np.diff(normal_cdf(x)) >= 0)


class TestNoncentralChiSq:
    def test_lower_boundary(self):
        assert noncentral_chisq_cdf(0.0, 5.0, 1) == 0.0

    def test_central_df1(self):
        assert noncentral_chisq_cdf(1.0, 0.0, 1) == pytest.approx(CHI2_1_AT_1, abs=1e-12)

    def test_dataclass_args(self):
        args = NoncentralChiSqArgs(x=1.0, delta2=0.0)
        assert noncentral_chisq_cdf(args) == pytest.approx(CHI2_1_AT_1, abs=1e-12)

    @pytest.mark.parametrize("x, delta2, df", [(-1.0, 1.0, 1), (1.0, -0.5, 1), (1.0, 1.0, 0), (1.0, 1.0, 1.5)])
    def test_invalid(self, x, delta2, df):
        with pytest.raises(ValueError):
            noncentral_chisq_cdf(x, delta2, df)

    def test_identity_with_normal(self):
        x = np.logspace(-4, 4, 1000)
        expect = 2.0 * normal_cdf(np.sqrt(x)) - 1.0
        assert np.max(np.abs(noncentral_chisq_cdf(x, 0.0, 1) - expect)) <= 1e-9

    @pytest.mark.parametrize("delta2", [0.0, 0.3, 1.0, 7.5, 60.0, 900.0, 1e4])
    def test_series_matches_closed_form(self, delta2):
        # two independent routes for df = 1
        x = np.concatenate([np.logspace(-4, 4.5, 400), [delta2]])
        diff = noncentral_chisq_cdf(x, delta2, 1) - chisq1_cdf(x, delta2)
        assert np.max(np.abs(diff)) <= 1e-10

    def test_monotone_in_x(self):
        x = np.linspace(0, 200, 1000)
        for d in (0.0, 2.0, 50.0):
            assert np.all(np.diff(noncentral_chisq_cdf(x, d, 1)) >= -1e-13)

    def test_nonincreasing_in_noncentrality(self):
        d = np.linspace(0, 400, 1000)
        for x in (0.5, 10.0, 150.0):
            assert np.all(np.diff(noncentral_chisq_cdf(x, d, 1)) <= 1e-13)

    def test_underflow_branch(self):
        assert noncentral_chisq_cdf(1.0, 1e8, 1) <= 1e-12
        assert noncentral_chisq_cdf(1e4, 1e12, 3) <= 1e-12

    def test_higher_df_monte_carlo(self):
        rng = np.random.default_rng(11)
        n = 10**6
        d2, df, x = 3.0, 4, 5.0
        z = rng.standard_normal((df, n))
        z[0] += math.sqrt(d2)
        q = (z * z).sum(axis=0) <= x
        est, se = q.mean(), q.std() / math.sqrt(n)
        assert abs(noncentral_chisq_cdf(x, d2, df) - est) <= 3 * se

    def test_mc_fixed_point(self):
        # (Z + 1)^2 <= 2, 1e7 draws
        rng = np.random.default_rng(20240501)
        hits = 0
        n = 10**7
        for _ in range(10):
            z = rng.standard_normal(n // 10)
            hits += np.count_nonzero((z + 1.0) ** 2 <= 2.0)
        est = hits / n
        se = math.sqrt(est * (1 - est) / n)
        assert abs(noncentral_chisq_cdf(2.0, 1.0, 1) - est) <= 3 * se

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 1e3), st.floats(0, 1e3))
    def test_in_unit_interval(self, x, d2):
        v = noncentral_chisq_cdf(x, d2, 1)
        assert 0.0 <= v <= 1.0


class TestBivariateNormal:
    @pytest.mark.parametrize("h, k, r, expect", [
        (0.0, 0.0, 0.0, 0.25),
        (0.0, 0.0, 0.5, 1.0 / 3.0),
        (0.0, 0.0, -0.5, 1.0 / 6.0),
    ])
    def test_orthant_closed_form(self, h, k, r, expect):
        # P[X<=0, Y<=0] = 1/4 + arcsin(r)/(2 pi)
        assert bivariate_normal_cdf(h, k, r) == pytest.approx(expect, abs=1e-14)

    def test_independent_product(self):
        h, k = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-3, 3, 13))
        got = bivariate_normal_cdf(h, k, 0.0)
        assert np.allclose(got, normal_cdf(h) * normal_cdf(k), atol=1e-14)

    def test_zero_coordinate_is_continuous(self):
        for k in (-1.3, 0.7):
            for r in (-0.6, 0.2, 0.9):
                at0 = bivariate_normal_cdf(0.0, k, r)
                assert at0 == pytest.approx(bivariate_normal_cdf(1e-9, k, r), abs=1e-8)
                assert at0 == pytest.approx(bivariate_normal_cdf(-1e-9, k, r), abs=1e-8)

    def test_quadrature_oracle(self):
        from scipy import integrate

        h, k, r = 0.4, -0.7, 0.65
        s = math.sqrt(1 - r * r)
        # integrate phi(x) Phi((k - r x)/s) over x <= h
        val, _ = integrate.quad(
            lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi) * normal_cdf((k - r * x) / s),
            -np.inf, h, epsabs=1e-13,
        )
        assert bivariate_normal_cdf(h, k, r) == pytest.approx(val, abs=1e-11)


def _cauchy_cdf(x, rho):
    # zero means, equal variances: the ratio is Cauchy(rho, sqrt(1 - rho^2))
    return 0.5 + np.arctan((x - rho) / np.sqrt(1 - rho * rho)) / np.pi


class TestRatioNormal:
    def test_upper_limit(self):
        for a, b in [(0, 0), (3, -2), (-50, 1e3)]:
            assert ratio_normal_cdf(1e12, a, b, 2.0, 0.3) == pytest.approx(1.0, abs=1e-8)
            assert ratio_normal_cdf(-1e12, a, b, 2.0, 0.3) == pytest.approx(0.0, abs=1e-8)
        assert ratio_normal_cdf(math.inf, 1.0, 1.0, 1.0, 0.0) == 1.0

    @pytest.mark.parametrize("theta", [-0.9, -0.5, 0.0, 0.5, 0.9])
    def test_median_at_correlation(self, theta):
        v = ratio_normal_cdf(theta, 0.0, 0.0, 1.0 / (1.0 - theta**2), theta)
        assert v == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("rho", [-0.999999, -0.7, 0.0, 0.4, 0.999])
    def test_zero_mean_cauchy(self, rho):
        x = np.linspace(-5, 5, 201)
        got = ratio_normal_cdf(x, 0.0, 0.0, 3.0, rho)
        assert np.max(np.abs(got - _cauchy_cdf(x, rho))) <= 1e-12

    def test_dataclass_args(self):
        args = RatioNormalArgs(x=0.5, a=0.0, b=0.0, var=1.0 / 0.75, rho=0.5)
        assert ratio_normal_cdf(args) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("var, rho", [(0.0, 0.1), (-1.0, 0.1), (1.0, 1.0), (1.0, -1.2)])
    def test_invalid(self, var, rho):
        with pytest.raises(ValueError):
            ratio_normal_cdf(0.0, 0.0, 0.0, var, rho)

    @pytest.mark.parametrize("a, b, var, rho", [
        (0.0, 0.0, 1.0, 0.0), (3.0, 3.0, 1.0, 0.0), (5.0, 0.0, 1.33, 0.5),
        (0.0, -5.0, 1.33, 0.5), (1e6, 1e6, 4.0, -0.9), (2.0, 0.5, 0.3, 0.95),
    ])
    def test_monotone(self, a, b, var, rho):
        x = np.linspace(-20, 20, 1000)
        v = ratio_normal_cdf(x, a, b, var, rho)
        assert np.all(np.diff(v) >= -1e-12)
        assert np.all((v >= 0) & (v <= 1))

    def test_quadrature_of_density(self):
        from scipy import integrate

        # P[N1 <= x N2, N2 > 0] + P[N1 >= x N2, N2 < 0] by integrating over N2
        a, b, var, rho, x = 1.2, 0.8, 2.0, -0.4, 0.6
        sd = math.sqrt(var)

        def cond(y, upper):
            # N1 | N2 = y ~ N(a + rho (y - b), var (1 - rho^2))
            m = a + rho * (y - b)
            s = sd * math.sqrt(1 - rho * rho)
            c = normal_cdf((x * y - m) / s)
            dens = math.exp(-0.5 * ((y - b) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
            return dens * (c if upper else 1.0 - c)

        p1, _ = integrate.quad(cond, 0, np.inf, args=(True,), epsabs=1e-13)
        p2, _ = integrate.quad(cond, -np.inf, 0, args=(False,), epsabs=1e-13)
        assert ratio_normal_cdf(x, a, b, var, rho) == pytest.approx(p1 + p2, abs=1e-10)

    def test_mc_fixed_point(self):
        rng = np.random.default_rng(7)
        n = 10**7
        hits = 0
        for _ in range(10):
            z = rng.standard_normal((2, n // 10))
            hits += np.count_nonzero((3.0 + z[0]) / (3.0 + z[1]) <= 1.0)
        est = hits / n
        se = math.sqrt(est * (1 - est) / n)
        assert abs(ratio_normal_cdf(1.0, 3.0, 3.0, 1.0, 0.0) - est) <= 3 * se
