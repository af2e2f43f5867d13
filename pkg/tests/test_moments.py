"""Analytic prior moments of random means and the flexibility curves."""

import numpy as np
import pytest

from conftest import mean_se, moment_se
from gdprior import (BaseMeasure, BetaMixing, Cauchy, Discrete,
                     HeavyTailedBaseError, Indicator, Normal, central_moment,
                     kurtosis_ratio_curve, matched_beta_parameters,
                     sample_mean_draws, set_prob_moments, skewness_ratio_curve,
                     stick_variance_factor, summary_moments)

GAUSS = BaseMeasure(Normal())


class TestCentralMoments:
    def test_first_moment_is_linear(self):
        base = BaseMeasure(Normal(1.3, 2.0))
        for x in [0.0, -2.5, 4.0]:
            assert central_moment(BetaMixing(2.0, 3.0), base, 1, x) == \
                pytest.approx(1.3 - x, abs=1e-12)

    @pytest.mark.parametrize("a,b", [(0.5, 1.0), (2.0, 3.0), (1.0, 1.0)])
    def test_variance_closed_form(self, a, b):
        # Var theta = sigma0^2 (a+1)/(a+2b+1)
        base = BaseMeasure(Normal(0.0, 1.7))
        sigma0_sq = 1.7 ** 2
        expected = sigma0_sq * (a + 1.0) / (a + 2.0 * b + 1.0)
        assert central_moment(BetaMixing(a, b), base, 2) == \
            pytest.approx(expected, rel=1e-12)

    def test_fourth_moment_vs_monte_carlo(self):
        mixing = BetaMixing(1.0, 2.0)
        draws = sample_mean_draws(mixing, GAUSS, 300_000, epsilon=1e-10, seed=101)
        for p in (2, 3, 4):
            mc, se = moment_se(draws, p)
            assert abs(central_moment(mixing, GAUSS, p, x=0.0) - mc) < 3 * se

    def test_heavy_tail_refusal(self):
        with pytest.raises(HeavyTailedBaseError):
            central_moment(BetaMixing(1.0, 1.0), BaseMeasure(Cauchy()), 2)

    def test_max_p_guard(self):
        with pytest.raises(ValueError, match="max_p"):
            central_moment(BetaMixing(1.0, 1.0), GAUSS, 14)
        assert central_moment(BetaMixing(1.0, 1.0), GAUSS, 14, max_p=14) > 0

    def test_variance_shift_invariance(self):
        mixing = BetaMixing(0.5, 2.0)
        base = BaseMeasure(Normal(0.7, 1.1))
        ref = (central_moment(mixing, base, 2, 0.0)
               - central_moment(mixing, base, 1, 0.0) ** 2)
        for x in [-3.0, 0.2, 5.0]:
            value = (central_moment(mixing, base, 2, x)
                     - central_moment(mixing, base, 1, x) ** 2)
            assert value == pytest.approx(ref, abs=1e-10)

    def test_indicator_agrees_with_set_prob_moments(self):
        mixing = BetaMixing(2.0, 3.0)
        base = BaseMeasure(Normal(), Indicator(-np.inf, 0.0))
        sp = set_prob_moments(mixing, 0.5)
        assert central_moment(mixing, base, 2) == pytest.approx(
            sp["variance"], abs=1e-14)
        assert central_moment(mixing, base, 3) == pytest.approx(
            sp["third_central"], abs=1e-14)


class TestSummaryMoments:
    def test_matches_central_moment_exactly(self):
        mixing = BetaMixing(0.5, 3.0)
        base = BaseMeasure(Discrete([0.0, 1.0], [0.7, 0.3]))
        summary = summary_moments(mixing, base)
        assert summary["variance"] == central_moment(mixing, base, 2)
        assert summary["third_central"] == central_moment(mixing, base, 3)
        assert summary["fourth_central"] == central_moment(mixing, base, 4)

    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
    def test_dirichlet_third_moment_factor(self, b):
        # E (theta - theta_0)^3 = 2/((1+b)(2+b)) E0 (Y - theta_0)^3
        base = BaseMeasure(Discrete([0.0, 1.0], [0.8, 0.2]))
        e0_third = base.central_moment(3, base.mean)
        summary = summary_moments(BetaMixing(1.0, b), base)
        assert summary["third_central"] == pytest.approx(
            2.0 / ((1 + b) * (2 + b)) * e0_third, rel=1e-12)

    def test_beta11_skewness_factor_is_one_third(self):
        base = BaseMeasure(Discrete([0.0, 1.0], [0.8, 0.2]))
        e0_third = base.central_moment(3, base.mean)
        summary = summary_moments(BetaMixing(1.0, 1.0), base)
        assert summary["third_central"] == pytest.approx(e0_third / 3.0, rel=1e-12)

    def test_symmetric_base_kills_odd_moments(self):
        summary = summary_moments(BetaMixing(2.0, 0.5), GAUSS)
        assert summary["third_central"] == pytest.approx(0.0, abs=1e-14)


class TestSetProbMoments:
    def test_half_probability_kills_skewness(self):
        assert set_prob_moments(BetaMixing(2.0, 3.0), 0.5)["third_central"] == 0.0

    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0, 10.0])
    def test_dirichlet_variance(self, b):
        p0 = 0.37
        sp = set_prob_moments(BetaMixing(1.0, b), p0)
        assert sp["variance"] == pytest.approx(p0 * (1 - p0) / (1 + b), rel=1e-12)

    def test_beta22_variance_vs_monte_carlo(self):
        mixing = BetaMixing(2.0, 2.0)
        p0 = 0.3
        base = BaseMeasure(Normal(), Indicator(-np.inf, -0.5244005127080407))
        draws = sample_mean_draws(mixing, base, 100_000, epsilon=1e-10, seed=55)
        sq, se = moment_se(draws - p0, 2)
        assert abs(set_prob_moments(mixing, p0)["variance"] - sq) < 3 * se

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            set_prob_moments(BetaMixing(1, 1), 1.5)


class TestSkewnessRatioCurve:
    def test_dirichlet_point_is_one(self):
        for b0 in [0.5, 2.0, 17.0]:
            curve = skewness_ratio_curve(b0, [1.0])
            assert curve["rho"][0] == pytest.approx(1.0, abs=1e-12)

    def test_endpoints_for_b0_2(self):
        curve = skewness_ratio_curve(2.0, [0.75, 1.0, 2.0])
        assert curve["rho_max"] == pytest.approx(12.0 / 11.0, abs=1e-12)

    def test_large_b0_interval(self):
        curve = skewness_ratio_curve(1e6, [1.0])
        assert curve["rho_max"] == pytest.approx(4.0 / 3.0, abs=1e-4)
        assert curve["rho_min"] == pytest.approx(2.0 / 3.0, abs=1e-4)

    def test_curve_decreasing_and_within_endpoints(self):
        x = np.linspace(0.51, 50.0, 400)
        curve = skewness_ratio_curve(3.0, x)
        assert np.all(np.diff(curve["rho"]) < 0)
        assert np.all(curve["rho"] < curve["rho_max"])
        assert np.all(curve["rho"] > curve["rho_min"])

    def test_domain_error(self):
        with pytest.raises(ValueError, match="x > 1/2"):
            skewness_ratio_curve(2.0, [0.5])

    def test_variance_matching_invariant(self):
        # the matched family reproduces the Dirichlet variance exactly
        b0 = 2.0
        sigma0_sq = 1.0
        for x in np.linspace(0.51, 8.0, 40):
            a, b = matched_beta_parameters(b0, x)
            var = stick_variance_factor(BetaMixing(a, b)) * sigma0_sq
            assert var == pytest.approx(sigma0_sq / (1 + b0), abs=1e-10)


class TestKurtosisRatioCurve:
    def test_identity_point(self):
        curve = kurtosis_ratio_curve(2.0, 3.0, [1.0])
        assert curve["kurtosis_ratio"][0] == pytest.approx(1.0, abs=1e-12)

    def test_small_a_increases_kurtosis(self):
        # a = 2x - 1 < 1 must push the fourth moment above the Dirichlet
        curve = kurtosis_ratio_curve(2.0, 3.0, [0.6])
        assert curve["kurtosis_ratio"][0] > 1.0

    def test_matches_monte_carlo(self):
        b0, x = 2.0, 0.8
        a, b = matched_beta_parameters(b0, x)
        draws_gd = sample_mean_draws(BetaMixing(a, b), GAUSS, 200_000,
                                     epsilon=1e-10, seed=77)
        draws_dir = sample_mean_draws(BetaMixing(1.0, b0), GAUSS, 200_000,
                                      epsilon=1e-10, seed=78)
        num, se_n = moment_se(draws_gd, 4)
        den, se_d = moment_se(draws_dir, 4)
        ratio = kurtosis_ratio_curve(b0, 3.0, [x])["kurtosis_ratio"][0]
        mc_ratio = num / den
        se_ratio = mc_ratio * np.hypot(se_n / num, se_d / den)
        assert abs(ratio - mc_ratio) < 3 * se_ratio

    def test_rejects_impossible_fourth_moment(self):
        with pytest.raises(ValueError, match=">= 1"):
            kurtosis_ratio_curve(2.0, 0.5, [1.0])
