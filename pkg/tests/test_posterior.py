"""Posterior constants, means/variances, ties, rates, and the exact sampler."""

import numpy as np
import pytest
from scipy import stats

from conftest import ks_critical, mean_se, var_se
from gdprior import (BaseMeasure, BetaMixing, Dataset, Discrete, Indicator,
                     Normal, TiedDataError, beta_weight_gamma_form, constants,
                     constants_raw, posterior_functional_draws, posterior_mean,
                     posterior_measure, posterior_second_moment, prob_distinct,
                     sample_distinct_flags, sample_posterior_indexes,
                     sample_posterior_process, tie_doubleton,
                     weight_asymptotics)
from gdprior.mixing import GridMixing
from gdprior.posterior import gg_ratio_telescoped, nd_ratio_telescoped

GAUSS = BaseMeasure(Normal())
BETA_GRID = [(0.5, 0.5), (0.5, 1.0), (0.5, 3.0),
             (1.0, 0.5), (1.0, 1.0), (1.0, 3.0),
             (2.0, 0.5), (2.0, 1.0), (2.0, 3.0)]


def distinct_data(n, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal(n) * scale
    assert len(set(pts)) == n
    return Dataset.distinct(pts)


class TestDataset:
    def test_rejects_silent_ties(self):
        with pytest.raises(TiedDataError):
            Dataset.distinct([1.0, 2.0, 1.0])

    def test_doubleton_must_be_exactly_equal(self):
        with pytest.raises(TiedDataError):
            Dataset.doubleton([1.0, 1.0 + 1e-12, 2.0], 0, 1)
        ds = Dataset.doubleton([1.0, 1.0, 2.0], 0, 1)
        assert ds.is_tied and ds.n == 3

    def test_rejects_multiple_ties(self):
        with pytest.raises(TiedDataError):
            Dataset.doubleton([1.0, 1.0, 2.0, 2.0], 0, 1)


class TestConstants:
    @pytest.mark.parametrize("a,b", BETA_GRID)
    def test_exact_weight_split(self, a, b):
        pc = constants(BetaMixing(a, b), 12)
        assert pc.nb_over_a + pc.c_over_a == 1.0

    @pytest.mark.parametrize("a,b", BETA_GRID)
    def test_full_space_identity(self, a, b):
        for n in (1, 2, 5, 10, 25, 50):
            pc = constants(BetaMixing(a, b), n)
            assert pc.full_space_identity() == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("a,b", BETA_GRID)
    def test_partition_identity_on_random_simplex(self, a, b):
        rng = np.random.default_rng(7)
        for n in (2, 5, 14, 30):
            pc = constants(BetaMixing(a, b), n)
            value = pc.partition_identity(rng.dirichlet(np.ones(n)))
            assert value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("a,b", [(0.5, 1.0), (2.0, 3.0), (1.0, 1.0)])
    def test_normalized_matches_raw_recursions(self, a, b):
        mixing = BetaMixing(a, b)
        for n in range(1, 21):
            pc = constants(mixing, n)
            raw = constants_raw(mixing, n)
            a_n = raw["a"][n]
            checks = [
                (pc.nd_over_a, n * raw["d"][n] / a_n),
                (pc.e_over_a, raw["e"][n] / a_n),
                (pc.f_over_a, raw["f"][n] / a_n),
                (pc.b_next_over_a, raw["b"][n + 1] / a_n),
                (pc.c_next_over_a, raw["c"][n + 1] / a_n),
            ]
            if n >= 2:
                checks += [
                    (pc.gg_over_a, n * (n - 1) * raw["g"][n] / a_n),
                    (pc.h_over_a, raw["h"][n] / a_n),
                    (pc.i_over_a, raw["i"][n] / a_n),
                ]
            for normalized, reference in checks:
                assert normalized == pytest.approx(reference, rel=1e-9)

    def test_telescoped_forms_match_recursions(self):
        for a, b in [(0.5, 1.0), (2.0, 3.0)]:
            mixing = BetaMixing(a, b)
            for n in (1, 3, 8, 20, 40):
                pc = constants(mixing, n)
                assert nd_ratio_telescoped(mixing, n) == pytest.approx(
                    pc.nd_over_a, rel=1e-11)
                if n >= 2:
                    assert gg_ratio_telescoped(mixing, n) == pytest.approx(
                        pc.gg_over_a, rel=1e-11)

    def test_f_equals_i_equals_forward_constants(self):
        pc = constants(BetaMixing(2.0, 3.0), 9)
        assert pc.f_over_a == pytest.approx(pc.i_over_a, rel=1e-11)
        assert pc.f_over_a == pytest.approx(pc.c_next_over_a, rel=1e-12)
        assert pc.f_over_a == pytest.approx(pc.a_next2_over_a, rel=1e-12)

    def test_raw_oracle_refuses_large_n(self):
        with pytest.raises(ValueError):
            constants_raw(BetaMixing(1, 1), 21)

    def test_grid_mixing_constants(self):
        x = np.linspace(1e-9, 1 - 1e-9, 801)
        grid = GridMixing.from_unnormalized(x, x * (1 - x))  # ~ Beta(2,2)
        pc = constants(grid, 6)
        assert pc.full_space_identity() == pytest.approx(1.0, abs=1e-8)


class TestPosteriorMean:
    def test_no_data_returns_prior_mean(self):
        base = BaseMeasure(Normal(1.7, 1.0))
        assert posterior_mean(BetaMixing(2.0, 3.0), base,
                              Dataset.distinct([])) == pytest.approx(1.7)

    def test_dirichlet_convex_combination(self):
        # w_7 = 3/10 for Beta(1,3); two of seven points land in A, P0(A) = 1/2
        base = BaseMeasure(Normal(), Indicator(0.0, np.inf))
        pts = [-1.0, -2.0, -3.0, -4.0, -5.0, 0.5, 1.5]
        value = posterior_mean(BetaMixing(1.0, 3.0), base,
                               Dataset.distinct(pts))
        assert value == pytest.approx(0.3 * 0.5 + 0.7 * (2.0 / 7.0), abs=1e-12)

    @pytest.mark.parametrize("a,b", BETA_GRID)
    def test_gamma_form_cross_check(self, a, b):
        mixing = BetaMixing(a, b)
        for n in (1, 2, 5, 20, 100):
            assert beta_weight_gamma_form(a, b, n) == pytest.approx(
                mixing.prior_weight(n), abs=1e-12)

    def test_tie_rejected(self):
        ds = Dataset.doubleton([0.0, 0.0, 1.0], 0, 1)
        with pytest.raises(TiedDataError):
            posterior_mean(BetaMixing(1, 1), GAUSS, ds)

    def test_atomic_base_rejected(self):
        base = BaseMeasure(Discrete([0.0, 1.0], [0.5, 0.5]))
        with pytest.raises(ValueError, match="atom-free"):
            posterior_mean(BetaMixing(1, 1), base, distinct_data(3))

    def test_measure_decomposition(self):
        out = posterior_measure(BetaMixing(1.0, 3.0), distinct_data(6))
        assert out["w_n"] == pytest.approx(3.0 / 9.0, abs=1e-12)
        assert out["atom_mass"] == pytest.approx((1 - 3.0 / 9.0) / 6, abs=1e-12)


class TestPosteriorSecondMoment:
    def test_constant_functional_is_exact(self):
        # g == 1 forces E(theta^2 | data) = 1
        base = BaseMeasure(Normal(), Indicator(-np.inf, np.inf))
        for n in (1, 2, 7, 23):
            out = posterior_second_moment(BetaMixing(2.0, 3.0), base,
                                          distinct_data(n))
            assert out["second_moment"] == pytest.approx(1.0, abs=1e-11)
            assert out["variance"] == pytest.approx(0.0, abs=1e-11)

    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
    def test_dirichlet_conjugacy(self, b):
        # posterior of P(A) is Beta(b p0 + j, b(1-p0) + n - j)
        base = BaseMeasure(Normal(), Indicator(0.0, np.inf))
        data = distinct_data(9, seed=3)
        j = sum(1 for p in data.points if p >= 0.0)
        n = data.n
        p0 = 0.5
        phat = (b * p0 + j) / (b + n)
        out = posterior_second_moment(BetaMixing(1.0, b), base, data)
        assert out["variance"] == pytest.approx(
            phat * (1 - phat) / (1 + b + n), abs=1e-10)

    def test_matches_posterior_sampler(self):
        mixing = BetaMixing(2.0, 3.0)
        base = BaseMeasure(Normal(), Indicator(-0.3, 0.9))
        data = distinct_data(6, seed=11)
        draws = posterior_functional_draws(mixing, base, data, 30_000,
                                           epsilon=1e-10, seed=19)["means"]
        mc_mean, se_m = mean_se(draws)
        mc_var, se_v = var_se(draws)
        assert abs(posterior_mean(mixing, base, data) - mc_mean) < 3 * se_m
        out = posterior_second_moment(mixing, base, data)
        assert abs(out["variance"] - mc_var) < 3 * se_v

    def test_identity_transform_posterior(self):
        mixing = BetaMixing(2.0, 3.0)
        data = distinct_data(8, seed=23)
        draws = posterior_functional_draws(mixing, GAUSS, data, 30_000,
                                           epsilon=1e-10, seed=29)["means"]
        mc_mean, se_m = mean_se(draws)
        mc_var, se_v = var_se(draws)
        assert abs(posterior_mean(mixing, GAUSS, data) - mc_mean) < 3 * se_m
        out = posterior_second_moment(mixing, GAUSS, data)
        assert abs(out["variance"] - mc_var) < 3 * se_v

    def test_variance_rate(self):
        # posterior variance is nonnegative and decays like 1/n; the w_n
        # scale is an upper envelope only on the Dirichlet-or-slower side
        rng = np.random.default_rng(42)
        xs = rng.standard_normal(200)
        base = BaseMeasure(Normal(), Indicator(-0.5, 0.5))
        for a, b in [(0.5, 1.0), (1.0, 1.0), (2.0, 3.0)]:
            mixing = BetaMixing(a, b)
            v10 = posterior_second_moment(mixing, base,
                                          Dataset.distinct(xs[:10]))["variance"]
            v100 = posterior_second_moment(mixing, base,
                                           Dataset.distinct(xs[:100]))["variance"]
            assert v10 >= 0.0 and v100 >= 0.0
            ratio = v100 / v10
            assert 0.05 <= ratio <= 0.2
            if a <= 1.0:
                w_ratio = mixing.prior_weight(100) / mixing.prior_weight(10)
                assert ratio <= 2.0 * w_ratio


class TestTieDoubleton:
    @pytest.mark.parametrize("a,b", BETA_GRID)
    def test_masses_sum_to_one(self, a, b):
        ds = Dataset.doubleton([0.0, 0.0, 1.0, 2.0, 3.0, 4.0], 0, 1)
        out = tie_doubleton(BetaMixing(a, b), ds)
        assert out["total"] == pytest.approx(1.0, abs=1e-9)

    def test_dirichlet_is_insensitive_to_ties(self):
        b, n = 3.0, 6
        ds = Dataset.doubleton([0.0, 0.0, 1.0, 2.0, 3.0, 4.0], 0, 1)
        out = tie_doubleton(BetaMixing(1.0, b), ds)
        assert out["outside_mass_factor"] == pytest.approx(b / (b + n), abs=1e-10)
        assert out["double_point_mass"] == pytest.approx(2.0 / (b + n), abs=1e-10)
        assert out["single_point_mass"] == pytest.approx(1.0 / (b + n), abs=1e-10)

    def test_small_a_downweights_outside_mass(self):
        mixing = BetaMixing(0.5, 1.0)
        ds = Dataset.doubleton([0.0, 0.0, 1.0, 2.0, 3.0], 0, 1)
        out = tie_doubleton(mixing, ds)
        assert out["outside_mass_factor"] < mixing.prior_weight(5)

    def test_two_point_tie(self):
        out = tie_doubleton(BetaMixing(2.0, 3.0),
                            Dataset.doubleton([1.0, 1.0], 0, 1))
        assert out["single_point_mass"] == 0.0
        assert out["total"] == pytest.approx(1.0, abs=1e-12)

    def test_requires_tie(self):
        with pytest.raises(TiedDataError):
            tie_doubleton(BetaMixing(1, 1), distinct_data(4))


class TestProbDistinct:
    def test_single_point(self):
        assert prob_distinct(BetaMixing(2.0, 3.0), 1) == pytest.approx(1.0)

    def test_dirichlet_pair(self):
        assert prob_distinct(BetaMixing(1.0, 2.0), 2) == pytest.approx(
            2.0 / 3.0, abs=1e-12)

    def test_against_monte_carlo(self):
        mixing = BetaMixing(2.0, 2.0)
        flags = sample_distinct_flags(mixing, 3, 100_000, seed=47)
        freq, se = mean_se(flags.astype(float))
        assert abs(prob_distinct(mixing, 3) - freq) < 3 * se


class TestWeightAsymptotics:
    def test_dirichlet_exact(self):
        out = weight_asymptotics(1.0, 2.0, np.logspace(3, 6, 20).astype(int))
        # u_n = (n+1) E B (1-B)^n = b(n+1)/((b+n)(b+n+1)) ~ b/(b+n)
        n = out["n"]
        np.testing.assert_allclose(out["u"], 2.0 * (n + 1) / ((2 + n) * (3 + n)),
                                   rtol=1e-10)

    def test_a2_b1_closed_form(self):
        grid = np.logspace(3, 6, 25).astype(int)
        out = weight_asymptotics(2.0, 1.0, grid)
        n = out["n"]
        np.testing.assert_allclose(out["u"], 4.0 / ((n + 2.0) * (n + 3.0)),
                                   rtol=1e-12)
        assert out["slope"] == pytest.approx(-2.0, abs=0.02)
        assert out["constant"] == pytest.approx(4.0, rel=2e-3)
        assert out["theory_constant"] == pytest.approx(4.0, abs=1e-12)

    def test_requires_two_decades(self):
        with pytest.raises(ValueError, match="decades"):
            weight_asymptotics(1.0, 1.0, [10, 100])

    def test_weight_strictly_decreasing(self):
        for a, b in [(0.5, 0.5), (1.0, 1.0), (2.0, 3.0)]:
            seq = BetaMixing(a, b).delta_sequence(1000)
            assert np.all(np.diff(seq.w[1:]) < 0.0)


class TestPosteriorIndexes:
    def test_ordering_and_minimum(self):
        idx = sample_posterior_indexes(BetaMixing(2.0, 3.0), 3, seed=5,
                                       count=500)
        assert np.all(np.diff(idx, axis=1) >= 1)
        assert np.all(idx[:, 0] >= 1)
        assert idx.min(axis=0).tolist() == [1, 2, 3]

    def test_single_point_index_law(self):
        # Pr(J = j) = M(1,0) M(0,1)^{j-1}; equals (1/2)^j for Beta(1,1)
        idx = sample_posterior_indexes(BetaMixing(1.0, 1.0), 1, seed=13,
                                       count=100_000).ravel()
        top = 25
        pmf = np.bincount(idx, minlength=top + 1)[1:top + 1] / idx.size
        target = 0.5 ** np.arange(1, top + 1)
        tv = 0.5 * (np.abs(pmf - target).sum() + (1 - target.sum())
                    - (1 - pmf.sum()))
        assert tv < 0.01

    def test_gap_independence(self):
        idx = sample_posterior_indexes(BetaMixing(2.0, 3.0), 3, seed=17,
                                       count=100_000)
        gaps = np.column_stack([idx[:, 0], np.diff(idx, axis=1)])
        r12 = np.corrcoef(gaps[:, 0], gaps[:, 1])[0, 1]
        assert abs(r12) < 0.02


class TestPosteriorProcess:
    def test_data_points_always_pinned(self):
        data = distinct_data(5, seed=2)
        for seed in range(10):
            draw = sample_posterior_process(BetaMixing(2.0, 3.0), GAUSS, data,
                                            seed=seed)
            real = draw.realization
            for k, value in draw.pinned.items():
                assert real.atoms[k - 1] == value
                assert real.weights[k - 1] > 0.0
            assert sorted(draw.pinned.values()) == sorted(data.points)

    def test_per_draw_sampler_matches_posterior_mean(self):
        mixing = BetaMixing(2.0, 3.0)
        base = BaseMeasure(Normal(), Indicator(-0.3, 0.9))
        data = distinct_data(4, seed=31)
        values = np.array([
            sample_posterior_process(mixing, base, data, seed=s)
            .realization.mean_of(base.apply) for s in range(4000)])
        mc, se = mean_se(values)
        assert abs(posterior_mean(mixing, base, data) - mc) < 3 * se

    def test_batch_path_matches_per_draw_path(self):
        mixing = BetaMixing(2.0, 3.0)
        base = BaseMeasure(Normal(), Indicator(-0.3, 0.9))
        data = distinct_data(4, seed=31)
        batch = posterior_functional_draws(mixing, base, data, 4000,
                                           epsilon=1e-10, seed=61)["means"]
        single = np.array([
            sample_posterior_process(mixing, base, data, seed=s)
            .realization.mean_of(base.apply) for s in range(4000)])
        stat = stats.ks_2samp(batch, single).statistic
        assert stat < ks_critical(4000, 4000)

    def test_grid_mixing_fallback(self):
        x = np.linspace(1e-9, 1 - 1e-9, 401)
        grid = GridMixing.from_unnormalized(x, x * (1 - x))
        base = BaseMeasure(Normal(), Indicator(0.0, np.inf))
        data = distinct_data(3, seed=5)
        out = posterior_functional_draws(grid, base, data, 400, seed=7)
        exact = BetaMixing(2.0, 2.0)
        mc, se = mean_se(out["means"])
        assert abs(posterior_mean(exact, base, data) - mc) < 3.5 * se

    def test_dirichlet_point_mass_law(self):
        # P{x_1} | data ~ Beta(1, b + n - 1) in the Dirichlet case
        b, n = 3.0, 5
        data = distinct_data(n, seed=13)
        out = posterior_functional_draws(BetaMixing(1.0, b), GAUSS, data,
                                         20_000, epsilon=1e-10, seed=43,
                                         track_point=0)
        stat = stats.kstest(out["point_mass"],
                            lambda x: stats.beta.cdf(x, 1.0, b + n - 1)).statistic
        assert stat < ks_critical(20_000)

    def test_posterior_draw_csv(self, tmp_path):
        data = distinct_data(3, seed=2)
        draw = sample_posterior_process(BetaMixing(2.0, 3.0), GAUSS, data,
                                        seed=3)
        path = tmp_path / "draw.csv"
        draw.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[3] == "weight,atom,pinned"
        pinned_rows = [ln for ln in lines[4:] if ln.endswith(",1")]
        assert len(pinned_rows) == 3
