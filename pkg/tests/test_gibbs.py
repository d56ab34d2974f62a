import numpy as np
import pytest
from scipy import stats

from ranktarget.data import Dataset, RankingScheme, assemble_dataset, rank_of
from ranktarget.errors import NotPositiveDefinite
from ranktarget.gibbs import (
    GibbsSampler,
    McmcConfig,
    ModelSpec,
    PosteriorSamples,
    household_effect_params,
    latent_bounds,
    ranker_precision_probs,
    run_gibbs,
    shared_mean_params,
    shared_var_params,
    survey_noise_params,
    survey_weight_params,
    weight_params,
)
from ranktarget.rng import derive_rng
from ranktarget.synthetic import GenConfig, generate_dataset
from tests.conftest import make_household
from tests.oracles import (
    dense_household_effect_posterior,
    dense_normal_posterior,
    dense_shared_mean_posterior,
    density_precision_posterior,
)


class TestLatentBounds:
    scheme = RankingScheme("c1", "r1", {"A": 2, "B": 1, "C": 3})
    z = {"A": 0.5, "B": -0.3, "C": 1.2}

    def test_lowest_rank_open_below(self):
        assert latent_bounds(self.scheme, self.z, 1) == (-np.inf, 0.5)

    def test_middle_rank(self):
        assert latent_bounds(self.scheme, self.z, 2) == (-0.3, 1.2)

    def test_highest_rank_open_above(self):
        assert latent_bounds(self.scheme, self.z, 3) == (0.5, np.inf)


class TestHouseholdEffectParams:
    def test_single_observation(self):
        mean, var = household_effect_params(
            np.array([1.0]), np.array([1.0]), np.array([0]), 1
        )
        assert mean[0] == pytest.approx(0.5)
        assert var[0] == pytest.approx(0.5)

    def test_two_rankers(self):
        mean, var = household_effect_params(
            np.array([1.0, 1.0]), np.array([2.0, 2.0]), np.array([0, 0]), 1
        )
        assert var[0] == pytest.approx(0.2)
        assert mean[0] == pytest.approx(0.8)

    def test_zero_residuals_prior_pull(self):
        mean, _ = household_effect_params(
            np.zeros(5), np.ones(5), np.arange(5) % 2, 2
        )
        np.testing.assert_array_equal(mean, [0.0, 0.0])

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n_house = rng.integers(2, 6)
            n_obs = rng.integers(n_house, 20)
            idx = np.concatenate(
                [np.arange(n_house), rng.integers(0, n_house, n_obs - n_house)]
            )
            w = rng.uniform(0.3, 3.0, n_obs)
            resid = rng.normal(size=n_obs)
            mean, var = household_effect_params(resid, w, idx, n_house)
            omean, ovar = dense_household_effect_posterior(n_house, idx, w, resid)
            np.testing.assert_allclose(mean, omean, rtol=1e-10)
            np.testing.assert_allclose(var, ovar, rtol=1e-10)


class TestWeightParams:
    def test_forced_arithmetic(self):
        mean, cov = weight_params(
            np.array([[1.0], [-1.0]]),
            np.array([1.0, -1.0]),
            np.ones(2),
            0.0,
            6.25,
        )
        assert cov[0, 0] == pytest.approx(1.0 / 2.16)
        assert mean[0] == pytest.approx(2.0 / 2.16)

    def test_flat_prior_limit_is_ols(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 3))
        resid = rng.normal(size=40)
        mean, _ = weight_params(x, resid, np.ones(40), 0.0, 1e8)
        ols = np.linalg.lstsq(x, resid, rcond=None)[0]
        np.testing.assert_allclose(mean, ols, atol=1e-4)

    def test_zero_data_zero_prior_mean(self):
        mean, _ = weight_params(
            np.array([[1.0, 0.5]]), np.zeros(1), np.ones(1), 0.0, 2.0
        )
        np.testing.assert_array_equal(mean, [0.0, 0.0])

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n, p = rng.integers(5, 30), rng.integers(1, 4)
            x = rng.normal(size=(n, p))
            resid = rng.normal(size=n)
            w = rng.uniform(0.3, 3.0, n)
            pm = rng.normal(size=p)
            pv = rng.uniform(0.5, 5.0, p)
            mean, cov = weight_params(x, resid, w, pm, pv)
            omean, ocov = dense_normal_posterior(x, w, resid, pm, np.diag(pv))
            np.testing.assert_allclose(mean, omean, rtol=1e-9, atol=1e-12)
            np.testing.assert_allclose(cov, ocov, rtol=1e-9, atol=1e-12)

    def test_collinear_with_flat_prior_raises(self):
        x = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        with pytest.raises(NotPositiveDefinite):
            weight_params(x, np.zeros(3), np.ones(3), 0.0, 1e30)


class TestSurveyWeightParams:
    def test_forced_arithmetic(self):
        mean, cov = survey_weight_params(
            np.array([[1.0]]), np.array([2.0]), 1.0, 0.0, 1.0
        )
        assert mean[0] == pytest.approx(1.0)
        assert cov[0, 0] == pytest.approx(0.5)

    def test_zero_outcome_zero_mean(self):
        mean, _ = survey_weight_params(
            np.array([[1.0], [2.0]]), np.zeros(2), 1.0, 0.0, 1.0
        )
        assert mean[0] == 0.0

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(5, 3))
        y = rng.normal(size=5)
        noise = 0.7
        mean, cov = survey_weight_params(x, y, noise, np.zeros(3), np.ones(3) * 2.0)
        omean, ocov = dense_normal_posterior(
            x, np.full(5, 1.0 / noise), y, np.zeros(3), np.eye(3) * 2.0
        )
        np.testing.assert_allclose(mean, omean, rtol=1e-10)
        np.testing.assert_allclose(cov, ocov, rtol=1e-10)


class TestRankerPrecisionProbs:
    def test_degenerate_prior_wins(self):
        probs = ranker_precision_probs(
            np.array([5.0, -3.0]), np.array([1.0, 0.0, 0.0]), (0.5, 1.0, 2.0)
        )
        np.testing.assert_allclose(probs, [1.0, 0.0, 0.0])

    def test_single_zero_residual(self):
        probs = ranker_precision_probs(
            np.array([0.0]), np.array([1 / 3] * 3), (0.5, 1.0, 2.0)
        )
        np.testing.assert_allclose(probs, [0.2265, 0.3204, 0.4531], atol=1e-4)

    def test_large_residuals_favor_low_precision(self):
        probs = ranker_precision_probs(
            np.full(50, 4.0), np.array([1 / 3] * 3), (0.5, 1.0, 2.0)
        )
        assert probs[0] > 0.999

    def test_matches_density_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            resid = rng.normal(size=rng.integers(1, 30))
            prior = rng.dirichlet(np.ones(3))
            probs = ranker_precision_probs(resid, prior, (0.5, 1.0, 2.0))
            oracle = density_precision_posterior(resid, prior, (0.5, 1.0, 2.0))
            np.testing.assert_allclose(probs, oracle, rtol=1e-9)


class TestScalarBlocks:
    def test_survey_noise_examples(self):
        assert survey_noise_params(np.array([1.0, -1.0])) == (3.0, 3.0)
        assert survey_noise_params(np.zeros(10)) == (11.0, 1.0)

    def test_survey_noise_random_recompute(self):
        rng = np.random.default_rng(5)
        resid = rng.normal(size=17)
        df, scale = survey_noise_params(resid)
        assert df == 18.0
        assert scale == pytest.approx(np.square(resid).sum() + 1.0, rel=1e-12)

    def test_shared_mean_examples(self):
        mean, var = shared_mean_params(np.array([1.0]), np.array([3.0]), 1.0)
        assert mean[0] == pytest.approx(4.0 / 3.0)
        assert var[0] == pytest.approx(1.0 / 3.0)
        mean, _ = shared_mean_params(np.zeros(2), np.zeros(3), 1.0)
        np.testing.assert_array_equal(mean, np.zeros(3))

    def test_shared_mean_prior_dominates_for_huge_variance(self):
        mean, var = shared_mean_params(np.array([5.0]), np.array([7.0]), 1e12)
        assert abs(mean[0]) < 1e-5
        assert var[0] == pytest.approx(1.0, abs=1e-5)

    def test_shared_mean_matches_dense_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = rng.integers(1, 5)
            w = rng.normal(size=p)
            sw = rng.normal(size=p + 1)
            sv = rng.uniform(0.3, 4.0)
            mean, var = shared_mean_params(w, sw, sv)
            omean, ovar = dense_shared_mean_posterior(w, sw, sv)
            np.testing.assert_allclose(mean, omean, rtol=1e-10)
            np.testing.assert_allclose(var, ovar, rtol=1e-10)

    def test_shared_var_examples(self):
        assert shared_var_params(np.array([1.0]), np.array([1.0]), np.array([1.0])) == (3.0, 1.0)
        assert shared_var_params(np.array([2.0]), np.array([0.0]), np.array([1.0])) == (3.0, 3.0)

    def test_shared_var_random_recompute(self):
        rng = np.random.default_rng(7)
        w, sw, mu = rng.normal(size=3), rng.normal(size=4), rng.normal(size=4)
        df, scale = shared_var_params(w, sw, mu)
        assert df == 8.0
        expected = np.square(w - mu[:3]).sum() + np.square(sw - mu).sum() + 1.0
        assert scale == pytest.approx(expected, rel=1e-12)


def single_ranker_dataset(n_communities, size, seed, p=2):
    rng = np.random.default_rng(seed)
    households, rankings = [], []
    for c in range(n_communities):
        ids = [f"h{c}_{i}" for i in range(size)]
        for hid in ids:
            households.append(make_household(hid, f"c{c}", rng.normal(size=p)))
        perm = rng.permutation(size) + 1
        rankings.append(RankingScheme(f"c{c}", "r1", dict(zip(ids, perm))))
    return assemble_dataset(households, rankings, standardize=False)


class TestLatentSweep:
    def test_single_household_draw_is_untruncated(self):
        ds = single_ranker_dataset(1, 1, seed=0)
        sampler = GibbsSampler(ModelSpec(), ds)
        state = sampler.initial_state()
        rng = derive_rng(1)
        draws = []
        for _ in range(4000):
            sampler.sample_latent_sweep(state, rng)
            draws.append(state.latents[0])
        # mean x.weights = 0, precision 1: draws are iid N(0, 1)
        res = stats.kstest(np.array(draws), stats.norm(0, 1).cdf)
        assert res.pvalue > 0.001

    def test_rank_consistency_on_random_datasets(self):
        # latents are laid out pair by pair in ascending rank order, so rank
        # consistency means each pair's slice is strictly increasing
        rng = derive_rng(2)
        for seed in range(20):
            ds = single_ranker_dataset(3, 4 + seed % 4, seed=seed)
            sampler = GibbsSampler(ModelSpec(), ds)
            state = sampler.initial_state()
            state.weights = rng.normal(size=2)
            for _ in range(5):
                sampler.sample_latent_sweep(state, rng)
                offset = 0
                for scheme in sampler.pairs:
                    values = state.latents[offset : offset + scheme.n]
                    np.testing.assert_array_equal(
                        rank_of(values), np.arange(1, scheme.n + 1)
                    )
                    offset += scheme.n

    def test_two_household_stationary_difference(self):
        households = [make_household("h1", "c1", [0.0]), make_household("h2", "c1", [0.0])]
        rankings = [RankingScheme("c1", "r1", {"h1": 1, "h2": 2})]
        ds = assemble_dataset(households, rankings, standardize=False)
        sampler = GibbsSampler(ModelSpec(), ds)
        state = sampler.initial_state()
        rng = derive_rng(77)
        diffs = []
        for it in range(30_000):
            sampler.sample_latent_sweep(state, rng)
            if it >= 500:
                diffs.append(state.latents[0] - state.latents[1])
        empirical = float(np.mean(diffs))
        # brute-force rejection oracle for E[z1 - z2 | z1 < z2]
        z = derive_rng(78).standard_normal((200_000, 2))
        keep = z[:, 0] < z[:, 1]
        oracle = float((z[keep, 0] - z[keep, 1]).mean())
        assert empirical == pytest.approx(-2.0 / np.sqrt(np.pi), abs=0.05)
        assert empirical == pytest.approx(oracle, abs=0.05)


class TestRunGibbs:
    def test_retained_draw_count(self):
        ds = single_ranker_dataset(2, 3, seed=3)
        samples = run_gibbs(ModelSpec(), ds, McmcConfig(4000, 2000, seed=0))
        assert samples.n_retained == 2000
        assert samples.weights.shape == (2000, 2)

    def test_single_household_communities_recover_prior(self):
        rng0 = np.random.default_rng(5)
        households = [
            make_household(f"h{i}", f"c{i}", [float(rng0.normal())]) for i in range(3)
        ]
        rankings = [RankingScheme(f"c{i}", "r1", {f"h{i}": 1}) for i in range(3)]
        ds = assemble_dataset(households, rankings, standardize=False)
        samples = run_gibbs(ModelSpec(), ds, McmcConfig(82_000, 2000, seed=3))
        draws = samples.weights[::200, 0]  # thin past the chain autocorrelation
        res = stats.kstest(draws, stats.norm(0.0, 2.5).cdf)
        assert res.pvalue > 0.01

    def test_synthetic_truth_recovery_multi_ranker(self):
        cfg = GenConfig(seed=5)
        ds, _, truth = generate_dataset(cfg)
        samples = run_gibbs(ModelSpec(multi_ranker=True), ds, McmcConfig(1500, 700, seed=2))
        true_scaled = ds.scaling.coefficients_to_scaled(truth.weights)
        intervals = samples.weight_interval()
        covered = [lo <= t <= hi for t, (lo, hi) in zip(true_scaled, intervals)]
        assert sum(covered) >= 4
        big = np.abs(truth.weights) >= 0.5
        assert np.all(np.sign(samples.weight_mean()[big]) == np.sign(truth.weights[big]))

    def test_scaling_argsort_invariance(self):
        cfg = GenConfig(n_communities=10, households_per_community=8, n_rankers=1, seed=21)
        base, _, _ = generate_dataset(cfg)
        raw = assemble_dataset(base.households, base.rankings, base.quotas, standardize=False)
        factor = 4.0
        scaled_households = [
            make_household(h.id, h.community_id, h.x * factor, h.elite_cols, h.y)
            for h in base.households
        ]
        scaled = assemble_dataset(scaled_households, base.rankings, base.quotas,
                                  standardize=False)
        s_raw = run_gibbs(ModelSpec(), raw, McmcConfig(600, 300, seed=9))
        s_scaled = run_gibbs(
            ModelSpec(weight_prior_var=6.25 * factor), scaled, McmcConfig(600, 300, seed=9)
        )
        np.testing.assert_array_equal(
            np.argsort(s_raw.weight_mean()), np.argsort(s_scaled.weight_mean())
        )

    def test_auxiliary_fit_runs_and_couples_survey(self):
        cfg = GenConfig(n_communities=6, households_per_community=8, n_rankers=1, seed=31)
        ds, _, truth = generate_dataset(cfg)
        samples = run_gibbs(ModelSpec(auxiliary=True), ds, McmcConfig(600, 300, seed=4))
        assert samples.survey_weights.shape == (300, 6)
        assert samples.shared_mean.shape == (300, 6)
        # survey regression recovers its own (scaled) truth well
        sw_scaled = ds.scaling.coefficients_to_scaled(truth.survey_weights)
        np.testing.assert_allclose(
            samples.survey_weights.mean(axis=0)[:5], sw_scaled, atol=0.25
        )

    def test_geweke_joint_distribution(self):
        """Successive-conditional simulation: the marginal of the weights must
        match their prior (forward moments are exact)."""
        rngc = derive_rng(404)
        households = []
        for c in range(3):
            for i in range(4):
                households.append(make_household(f"h{c}{i}", f"c{c}", rngc.normal(size=2)))
        base = assemble_dataset(
            households,
            [RankingScheme(f"c{c}", "r1", {f"h{c}{i}": i + 1 for i in range(4)})
             for c in range(3)],
            standardize=False,
        )
        spec = ModelSpec()
        rng = derive_rng(405)
        weights = 2.5 * rng.standard_normal(2)

        def redraw_data(weights):
            linear = base.X @ weights
            rankings, latents = [], []
            for c in range(3):
                ids = [f"h{c}{i}" for i in range(4)]
                rows = [base.index_of[h] for h in ids]
                z = linear[rows] + rng.standard_normal(4)
                rankings.append(
                    RankingScheme(f"c{c}", "r1",
                                  {h: int(r) for h, r in zip(ids, rank_of(z))})
                )
                latents.append(np.sort(z))
            return rankings, np.concatenate(latents)

        n_iter = 10_000
        draws = np.empty((n_iter, 2))
        rankings, flat = redraw_data(weights)
        for it in range(n_iter):
            ds = Dataset(households=base.households, rankings=tuple(rankings),
                         covariate_names=base.covariate_names, scaling=base.scaling)
            sampler = GibbsSampler(spec, ds)
            state = sampler.initial_state()
            state.latents = flat.copy()
            state.weights = weights
            sampler.sample_latent_sweep(state, rng)
            sampler.update_weights(state, rng)
            weights = state.weights
            draws[it] = weights
            rankings, flat = redraw_data(weights)

        def batch_z(x, target):
            batches = x[: 50 * (x.size // 50)].reshape(50, -1).mean(axis=1)
            return (x.mean() - target) / (batches.std(ddof=1) / np.sqrt(50))

        for p in range(2):
            assert abs(batch_z(draws[:, p], 0.0)) < 4.0
            assert abs(batch_z(draws[:, p] ** 2, 6.25)) < 4.0


class TestPosteriorSamples:
    def test_save_load_round_trip(self, tmp_path):
        cfg = GenConfig(n_communities=4, households_per_community=5, seed=8)
        ds, _, _ = generate_dataset(cfg)
        samples = run_gibbs(ModelSpec(multi_ranker=True), ds, McmcConfig(60, 30, seed=1))
        path = tmp_path / "samples.npz"
        samples.save(path)
        again = PosteriorSamples.load(path)
        np.testing.assert_array_equal(again.weights, samples.weights)
        np.testing.assert_array_equal(again.precisions, samples.precisions)
        assert again.coef_names == samples.coef_names
        assert again.ranker_ids == samples.ranker_ids
        assert again.survey_weights is None

    def test_summary_rows_shape(self):
        ds = single_ranker_dataset(2, 3, seed=9)
        samples = run_gibbs(ModelSpec(), ds, McmcConfig(100, 50, seed=1))
        rows = samples.summary_rows("hybrid")
        assert [r["name"] for r in rows] == ["x1", "x2"]
        for row in rows:
            assert row["q2.5"] <= row["posterior_mean"] <= row["q97.5"]
