import numpy as np
import pytest
from scipy import stats

from ranktarget.errors import (
    EmptyInterval,
    InvalidParam,
    InvalidProbabilities,
    NotPositiveDefinite,
)
from ranktarget.rng import (
    RngStream,
    derive_rng,
    sample_multinomial_index,
    sample_mvn,
    sample_scaled_inv_chisq,
    sample_truncated_normal,
    truncated_normal_cdf,
)

N = 100_000


class TestStreams:
    def test_same_stream_reproduces_bit_for_bit(self):
        a = RngStream(42, 3).generator.standard_normal(1000)
        b = RngStream(42, 3).generator.standard_normal(1000)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(42, 0).generator.standard_normal(1000)
        b = RngStream(42, 1).generator.standard_normal(1000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.1


class TestTruncatedNormal:
    def test_untruncated_mean(self):
        rng = derive_rng(0)
        x = sample_truncated_normal(np.zeros(N), 1.0, -np.inf, np.inf, rng)
        assert abs(x.mean()) < 0.02

    def test_symmetric_interval_mean_zero(self):
        rng = derive_rng(1)
        x = sample_truncated_normal(np.zeros(N), 1.0, -0.8, 0.8, rng)
        assert abs(x.mean()) < 0.01

    def test_positive_halfline_matches_analytic_and_rejection_oracle(self):
        rng = derive_rng(2)
        x = sample_truncated_normal(np.zeros(N), 1.0, 0.0, np.inf, rng)
        assert x.mean() == pytest.approx(np.sqrt(2.0 / np.pi), abs=0.01)
        raw = derive_rng(3).standard_normal(4 * N)
        oracle = raw[raw > 0][:N]
        assert x.mean() == pytest.approx(oracle.mean(), abs=0.01)

    def test_draws_strictly_inside_interval(self):
        rng = derive_rng(4)
        x = sample_truncated_normal(np.full(10_000, 2.0), 4.0, 1.0, 1.5, rng)
        assert np.all((x > 1.0) & (x < 1.5))

    def test_empty_interval(self):
        with pytest.raises(EmptyInterval):
            sample_truncated_normal(0.0, 1.0, 1.0, 1.0, derive_rng(0))

    def test_nonpositive_variance(self):
        with pytest.raises(InvalidParam):
            sample_truncated_normal(0.0, 0.0, -1.0, 1.0, derive_rng(0))

    def test_far_tail_is_finite_and_in_range(self):
        rng = derive_rng(5)
        x = sample_truncated_normal(np.zeros(1000), 1.0, 8.0, np.inf, rng)
        assert np.all(np.isfinite(x)) and np.all(x > 8.0)

    @pytest.mark.parametrize("case", range(6))
    def test_ks_against_cdf_oracle(self, case):
        rng = derive_rng(100 + case)
        params = [
            (0.0, 1.0, -np.inf, np.inf),
            (1.0, 4.0, 0.0, 3.0),
            (-2.0, 0.25, -np.inf, -1.5),
            (0.0, 1.0, 5.0, np.inf),
            (0.0, 1.0, 6.0, 6.5),
            (3.0, 9.0, -1.0, 0.5),
        ][case]
        mean, var, lo, hi = params
        x = sample_truncated_normal(np.full(20_000, mean), var, lo, hi, rng)
        res = stats.kstest(x, lambda v: truncated_normal_cdf(v, mean, var, lo, hi))
        assert res.pvalue > 0.001


class TestScaledInvChisq:
    def test_positive(self):
        assert sample_scaled_inv_chisq(1.0, 1.0, derive_rng(0)) > 0

    def test_mean_matches_monte_carlo_oracle(self):
        # E[scale/X] = scale/(df-2); oracle via an independent chi-square route
        draws = sample_scaled_inv_chisq(5.0, 3.0, derive_rng(6), size=N)
        assert draws.mean() == pytest.approx(1.0, abs=0.03)
        oracle = 3.0 / stats.chi2.rvs(5.0, size=N, random_state=7)
        assert draws.mean() == pytest.approx(oracle.mean(), abs=0.05)

    def test_concentration_at_large_df(self):
        draws = sample_scaled_inv_chisq(1e6, 1e6, derive_rng(8), size=10_000)
        assert draws.std() < 0.01

    def test_invalid_params(self):
        with pytest.raises(InvalidParam):
            sample_scaled_inv_chisq(0.0, 1.0, derive_rng(0))
        with pytest.raises(InvalidParam):
            sample_scaled_inv_chisq(1.0, -1.0, derive_rng(0))


class TestMvn:
    def test_identity_moments(self):
        rng = derive_rng(9)
        draws = np.array([sample_mvn(np.zeros(2), np.eye(2), rng) for _ in range(20_000)])
        np.testing.assert_allclose(draws.var(axis=0), [1.0, 1.0], atol=0.05)
        assert abs(np.corrcoef(draws.T)[0, 1]) < 0.03

    def test_near_degenerate_sticks_to_mean(self):
        rng = derive_rng(10)
        draws = np.array(
            [sample_mvn(np.array([1.0, 2.0]), np.eye(2) * 1e-4, rng) for _ in range(200)]
        )
        assert np.all(np.abs(draws - [1.0, 2.0]) < 0.05)

    def test_correlation_recovered(self):
        rng = derive_rng(11)
        cov = np.array([[1.0, 0.5], [0.5, 1.0]])
        draws = np.array([sample_mvn(np.zeros(2), cov, rng) for _ in range(N // 2)])
        assert np.corrcoef(draws.T)[0, 1] == pytest.approx(0.5, abs=0.02)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            sample_mvn(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), derive_rng(0))


class TestMultinomialIndex:
    def test_degenerate(self):
        rng = derive_rng(12)
        assert all(
            sample_multinomial_index([1.0, 0.0, 0.0], rng) == 0 for _ in range(100)
        )

    def test_uniform_frequencies(self):
        rng = derive_rng(13)
        draws = np.array([sample_multinomial_index([1 / 3] * 3, rng) for _ in range(N)])
        freqs = np.bincount(draws, minlength=3) / N
        np.testing.assert_allclose(freqs, [1 / 3] * 3, atol=0.01)

    def test_skewed_frequencies(self):
        rng = derive_rng(14)
        p = [0.2, 0.3, 0.5]
        draws = np.array([sample_multinomial_index(p, rng) for _ in range(N)])
        freqs = np.bincount(draws, minlength=3) / N
        np.testing.assert_allclose(freqs, p, atol=0.01)

    def test_invalid(self):
        with pytest.raises(InvalidProbabilities):
            sample_multinomial_index([0.5, 0.6], derive_rng(0))
        with pytest.raises(InvalidProbabilities):
            sample_multinomial_index([-0.1, 1.1], derive_rng(0))
