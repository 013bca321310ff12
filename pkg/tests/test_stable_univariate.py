"""
Tests for the univariate symmetric stable law: tail constant, density,
distribution function, absolute moments and samplers.
"""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gamma

from app.exceptions import DomainError
from app.stable_univariate import (
    abs_moment,
    c_alpha,
    cdf_array,
    interval_probability,
    pdf_array,
    sf_array,
    std_stable_cdf,
    std_stable_pdf,
    std_stable_samples,
    std_stable_sf,
    tail_conditioned_samples,
    tail_quantile_array,
)


class TestTailConstant:
    @pytest.mark.parametrize(
        "alpha, expected",
        [(1.0, 2.0 / math.pi), (0.5, 0.797885), (1.5, 0.398942)],
    )
    def test_known_values(self, alpha, expected):
        assert c_alpha(alpha) == pytest.approx(expected, abs=1e-6)

    def test_continuous_through_one(self):
        assert c_alpha(1.0 - 1e-4) == pytest.approx(c_alpha(1.0), rel=1e-3)
        assert c_alpha(1.0 + 1e-4) == pytest.approx(c_alpha(1.0), rel=1e-3)

    @pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0, float("nan")])
    def test_rejects_alpha_outside_open_interval(self, alpha):
        with pytest.raises(DomainError):
            c_alpha(alpha)


class TestDensityAndDistribution:
    def test_density_at_zero(self):
        assert std_stable_pdf(1.0, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-8)
        assert std_stable_pdf(0.5, 0.0) == pytest.approx(2.0 / math.pi, rel=1e-8)

    def test_cauchy_case_matches_closed_form(self):
        assert std_stable_cdf(1.0, 1.0) == pytest.approx(0.75, abs=1e-8)
        for x in (0.3, 2.0, 7.5):
            assert std_stable_pdf(1.0, x) == pytest.approx(1.0 / (math.pi * (1.0 + x * x)), rel=1e-5)

    def test_symmetry(self):
        for alpha in (0.5, 1.2, 1.8):
            assert std_stable_sf(alpha, -1.7) == pytest.approx(1.0 - std_stable_sf(alpha, 1.7), abs=1e-10)
            assert std_stable_pdf(alpha, -0.8) == pytest.approx(std_stable_pdf(alpha, 0.8), rel=1e-10)

    def test_vectorized_agrees_with_scalar(self):
        x = np.array([-3.0, -0.5, 0.0, 0.7, 4.0, 50.0])
        for alpha in (0.7, 1.5):
            scalar_pdf = [std_stable_pdf(alpha, v) for v in x]
            scalar_sf = [std_stable_sf(alpha, v) for v in x]
            assert pdf_array(alpha, x) == pytest.approx(scalar_pdf, rel=1e-5, abs=1e-10)
            assert sf_array(alpha, x) == pytest.approx(scalar_sf, rel=1e-5, abs=1e-10)
            assert cdf_array(alpha, x) == pytest.approx(1.0 - np.array(scalar_sf), abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_tail_ratio_approaches_constant(self, alpha):
        h = 1e8
        assert 2.0 * h ** alpha * std_stable_sf(alpha, h) == pytest.approx(c_alpha(alpha), rel=1e-3)

    def test_interval_probability(self):
        assert interval_probability(1.0, np.array([-1.0]), np.array([1.0]))[0] == pytest.approx(0.5, abs=1e-8)
        assert interval_probability(1.0, np.array([1.0]), np.array([np.inf]))[0] == pytest.approx(0.25, abs=1e-8)
        assert interval_probability(1.0, np.array([2.0]), np.array([1.0]))[0] == 0.0


class TestAbsoluteMoments:
    @pytest.mark.parametrize("alpha, p", [(1.5, 1.0), (1.2, 0.5), (0.8, 0.3)])
    def test_matches_gamma_formula(self, alpha, p):
        expected = 2.0 ** p * gamma((1.0 + p) / 2.0) * gamma(1.0 - p / alpha) / (
            math.sqrt(math.pi) * gamma(1.0 - p / 2.0)
        )
        assert abs_moment(alpha, p) == pytest.approx(expected, rel=1e-5)

    @pytest.mark.parametrize("p", [-0.1, 1.5, 2.0])
    def test_rejects_orders_outside_domain(self, p):
        with pytest.raises(DomainError):
            abs_moment(1.5, p)


class TestSamplers:
    def test_cauchy_draws_pass_ks(self, rng):
        draws = std_stable_samples(1.0, rng, size=20_000)
        assert stats.kstest(draws, stats.cauchy.cdf).pvalue > 0.01

    def test_draws_match_distribution_function(self, rng):
        draws = std_stable_samples(1.5, rng, size=20_000)
        assert stats.kstest(draws, lambda x: cdf_array(1.5, np.asarray(x))).pvalue > 0.01

    def test_seeded_draws_repeat(self):
        first = std_stable_samples(0.7, np.random.default_rng(5), size=100)
        second = std_stable_samples(0.7, np.random.default_rng(5), size=100)
        assert np.array_equal(first, second)

    def test_tail_conditioned_draws_exceed_threshold(self, rng):
        draws = tail_conditioned_samples(0.8, rng, 50.0, 5000)
        assert np.all(np.abs(draws) >= 50.0)
        assert 0.4 < np.mean(draws > 0) < 0.6

    def test_tail_quantile_inverts_survival(self):
        assert tail_quantile_array(1.0, np.array([0.25]))[0] == pytest.approx(1.0, rel=1e-3)
        u = np.array([1e-4, 1e-2, 0.1])
        x = tail_quantile_array(1.3, u)
        assert sf_array(1.3, x) == pytest.approx(u, rel=1e-3)

    @pytest.mark.parametrize("u", [0.0, 0.6])
    def test_tail_quantile_rejects_levels(self, u):
        with pytest.raises(DomainError):
            tail_quantile_array(1.0, np.array([u]))
