import math

import pytest

from app.closed_forms import (
    OrderDescriptor,
    beta_factor,
    closed_form_reference,
    cone_ratio,
    ex1_i,
    ex1_ii_cone,
    ex1_iii,
    ex1_iii_bounds,
    ex2_alpha1,
    ex2_highalpha,
    ex2_lowalpha,
    ex2_order,
    ex3_lowalpha,
    reference_ids,
    power_region_order,
)
from app.exceptions import DomainError, UnknownExampleError
from app.stable_univariate import c_alpha


class TestConstants:
    def test_independent_quadrant(self):
        assert ex1_i(0.5) == pytest.approx(0.159155, abs=1e-6)

    def test_cone_over_an_arc(self):
        assert ex1_ii_cone(1.0) == pytest.approx(0.202642, abs=1e-6)

    def test_half_plane_pair(self):
        assert ex1_iii(1.0) == pytest.approx(1.0 / (2.0 * math.pi))
        assert ex1_iii_bounds(1.0) == pytest.approx((0.0, 1.0 / math.pi))

    def test_shared_factor_constants(self):
        assert ex2_lowalpha(0.5) == pytest.approx(c_alpha(0.5) ** 2 * beta_factor(0.5) / 4.0)
        assert ex2_alpha1() == pytest.approx(1.0 / math.pi ** 2)
        assert ex2_highalpha(1.5) > 0.0

    def test_beta_factor_at_one_half(self):
        # alpha Gamma(2 alpha) Gamma(1 - alpha) / Gamma(1 + alpha) = 1
        assert beta_factor(0.5) == pytest.approx(1.0)

    def test_common_factor_constant(self):
        assert ex3_lowalpha(0.5) == pytest.approx(0.046616, abs=1e-6)

    @pytest.mark.parametrize(
        "fn, alpha",
        [(ex2_lowalpha, 1.0), (ex2_highalpha, 0.8), (ex3_lowalpha, 1.2)],
    )
    def test_wrong_regime_is_rejected(self, fn, alpha):
        with pytest.raises(DomainError):
            fn(alpha)

    def test_cone_ratio_of_independent_pair(self):
        assert cone_ratio(1.0, -0.1, 0.1) == pytest.approx(0.25)


class TestDecayOrders:
    @pytest.mark.parametrize(
        "alpha, exponent, log_power",
        [(0.25, 0.5, 0), (0.5, 1.0, 1), (1.0, 1.5, 0)],
    )
    def test_power_region_transition(self, alpha, exponent, log_power):
        order = power_region_order(alpha, 0.5)
        assert order.exponent == pytest.approx(exponent)
        assert order.log_power == log_power

    def test_shared_factor_orders(self):
        assert ex2_order(0.5) == OrderDescriptor(1.0, 0)
        assert ex2_order(1.0) == OrderDescriptor(2.0, 1)
        assert ex2_order(1.5).exponent == pytest.approx(2.5)
        assert ex2_order(1.0).has_log


class TestReferenceLookup:
    def test_every_id_resolves(self):
        assert "ex1_i" in reference_ids()
        assert closed_form_reference("ex1_i", 0.5) == pytest.approx(ex1_i(0.5))
        assert closed_form_reference("ex3_lowalpha", 0.5, {"a": 0.5}) == pytest.approx(0.046616, abs=1e-6)

    def test_unknown_id(self):
        with pytest.raises(UnknownExampleError):
            closed_form_reference("ex9", 1.0)
