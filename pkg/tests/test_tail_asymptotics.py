"""
Tests for reachability orders, coordinate floors, quadrature and sphere-form
limit constants, and the interior/dilation sandwich.
"""

import math

import numpy as np
import pytest

from app import closed_forms
from app.bank import example_model, example_region
from app.exceptions import DomainError, NoReachabilityError
from app.models import SpectralMeasure, StableVectorModel
from app.region_geometry import RegionVariant, Union, ball, box, halfspace
from app.stable_univariate import c_alpha
from app.tail_asymptotics import (
    L_montecarlo,
    L_quadrature,
    coordinate_floors,
    eta_increments_diverge,
    gplus_gminus,
    min_hits,
    theorem_bounds,
)


class TestMinHits:
    def test_quadrant_needs_both_coordinates(self, ex1_model, quadrant):
        order = min_hits(ex1_model, quadrant)
        assert order.k == 2
        assert order.subset == (0, 1)
        assert order.verified
        assert order.variant == "closure"

    def test_shared_factor_closure_is_hit_by_one_atom(self, ex2_model, ex2_region):
        order = min_hits(ex2_model, ex2_region)
        assert order.k == 1
        assert order.point == pytest.approx([1.0, 1.0], abs=1e-6)

    def test_shared_factor_interior_needs_two(self, ex2_model, ex2_region):
        assert min_hits(ex2_model, ex2_region, RegionVariant.interior()).k == 2

    def test_half_plane_pair(self, ex1_model):
        region = example_region("ex1_iii")
        assert min_hits(ex1_model, region).k == 1
        assert min_hits(ex1_model, region, RegionVariant.interior()).k == 2

    def test_unreachable_region(self):
        model = StableVectorModel(1.0, SpectralMeasure.from_atoms([[1.0, 0.0]], [0.5]))
        with pytest.raises(NoReachabilityError):
            min_hits(model, box([None, 1.0], [None, None]))

    def test_power_region_needs_both_independent_coordinates(self):
        region = example_region("power", sigma=0.5)
        assert min_hits(example_model("ex1", 1.0), region, candidate_k=2).k == 2
        assert min_hits(example_model("ex2", 1.0), region, candidate_k=2).k == 1


class TestEtaIncrements:
    ETAS = [10.0 ** (-2 * (j + 1)) for j in range(5)]

    def _values(self, shape):
        return [shape(eta) for eta in self.ETAS]

    def test_slowly_converging_shell_is_finite(self):
        # increments shrink like eta^0.02
        assert not eta_increments_diverge(self.ETAS, self._values(lambda eta: 1.0 - 0.5 * eta ** 0.02))

    def test_fast_convergence_is_finite(self):
        assert not eta_increments_diverge(self.ETAS, self._values(lambda eta: 1.0 - eta ** 0.5))

    def test_logarithmic_growth_diverges(self):
        assert eta_increments_diverge(self.ETAS, self._values(lambda eta: math.log(1.0 / eta)))

    def test_power_growth_diverges(self):
        assert eta_increments_diverge(self.ETAS, self._values(lambda eta: eta ** -0.1))

    def test_flat_values_are_finite(self):
        assert not eta_increments_diverge(self.ETAS, [0.3] * 5)

class TestCoordinateFloors:
    def test_quadrant(self, ex1_model, quadrant):
        floors = coordinate_floors(ex1_model, (0, 1), quadrant)
        assert floors.feasible
        assert floors.floors == pytest.approx([1.0, 1.0], abs=1e-6)

    def test_shared_factor_second_coefficient_can_vanish(self, ex2_model, ex2_region):
        floors = coordinate_floors(ex2_model, (0, 1), ex2_region)
        assert floors.floors == pytest.approx([1.0, 0.0], abs=1e-6)

    def test_single_axis_cannot_reach_quadrant(self, ex1_model, quadrant):
        assert not coordinate_floors(ex1_model, (0,), quadrant).feasible


class TestQuadrature:
    def test_independent_quadrant(self, quadrant, small_qmc):
        value = L_quadrature(example_model("ex1", 0.5), quadrant, 2)
        assert value.is_finite
        assert value.value == pytest.approx(closed_forms.ex1_i(0.5), rel=1e-9)
        assert value.metadata["method"] == "quadrature"
        assert value.metadata["cells"] == 1

    def test_single_atom_constants_on_a_half_plane_pair(self, ex1_model):
        region = example_region("ex1_iii")
        closure = L_quadrature(ex1_model, region, 1, RegionVariant.closure())
        interior = L_quadrature(ex1_model, region, 1, RegionVariant.interior())
        assert closure.value == pytest.approx(c_alpha(1.0) / 2.0)
        assert closure.metadata["method"] == "exact_line"
        assert interior.value == 0.0

    def test_dilation_makes_lower_order_reachable(self, ex2_model, ex2_region):
        value = L_quadrature(ex2_model, ex2_region, 2, RegionVariant.dilated(0.1))
        assert not value.is_finite
        assert value.metadata["rule"] == "interior_reachable_below_k"
        witness = value.divergence_witness
        assert witness.k == 1
        assert ex2_region.contains(witness.point, RegionVariant.dilated(0.1))
        assert value.as_float() == math.inf

    @pytest.mark.parametrize("k", [0, -1, 1.5])
    def test_order_must_be_a_positive_integer(self, ex1_model, quadrant, k):
        with pytest.raises(DomainError):
            L_quadrature(ex1_model, quadrant, k)

    def test_region_touching_origin_is_rejected(self, ex1_model):
        with pytest.raises(DomainError):
            L_quadrature(ex1_model, halfspace([1.0, 0.0], 0.0), 1)

    def test_shared_factor_below_one_small_budget(self, ex2_model, ex2_region, small_qmc):
        value = L_quadrature(ex2_model, ex2_region, 2)
        assert value.is_finite
        assert value.value == pytest.approx(1.0 / (2.0 * math.pi), rel=0.05)

    def test_ball_complement_uses_both_rays_of_each_atom(self, ex1_model):
        value = L_quadrature(ex1_model, ball([0.0, 0.0], 1.0, inside=False), 1)
        assert value.metadata["method"] == "exact_line"
        assert value.value == pytest.approx(4.0 / math.pi, rel=1e-9)

    @pytest.mark.slow
    def test_shared_factor_below_one(self, ex2_model, ex2_region):
        value = L_quadrature(ex2_model, ex2_region, 2)
        assert value.value == pytest.approx(closed_forms.ex2_lowalpha(0.5), rel=1e-2)

    @pytest.mark.slow
    def test_shared_factor_closure_diverges_at_alpha_one(self, ex2_region):
        value = L_quadrature(example_model("ex2", 1.0), ex2_region, 2)
        assert not value.is_finite
        assert value.divergence_witness.k == 1

    @pytest.mark.slow
    def test_common_factor_in_three_dimensions(self):
        value = L_quadrature(example_model("ex3", 0.5, a=0.5), example_region("ex3"), 2)
        assert value.value == pytest.approx(closed_forms.ex3_lowalpha(0.5), rel=1e-2)

    @pytest.mark.slow
    def test_shared_factor_just_below_one_is_finite(self, ex2_region):
        value = L_quadrature(example_model("ex2", 0.98), ex2_region, 2)
        assert value.is_finite
        assert value.value > 0.0


class TestSphereMonteCarlo:
    def test_independent_quadrant(self, ex1_model, quadrant):
        value = L_montecarlo(ex1_model, quadrant, 2, n=100_000, s_min=0.5)
        assert value.value == pytest.approx(closed_forms.ex1_i(1.0), rel=0.08)
        assert value.metadata["method"] == "sphere_monte_carlo"

    def test_rejects_region_touching_origin(self, ex1_model):
        with pytest.raises(DomainError):
            L_montecarlo(ex1_model, halfspace([0.0, 1.0], 0.0), 1, n=1000)


class TestTheoremBounds:
    def test_half_plane_pair_brackets_the_limit(self, ex1_model):
        bounds = theorem_bounds(ex1_model, example_region("ex1_iii"), 1)
        assert bounds.lower.value == 0.0
        assert bounds.upper_converged
        assert bounds.upper.value == pytest.approx(c_alpha(1.0) / 2.0, rel=1e-2)
        assert bounds.lower.value <= closed_forms.ex1_iii(1.0) <= bounds.upper.value

    def test_shared_factor_first_order_collapses(self, ex2_region, small_qmc):
        bounds = theorem_bounds(example_model("ex2", 0.7), ex2_region, 1)
        assert bounds.lower.value <= 1e-4
        assert bounds.upper.value <= 1e-4
        assert bounds.upper_converged

    def test_shared_factor_second_order_upper_is_infinite(self, ex2_model, ex2_region, small_qmc):
        bounds = theorem_bounds(ex2_model, ex2_region, 2)
        assert bounds.lower.is_finite
        assert not bounds.upper.is_finite
        assert bounds.upper.metadata["rule"] == "closure_reachable_below_k"
        assert bounds.upper.divergence_witness.k == 1

    def test_lower_bound_by_union_erosion_is_conservative(self, ex1_model):
        region = Union([box([1.0, None], [None, -1.0]), box([None, 1.0], [-1.0, None])])
        bounds = theorem_bounds(ex1_model, region, 1, lower_via_erosion=True)
        assert bounds.conservative
        assert bounds.lower.value <= bounds.upper.value


class TestBallPerturbations:
    def test_g_plus_matches_the_single_atom_constant(self, ex2_model, ex2_region, small_qmc):
        eps_grid = [0.1, 0.3]
        table = gplus_gminus(ex2_model, ex2_region, [1.0, 1.0], eps_grid)
        assert list(table.columns) == ["eps", "g_plus", "g_plus_err", "g_minus", "g_minus_err"]
        expected = [c_alpha(0.5) / 2.0 * ((1.0 - e) ** -0.5 - (1.0 + e) ** -0.5) for e in eps_grid]
        assert table["g_plus"].to_numpy() == pytest.approx(expected, rel=1e-9)
        assert np.all(np.isfinite(table["g_minus"].to_numpy()))

    def test_g_plus_keeps_rays_unbounded_below(self, ex1_model, small_qmc):
        table = gplus_gminus(ex1_model, halfspace([-1.0, 0.0], 1.0), [2.0, 0.0], [0.5])
        expected = c_alpha(1.0) / 2.0 * (1.0 + 1.0 / 1.5 - 1.0 / 2.5)
        assert table["g_plus"].iloc[0] == pytest.approx(expected, rel=1e-9)

    @pytest.mark.slow
    def test_monotone_in_eps(self, ex2_model, ex2_region):
        table = gplus_gminus(ex2_model, ex2_region, [1.0, 1.0], [0.05, 0.1, 0.2, 0.4])
        assert np.all(np.diff(table["g_plus"].to_numpy()) >= 0.0)
        slack = 3.0 * table["g_minus_err"].to_numpy()[1:] + 1e-9
        assert np.all(np.diff(table["g_minus"].to_numpy()) <= slack)
