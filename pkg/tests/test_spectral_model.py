"""
Tests for spectral measures, matrix representations, characteristic
functions and the exact and LePage samplers.
"""

import math

import numpy as np
import pytest
from scipy import stats

from app.bank import example_model
from app.exceptions import DomainError, UnsupportedMeasureError, ZeroColumnError
from app.models import LinearRepresentation, SpectralMeasure, StableVectorModel, TruncationControl
from app.spectral_model import (
    cf_exponent,
    cf_value,
    cone_mass,
    discretize_measure,
    draw_directions,
    from_matrix,
    isotropic_abs_moment,
    lepage_sample,
    lepage_samples,
    lepage_tail_moment_probe,
    sample_vectors,
    to_matrix,
)
from app.worker_pool import chunk_rng


class TestSpectralMeasure:
    def test_one_sided_atoms_are_closed_by_symmetry(self):
        measure = SpectralMeasure.from_atoms([[1.0, 0.0], [0.0, -1.0]], [0.5, 0.25])
        assert measure.pair_count == 2
        assert measure.total_mass == pytest.approx(1.5)
        assert len(measure.signed_atoms()) == 4

    def test_both_sides_listed_with_equal_mass(self):
        measure = SpectralMeasure.from_atoms([[1.0, 0.0], [-1.0, 0.0]], [0.5, 0.5])
        assert measure.pair_count == 1
        assert measure.total_mass == pytest.approx(1.0)

    def test_asymmetric_masses_are_rejected(self):
        with pytest.raises(DomainError):
            SpectralMeasure.from_atoms([[1.0, 0.0], [-1.0, 0.0]], [0.5, 0.3])

    def test_zero_direction_is_rejected(self):
        with pytest.raises(ZeroColumnError):
            SpectralMeasure.from_atoms([[0.0, 0.0]], [1.0])

    def test_directions_are_normalized(self):
        measure = SpectralMeasure.from_atoms([[3.0, 4.0]], [1.0])
        assert measure.directions[0] == pytest.approx([0.6, 0.8])

    def test_measure_needs_positive_mass(self):
        with pytest.raises(DomainError):
            SpectralMeasure.isotropic(2, 0.0)

    def test_same_atoms_ignores_listing_order(self):
        a = SpectralMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.25])
        b = SpectralMeasure.from_atoms([[0.0, -1.0], [-1.0, 0.0]], [0.25, 0.5])
        assert a.same_atoms(b)


class TestMatrixRepresentation:
    def test_zero_column_is_rejected(self):
        with pytest.raises(ZeroColumnError):
            LinearRepresentation(1.0, [[1.0, 0.0], [0.0, 0.0]])

    def test_shared_factor_model_atoms(self):
        model = from_matrix(LinearRepresentation(0.5, [[1.0, 0.0], [1.0, -1.0]]))
        assert model.measure.pair_count == 2
        assert model.measure.total_mass == pytest.approx(2.0 ** 0.25 + 1.0)

    def test_matrix_round_trip_keeps_the_law(self):
        model = example_model("ex2", 1.3)
        rebuilt = from_matrix(to_matrix(model))
        assert rebuilt.measure.same_atoms(model.measure)

    def test_antiparallel_columns_merge(self):
        model = from_matrix(LinearRepresentation(1.0, [[1.0, -1.0], [0.0, 0.0]]))
        assert model.measure.pair_count == 1
        assert model.measure.total_mass == pytest.approx(2.0)

    def test_isotropic_measure_has_no_matrix(self):
        model = StableVectorModel(1.0, SpectralMeasure.isotropic(2, 1.0))
        with pytest.raises(UnsupportedMeasureError):
            to_matrix(model)
        with pytest.raises(UnsupportedMeasureError):
            sample_vectors(model, np.random.default_rng(0), 10)


class TestCharacteristicFunction:
    def test_independent_pair(self):
        assert cf_value(example_model("ex1", 1.0), [1.0, 1.0]) == pytest.approx(math.exp(-2.0))

    def test_shared_factor_pair(self):
        assert cf_value(example_model("ex2", 1.0), [0.0, 1.0]) == pytest.approx(math.exp(-2.0))

    def test_isotropic_moment_in_the_plane(self):
        assert isotropic_abs_moment(2, 1.0) == pytest.approx(2.0 / math.pi, rel=1e-8)

    def test_isotropic_exponent_is_rotation_invariant(self):
        model = StableVectorModel(1.2, SpectralMeasure.isotropic(3, 2.0))
        theta = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]])
        values = cf_exponent(model, theta)
        assert values[0] == pytest.approx(values[1])

    @pytest.mark.parametrize("name", ["ex1", "ex2", "ex3"])
    def test_empirical_cf_matches(self, name):
        model = example_model(name, 0.8)
        draws = sample_vectors(model, chunk_rng(3, 0, stream=1), 100_000)
        theta = np.full((1, model.dimension), 0.5)
        empirical = float(np.mean(np.cos(draws @ theta.T)))
        assert empirical == pytest.approx(cf_value(model, theta[0]), abs=0.01)


class TestDirections:
    def test_weights_follow_masses(self):
        measure = SpectralMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [0.75, 0.25])
        dirs = draw_directions(measure, np.random.default_rng(1), 40_000)
        assert np.mean(np.abs(dirs[:, 0]) == 1.0) == pytest.approx(0.75, abs=0.01)
        assert np.mean(dirs[:, 0] > 0) == pytest.approx(0.375, abs=0.01)

    def test_isotropic_directions_are_unit(self):
        dirs = draw_directions(SpectralMeasure.isotropic(3, 1.0), np.random.default_rng(2), 100)
        assert np.linalg.norm(dirs, axis=1) == pytest.approx(np.ones(100))

    def test_cone_mass_counts_signed_atoms(self):
        measure = example_model("ex1", 1.0).measure
        assert cone_mass(measure, -0.1, 0.1) == pytest.approx(0.5)
        assert cone_mass(measure, 0.1, math.pi - 0.1) == pytest.approx(0.5)


class TestDiscretization:
    def test_four_atoms_of_equal_mass(self):
        measure = discretize_measure(SpectralMeasure.isotropic(2, 1.0), 4)
        assert measure.is_atomic
        assert measure.pair_count == 2
        assert measure.masses == pytest.approx([0.25, 0.25])
        assert measure.total_mass == pytest.approx(1.0)

    def test_sphere_patches_keep_the_mass(self):
        measure = discretize_measure(SpectralMeasure.isotropic(3, 2.0), 40)
        assert measure.pair_count == 20
        assert measure.total_mass == pytest.approx(2.0)

    def test_atomic_measure_is_returned_unchanged(self):
        measure = example_model("ex1", 1.0).measure
        assert discretize_measure(measure, 8) is measure

    @pytest.mark.parametrize("m, dim", [(3, 2), (0, 2), (4, 4)])
    def test_rejects_bad_requests(self, m, dim):
        with pytest.raises(DomainError):
            discretize_measure(SpectralMeasure.isotropic(dim, 1.0), m)


class TestLePage:
    def test_marginals_match_exact_sampler(self):
        model = example_model("ex2", 1.2)
        lepage, _, _ = lepage_samples(model, chunk_rng(11, 0, stream=1), 5000)
        exact = sample_vectors(model, chunk_rng(11, 0, stream=2), 5000)
        for j in range(model.dimension):
            assert stats.ks_2samp(lepage[:, j], exact[:, j]).pvalue > 0.01

    def test_fixed_truncation(self):
        model = example_model("ex1", 0.9)
        ctrl = TruncationControl(fixed_terms=50, block=20)
        _, batch, _ = lepage_samples(model, np.random.default_rng(4), 200, ctrl)
        assert np.all(batch.terms == 50)
        assert np.all(batch.remainder_std == 0.0)

    def test_single_draw_records_arrivals(self):
        model = example_model("ex1", 1.5)
        value, state = lepage_sample(model, np.random.default_rng(8), TruncationControl(fixed_terms=30, block=10))
        assert value.shape == (2,)
        assert state.truncation_index == 30
        assert state.arrivals.shape == (30,)
        assert np.all(np.diff(state.arrivals) > 0)

    def test_isotropic_model_can_be_sampled(self):
        model = StableVectorModel(1.1, SpectralMeasure.isotropic(2, 1.0))
        values, batch, _ = lepage_samples(model, np.random.default_rng(9), 500)
        assert values.shape == (500, 2)
        assert batch.summary()["mean_terms"] >= 100

    def test_partial_sums_by_default(self):
        model = example_model("ex1", 1.2)
        assert not TruncationControl().gaussian_remainder
        _, batch, _ = lepage_samples(model, np.random.default_rng(5), 300, TruncationControl(max_terms=200))
        assert np.all(batch.remainder_std == 0.0)

    def test_gaussian_remainder_is_opt_in(self):
        model = example_model("ex1", 1.2)
        ctrl = TruncationControl(max_terms=200, gaussian_remainder=True)
        _, batch, _ = lepage_samples(model, np.random.default_rng(5), 300, ctrl)
        assert np.all(batch.remainder_std > 0.0)


class TestTailMomentProbe:
    def test_table_shape(self):
        table = lepage_tail_moment_probe(example_model("ex1", 0.5), 2, 0.1, [10, 50], replicates=200, seed=3)
        assert list(table.columns) == ["N", "coordinate", "moment", "std_error", "power"]
        assert len(table) == 4
        assert table["power"].iloc[0] == pytest.approx(0.6)

    def test_epsilon_at_alpha_is_rejected(self):
        with pytest.raises(DomainError):
            lepage_tail_moment_probe(example_model("ex1", 0.5), 2, 0.5, [10])

    def test_order_one_is_rejected(self):
        with pytest.raises(DomainError):
            lepage_tail_moment_probe(example_model("ex1", 0.5), 1, 0.1, [10])

    def test_truncation_below_k_is_rejected(self):
        with pytest.raises(DomainError):
            lepage_tail_moment_probe(example_model("ex1", 0.5), 3, 0.1, [2, 10])
