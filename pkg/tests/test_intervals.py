import numpy as np
import pytest

from app.intervals import IntervalSet


class TestIntervalSet:
    def test_empty_input_is_normalized_to_inf(self):
        intervals = IntervalSet([2.0, 0.0], [1.0, 1.0])
        assert intervals.row(0) == []
        assert intervals.row(1) == [(0.0, 1.0)]

    def test_union_merges_overlaps(self):
        a = IntervalSet.single(0.0, 2.0, 1)
        b = IntervalSet.single(1.0, 3.0, 1)
        assert a.union(b).row(0) == [(0.0, 3.0)]

    def test_union_keeps_disjoint_pieces_sorted(self):
        a = IntervalSet.single(5.0, 6.0, 1)
        b = IntervalSet.single(-1.0, 1.0, 1)
        merged = a.union(b)
        assert merged.row(0) == [(-1.0, 1.0), (5.0, 6.0)]
        assert merged.width == 2

    def test_intersect_row_wise(self):
        a = IntervalSet([[0.0, 4.0], [0.0, np.inf]], [[2.0, 6.0], [10.0, np.inf]])
        b = IntervalSet.single([1.0, 3.0], [5.0, 4.0], 2)
        result = a.intersect(b)
        assert result.row(0) == [(1.0, 2.0), (4.0, 5.0)]
        assert result.row(1) == [(3.0, 4.0)]

    def test_clamp_and_length(self):
        intervals = IntervalSet.full(3).clamp(np.array([0.0, 1.0, 2.0]), 3.0)
        assert intervals.length() == pytest.approx([3.0, 2.0, 1.0])

    def test_total_uses_antiderivative(self):
        intervals = IntervalSet([[0.0, 2.0]], [[1.0, 3.0]])
        assert intervals.total(lambda t: t ** 2)[0] == pytest.approx(1.0 + 5.0)

    def test_contains_is_open(self):
        intervals = IntervalSet.single(0.0, 1.0, 3)
        assert intervals.contains(np.array([0.0, 0.5, 1.0])).tolist() == [False, True, False]

    def test_empty_rows_contribute_nothing(self):
        assert IntervalSet.empty(2).length() == pytest.approx([0.0, 0.0])
        assert not IntervalSet.empty(1).valid().any()

    def test_left_ray_survives_normalization(self):
        ray = IntervalSet([-np.inf], [-1.0])
        assert ray.normalized().row(0) == [(-np.inf, -1.0)]
        assert IntervalSet.full(1).clamp(-np.inf, 0.0).row(0) == [(-np.inf, 0.0)]

    def test_union_keeps_both_rays(self):
        left = IntervalSet.single(-np.inf, -1.0, 2)
        right = IntervalSet.single(1.0, np.inf, 2)
        merged = left.union(right)
        assert merged.row(1) == [(-np.inf, -1.0), (1.0, np.inf)]
        assert left.union(IntervalSet.single(-2.0, 3.0, 2)).row(0) == [(-np.inf, 3.0)]
