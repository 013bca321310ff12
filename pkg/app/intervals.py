"""
Row-wise finite unions of open intervals on the real line.

Each row of an IntervalSet is one line's clip result. Empty slots are stored
as (inf, inf) so that sorting pushes them to the right.
"""

from typing import Callable, List, Tuple

import numpy as np


class IntervalSet:
    """(N, K) arrays of interval endpoints; row i is a union of up to K intervals"""

    def __init__(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.ndim == 1:
            lo = lo[:, None]
            hi = hi[:, None]
        empty = ~(lo < hi)
        self.lo = np.where(empty, np.inf, lo)
        self.hi = np.where(empty, np.inf, hi)

    @classmethod
    def empty(cls, rows: int) -> "IntervalSet":
        return cls(np.full((rows, 1), np.inf), np.full((rows, 1), np.inf))

    @classmethod
    def full(cls, rows: int) -> "IntervalSet":
        return cls(np.full((rows, 1), -np.inf), np.full((rows, 1), np.inf))

    @classmethod
    def single(cls, lo, hi, rows: int) -> "IntervalSet":
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (rows,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (rows,))
        return cls(lo[:, None], hi[:, None])

    @property
    def rows(self) -> int:
        return int(self.lo.shape[0])

    @property
    def width(self) -> int:
        return int(self.lo.shape[1])

    def valid(self) -> np.ndarray:
        return self.lo < self.hi

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(np.hstack([self.lo, other.lo]), np.hstack([self.hi, other.hi])).normalized()

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        lo = np.maximum(self.lo[:, :, None], other.lo[:, None, :]).reshape(self.rows, -1)
        hi = np.minimum(self.hi[:, :, None], other.hi[:, None, :]).reshape(self.rows, -1)
        return IntervalSet(lo, hi).normalized()

    def clamp(self, lo, hi) -> "IntervalSet":
        return self.intersect(IntervalSet.single(lo, hi, self.rows))

    def normalized(self) -> "IntervalSet":
        """Sorted, disjoint representation with all-empty columns dropped"""
        order = np.argsort(self.lo, axis=1, kind="stable")
        lo = np.take_along_axis(self.lo, order, axis=1)
        hi = np.take_along_axis(self.hi, order, axis=1)
        reach = np.maximum.accumulate(hi, axis=1)
        previous = np.hstack([np.full((self.rows, 1), -np.inf), reach[:, :-1]])
        starts = lo > previous
        # the leftmost interval opens a group even when it is unbounded below
        starts[:, 0] = lo[:, 0] < hi[:, 0]
        width = lo.shape[1]
        idx = np.broadcast_to(np.arange(width), lo.shape)
        start_pos = np.where(starts, idx, width)
        next_start = np.minimum.accumulate(start_pos[:, ::-1], axis=1)[:, ::-1]
        following = np.hstack([next_start[:, 1:], np.full((self.rows, 1), width)])
        group_hi = np.take_along_axis(reach, following - 1, axis=1)
        merged = IntervalSet(np.where(starts, lo, np.inf), np.where(starts, group_hi, np.inf))
        return merged._compact()

    def _compact(self) -> "IntervalSet":
        order = np.argsort(self.lo, axis=1, kind="stable")
        lo = np.take_along_axis(self.lo, order, axis=1)
        hi = np.take_along_axis(self.hi, order, axis=1)
        keep = max(1, int(np.max(np.sum(lo < hi, axis=1), initial=0)))
        out = IntervalSet.__new__(IntervalSet)
        out.lo = lo[:, :keep]
        out.hi = hi[:, :keep]
        return out

    def total(self, antiderivative: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Per-row sum of G(hi) - G(lo) over the intervals"""
        valid = self.valid()
        lo = np.where(valid, self.lo, 0.0)
        hi = np.where(valid, self.hi, 0.0)
        with np.errstate(invalid="ignore"):
            parts = np.where(valid, antiderivative(hi) - antiderivative(lo), 0.0)
        return parts.sum(axis=1)

    def length(self) -> np.ndarray:
        return self.total(lambda t: t)

    def contains(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, 1)
        return np.any((self.lo < t) & (t < self.hi), axis=1)

    def row(self, i: int) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.lo[i], self.hi[i]) if a < b]
