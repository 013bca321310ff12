"""
Small linear programs over atom coefficients: reachability of a polyhedron by
a subset of atoms, per-coordinate floors and plain feasibility.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from tail_config import TailConfig

logger = logging.getLogger(__name__)

# (normals, offsets, strict) with rows a.x > b (strict) or a.x >= b
Piece = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _sign_bounds(signs: Optional[Sequence[int]], size: int) -> List[Tuple[Optional[float], Optional[float]]]:
    if signs is None:
        return [(None, None)] * size
    return [(0.0, None) if s > 0 else (None, 0.0) for s in signs]


def _solve(cost: np.ndarray, lhs: np.ndarray, rhs: np.ndarray, bounds) -> Optional[np.ndarray]:
    if lhs.shape[0] == 0:
        lhs = np.zeros((1, cost.size))
        rhs = np.zeros(1)
    result = linprog(cost, A_ub=-lhs, b_ub=-rhs, bounds=bounds, method="highs")
    if result.status == 0:
        return result.x
    if result.status != 2:
        logger.debug(f"linprog ended with status {result.status}: {result.message}")
    return None


def _rhs(offsets: np.ndarray, strict: np.ndarray, slack: float) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(offsets))
    return np.where(strict, offsets + slack * scale, offsets - TailConfig.LP_TIE_TOL * scale)


def feasible_point(piece: Piece, slack: float = 0.0) -> Optional[np.ndarray]:
    """Some x in the polyhedron, strict rows tightened by the slack"""
    normals, offsets, strict = piece
    n = normals.shape[1]
    return _solve(np.zeros(n), normals, _rhs(offsets, strict, slack), [(None, None)] * n)


def subset_reach(
    columns: np.ndarray,
    pieces: Iterable[Piece],
    signs: Optional[Sequence[int]] = None,
    slacks: Optional[Sequence[float]] = None,
) -> Optional[np.ndarray]:
    """Coefficients s with columns @ s inside one of the pieces, or None.

    Strict rows must hold at every slack level to count as reachable.
    """
    slacks = list(slacks or TailConfig.STRICT_SLACKS)
    size = columns.shape[1]
    bounds = _sign_bounds(signs, size)
    for normals, offsets, strict in pieces:
        lhs = normals @ columns
        witness = None
        for slack in (slacks if np.any(strict) else [0.0]):
            witness = _solve(np.zeros(size), lhs, _rhs(offsets, strict, slack), bounds)
            if witness is None:
                break
        if witness is not None:
            return witness
    return None


def coordinate_floor(
    columns: np.ndarray,
    pieces: Iterable[Piece],
    index: int,
    sign: int,
    signs: Optional[Sequence[int]] = None,
) -> Optional[float]:
    """inf of sign * s_index over the closed pieces with sign * s_index >= 0"""
    size = columns.shape[1]
    bounds = _sign_bounds(signs, size)
    bounds[index] = (0.0, None) if sign > 0 else (None, 0.0)
    cost = np.zeros(size)
    cost[index] = float(sign)
    best = None
    for normals, offsets, _ in pieces:
        lhs = normals @ columns
        closed = np.zeros(offsets.shape, dtype=bool)
        s = _solve(cost, lhs, _rhs(offsets, closed, 0.0), bounds)
        if s is None:
            continue
        value = max(float(sign * s[index]), 0.0)
        best = value if best is None else min(best, value)
    if best is not None and best < 10.0 * TailConfig.LP_TIE_TOL:
        best = 0.0
    return best
