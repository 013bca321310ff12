"""
Limit constants L(E, k, alpha) of h^(k alpha) P(X in hE), reachability orders,
divergence detection and the dilation/interior sandwich.

The atomic (subset) form is
    L = (C_a^k / 2^k) sum_{|J| = k} int_{R^k} 1{sum s_i y_i in E} prod a|s_i|^-(1+a) ds
and is evaluated cell by cell (subset J, sign pattern) in t_i = |s_i|^-a,
where the measure a|s|^-(1+a) ds becomes Lebesgue measure.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import betainc
from scipy.stats import beta as beta_law
from scipy.stats import qmc

from app.exceptions import AccuracyError, CapabilityError, DomainError, NoReachabilityError
from app.intervals import IntervalSet
from app.linear_programs import coordinate_floor, subset_reach
from app.mc_estimation import batch_means
from app.models import CoordinateFloors, LValue, StableVectorModel, TailOrder, TheoremBounds
from app.region_geometry import (
    BOUNDARY_SLAB,
    DILATE_ERODE,
    LINE_CLIP,
    LP_FEASIBLE,
    Region,
    RegionVariant,
    Union,
    apply_variant,
    ball,
    difference_with_ball,
)
from app.spectral_model import draw_directions, to_matrix
from app.stable_univariate import c_alpha
from app.worker_pool import WorkerPool, chunk_rng
from tail_config import TailConfig

logger = logging.getLogger(__name__)

RICHARDSON_REL_TOL = 1e-3
RICHARDSON_ABS_TOL = 1e-6
# fitted decay exponent of the eta increments at or below which a cell diverges
ETA_DECAY_TOL = 0.005
ETA_NEGLIGIBLE = 1e-9
PROBE_DRAWS = 4096


@dataclass
class Cell:
    subset: Tuple[int, ...]
    signs: Tuple[int, ...]
    floors: np.ndarray
    inner: int

    @property
    def zero_floor(self) -> bool:
        return bool(np.any(self.floors == 0.0))


def _half_line_measure(intervals: IntervalSet, sign: int, alpha: float, cutoff: float) -> np.ndarray:
    """int over the intervals of a|s|^-(1+a) ds on one sign half-line, |s| > cutoff"""
    if sign > 0:
        part = intervals.clamp(cutoff, np.inf)
        with np.errstate(divide="ignore"):
            return part.total(lambda s: -(s ** -alpha))
    part = intervals.clamp(-np.inf, -cutoff)
    with np.errstate(divide="ignore"):
        return part.total(lambda s: np.abs(s) ** -alpha)


def _strata_map(u: np.ndarray, t_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 1) -> (0, t_max) via t = v/(1-v) with equal effort on each v-stratum"""
    edges = np.asarray(TailConfig.ZERO_FLOOR_STRATA, dtype=float)
    count = edges.size - 1
    v_max = 1.0 if math.isinf(t_max) else t_max / (1.0 + t_max)
    slot = np.minimum((u * count).astype(int), count - 1)
    lo, hi = edges[slot], edges[slot + 1]
    w = lo + (u * count - slot) * (hi - lo)
    v = v_max * w
    t = v / (1.0 - v)
    jac = count * (hi - lo) * v_max / (1.0 - v) ** 2
    return t, jac


def _box_map(u: np.ndarray, t_max: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 1) -> (0, t_max) through the symmetric Beta(q, q) distribution function"""
    if q == 1.0:
        return t_max * u, np.full(u.shape, t_max)
    return t_max * betainc(q, q, u), t_max * beta_law.pdf(u, q, q)


def _log_map(u: np.ndarray, t_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 1) -> (0, t_max) with equal effort per decade of t"""
    span = math.log1p(t_max)
    t = np.expm1(u * span)
    return t, (1.0 + t) * span


def eta_increments_diverge(etas: Sequence[float], values: Sequence[float]) -> bool:
    """Truncated values v(eta) for shrinking eta; True when the shell increments do not decay like eta^b, b > 0"""
    values = np.asarray(values, dtype=float)
    steps = np.diff(values)
    if not steps[-1] > ETA_NEGLIGIBLE * max(abs(values[-1]), 1e-300):
        return False
    if np.any(steps <= 0.0):
        return False
    # increments ~ eta^b: b > 0 converges, b = 0 is logarithmic, b < 0 grows
    slope = np.polyfit(np.log(np.asarray(etas[1:], dtype=float)), np.log(steps), 1)[0]
    return bool(slope <= ETA_DECAY_TOL)


class TailAsymptoticsService:
    """Quadrature, Monte Carlo and sandwich evaluation of L(E, k, alpha)"""

    def __init__(self, workers: Optional[int] = None):
        self.pool = WorkerPool(workers)

    def set_workers(self, workers: int) -> None:
        self.pool = WorkerPool(workers)

    # ---- reachability -------------------------------------------------

    @staticmethod
    def _columns(model: StableVectorModel) -> np.ndarray:
        return to_matrix(model).columns

    @staticmethod
    def _witness(target: Region, cols: np.ndarray, subset: Tuple[int, ...], s: np.ndarray) -> TailOrder:
        point = cols @ s
        if not target.contains(point) and target.scale_closed:
            for power in range(1, 60):
                if target.contains(point * 2.0 ** power):
                    s = s * 2.0 ** power
                    point = cols @ s
                    break
        verified = bool(target.contains(point))
        if not verified and DILATE_ERODE in target.capabilities:
            # LP tie tolerance can leave the point on the far side of a face
            verified = bool(target.dilated(BOUNDARY_SLAB * 1e3).contains(point))
        return TailOrder(len(subset), "", subset, np.asarray(s), point, verified)

    def _reach(
        self,
        columns: np.ndarray,
        target: Region,
        candidate_k: Optional[int] = None,
        seed: int = TailConfig.MASTER_SEED,
    ) -> TailOrder:
        m = columns.shape[1]
        if LP_FEASIBLE in target.capabilities and (target.lp_exact or target.scale_closed):
            pieces = target.lp_pieces()
            for size in range(1, m + 1):
                for subset in itertools.combinations(range(m), size):
                    cols = columns[:, subset]
                    s = subset_reach(cols, pieces)
                    if s is not None:
                        return self._witness(target, cols, subset, s)
            raise NoReachabilityError(f"no subset of the {m} atom pairs reaches {target.describe()}")

        if candidate_k is None:
            raise CapabilityError(
                "reachability without linear programs needs a candidate order",
                node=target.offending_node(LP_FEASIBLE),
            )
        rng = np.random.default_rng(seed)
        for size in range(1, min(candidate_k, m + 1)):
            for subset in itertools.combinations(range(m), size):
                cols = columns[:, subset]
                mags = 10.0 ** rng.uniform(-3.0, 3.0, size=(PROBE_DRAWS, size))
                signs = np.where(rng.uniform(size=(PROBE_DRAWS, size)) < 0.5, -1.0, 1.0)
                coeffs = mags * signs
                hits = np.flatnonzero(target.member(coeffs @ cols.T))
                if hits.size:
                    return TailOrder(size, "", subset, coeffs[hits[0]], cols @ coeffs[hits[0]], True)
        logger.warning(f"reachability order {candidate_k} for {target.describe()} is unverified (random probing only)")
        return TailOrder(candidate_k, "", None, None, None, verified=False)

    def min_hits(
        self,
        model: StableVectorModel,
        region: Region,
        variant: Optional[RegionVariant] = None,
        candidate_k: Optional[int] = None,
        seed: int = TailConfig.MASTER_SEED,
    ) -> TailOrder:
        """Smallest number of atom pairs whose span meets the region variant"""
        variant = variant or RegionVariant.closure()
        order = self._reach(self._columns(model), apply_variant(region, variant), candidate_k, seed)
        order.variant = str(variant)
        return order

    def coordinate_floors(
        self,
        model: StableVectorModel,
        subset: Sequence[int],
        region: Region,
        variant: Optional[RegionVariant] = None,
    ) -> CoordinateFloors:
        """Per-coordinate lower bounds on |s_i| over representations in the closure"""
        target = apply_variant(region, variant or RegionVariant.closure()).closure()
        target.require(LP_FEASIBLE)
        subset = tuple(int(i) for i in subset)
        cols = self._columns(model)[:, subset]
        pieces = target.lp_pieces()
        if subset_reach(cols, pieces) is None:
            return CoordinateFloors(subset, False)
        floors = []
        for i in range(len(subset)):
            options = [coordinate_floor(cols, pieces, i, sign) for sign in (1, -1)]
            options = [f for f in options if f is not None]
            floors.append(min(options) if options else 0.0)
        return CoordinateFloors(subset, True, np.array(floors))

    # ---- cells --------------------------------------------------------

    def _cells(self, columns: np.ndarray, target: Region, k: int) -> List[Cell]:
        m = columns.shape[1]
        closed = target.closure()
        use_lp = LP_FEASIBLE in closed.capabilities
        pieces = closed.lp_pieces() if use_lp else None
        cells = []
        for subset in itertools.combinations(range(m), k):
            cols = columns[:, subset]
            for signs in itertools.product((1, -1), repeat=k):
                if use_lp:
                    if subset_reach(cols, pieces, signs) is None:
                        continue
                    floors = []
                    for i in range(k):
                        f = coordinate_floor(cols, pieces, i, signs[i], signs)
                        floors.append(0.0 if f is None else f)
                    floors = np.array(floors)
                else:
                    floors = np.zeros(k)
                supported = [i for i in range(k) if target.supports_direction(cols[:, i])]
                if not supported:
                    raise CapabilityError(
                        f"no atom of subset {subset} is a supported clip direction", node=target.describe()
                    )
                zero = [i for i in supported if floors[i] == 0.0]
                inner = zero[0] if zero else supported[-1]
                cells.append(Cell(subset, tuple(signs), floors, inner))
        return cells

    @staticmethod
    def _singular_q(alpha: float, cell: Cell) -> float:
        if cell.floors[cell.inner] > 0.0:
            return 1.0
        if alpha < 1.0:
            return float(max(2, math.ceil(1.5 / (1.0 - alpha))))
        return 3.0

    def _outer_points(
        self,
        alpha: float,
        cols: np.ndarray,
        cell: Cell,
        u: np.ndarray,
        eta_min: Optional[float] = None,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Partial sums over the outer coordinates, their weights, and the largest t among zero-floor ones"""
        outer = [i for i in range(len(cell.subset)) if i != cell.inner]
        q = self._singular_q(alpha, cell)
        partial = np.zeros((u.shape[0], cols.shape[0]))
        weight = np.ones(u.shape[0])
        zero_t = np.zeros(u.shape[0])
        for col, i in enumerate(outer):
            floor = cell.floors[i]
            if floor > 0.0:
                t, jac = _box_map(u[:, col], floor ** -alpha, q)
            elif eta_min is not None:
                t, jac = _log_map(u[:, col], eta_min ** -alpha)
                zero_t = np.maximum(zero_t, t)
            else:
                t, jac = _strata_map(u[:, col], math.inf)
            with np.errstate(divide="ignore"):
                s = cell.signs[i] * t ** (-1.0 / alpha)
            partial += s[:, None] * cols[:, i]
            weight *= jac
        finite = np.all(np.isfinite(partial), axis=1)
        partial[~finite] = 0.0
        return partial, weight, finite, zero_t

    def _cell_values(
        self,
        alpha: float,
        columns: np.ndarray,
        target: Region,
        cell: Cell,
        u: np.ndarray,
    ) -> np.ndarray:
        """Integrand samples of one cell at low-discrepancy points u (one column per outer coordinate)"""
        cols = columns[:, cell.subset]
        partial, weight, finite, _ = self._outer_points(alpha, cols, cell, u)
        intervals = target.clip(partial, cols[:, cell.inner])
        inner = _half_line_measure(intervals, cell.signs[cell.inner], alpha, cell.floors[cell.inner])
        values = weight * inner
        values[~finite] = 0.0
        return values

    def _cell_estimate(
        self,
        alpha: float,
        columns: np.ndarray,
        target: Region,
        cell: Cell,
        cell_index: int,
        log2_points: int,
        replicates: int,
        seed: int,
    ) -> Tuple[float, float]:
        dims = len(cell.subset) - 1
        means = []
        for rep in range(replicates):
            sampler = qmc.Sobol(d=dims, scramble=True, seed=chunk_rng(seed, cell_index, stream=100 + rep))
            u = sampler.random_base2(log2_points)
            means.append(float(np.mean(self._cell_values(alpha, columns, target, cell, u))))
        means = np.array(means)
        if not np.all(np.isfinite(means)):
            return math.inf, math.inf
        err = float(np.std(means, ddof=1) / math.sqrt(replicates)) if replicates > 1 else math.nan
        return float(np.mean(means)), err

    def _eta_probe(
        self,
        alpha: float,
        columns: np.ndarray,
        target: Region,
        cell: Cell,
        cell_index: int,
        gap: float,
        log2_points: int,
        seed: int,
    ) -> Tuple[bool, List[Dict[str, float]]]:
        """Truncate every zero-floor |s_i| at eta and fit the decay of the increments as eta shrinks"""
        scale = gap / float(np.max(np.linalg.norm(columns, axis=0)))
        etas = [scale * 10.0 ** (-2 * (j + 1)) for j in range(TailConfig.ETA_LEVELS)]
        cols = columns[:, cell.subset]
        dims = len(cell.subset) - 1
        sampler = qmc.Sobol(d=dims, scramble=True, seed=chunk_rng(seed, cell_index, stream=99))
        u = sampler.random_base2(max(10, log2_points - 2))
        # one nested point set for every level, so increments are shell integrals on shared points
        partial, weight, finite, zero_t = self._outer_points(alpha, cols, cell, u, eta_min=etas[-1])
        intervals = target.clip(partial, cols[:, cell.inner])
        rows = []
        for eta in etas:
            inside = zero_t <= eta ** -alpha
            cutoff = max(cell.floors[cell.inner], eta)
            inner = _half_line_measure(intervals, cell.signs[cell.inner], alpha, cutoff)
            values = np.where(finite & inside, weight * inner, 0.0)
            rows.append({"eta": eta, "value": float(np.mean(values))})
        values = [r["value"] for r in rows]
        if not all(math.isfinite(v) for v in values):
            return True, rows
        return eta_increments_diverge(etas, values), rows

    def _k1_exact(self, alpha: float, columns: np.ndarray, target: Region) -> float:
        origin = np.zeros((1, columns.shape[0]))
        total = 0.0
        for j in range(columns.shape[1]):
            if not target.supports_direction(columns[:, j]):
                raise CapabilityError(f"atom {j} is not a supported clip direction", node=target.describe())
            intervals = target.clip(origin, columns[:, j])
            total += float(_half_line_measure(intervals, 1, alpha, 0.0)[0])
            total += float(_half_line_measure(intervals, -1, alpha, 0.0)[0])
        return c_alpha(alpha) / 2.0 * total

    # ---- public operations --------------------------------------------

    @staticmethod
    def _check_k(k: int) -> int:
        if int(k) != k or k < 1:
            raise DomainError(f"order k must be a positive integer, got {k}")
        return int(k)

    @staticmethod
    def _gap(target: Region) -> float:
        gap = target.origin_gap()
        if not gap > 0:
            raise DomainError(f"region closure contains the origin (gap {gap}); L is undefined")
        return gap

    def L_quadrature(
        self,
        model: StableVectorModel,
        region: Region,
        k: int,
        variant: Optional[RegionVariant] = None,
        tolerance: Optional[float] = None,
        seed: int = TailConfig.MASTER_SEED,
        log2_points: Optional[int] = None,
        replicates: Optional[int] = None,
    ) -> LValue:
        """Subset-form L for an atomic model; tolerance is relative"""
        k = self._check_k(k)
        variant = variant or RegionVariant.closure()
        tag = str(variant)
        alpha = model.alpha
        columns = self._columns(model)
        target = apply_variant(region, variant)
        target.require(LINE_CLIP)
        gap = self._gap(target)
        started = time.monotonic()

        try:
            order = self._reach(columns, target.interior(), candidate_k=k, seed=seed)
        except NoReachabilityError:
            order = None
        if order is not None and order.k < k:
            order.variant = "interior"
            logger.info(f"L({tag}, k={k}) is infinite: interior reachable with {order.k} atom(s)")
            return LValue.infinite(k, tag, order, rule="interior_reachable_below_k")

        if k == 1:
            value = self._k1_exact(alpha, columns, target)
            if not math.isfinite(value):
                witness = self._reach(columns, target.closure(), candidate_k=1, seed=seed)
                return LValue.infinite(k, tag, witness, rule="line_through_origin")
            return LValue.finite(k, tag, value, 0.0, method="exact_line")

        cells = self._cells(columns, target, k)
        logger.info(f"L({tag}, k={k}, alpha={alpha}): {len(cells)} feasible cell(s), origin gap {gap:.4g}")
        if not cells:
            return LValue.finite(k, tag, 0.0, 0.0, method="quadrature", cells=0)

        log2 = log2_points or TailConfig.QMC_LOG2_POINTS
        reps = replicates or TailConfig.QMC_REPLICATES
        probes = {}
        for index, cell in enumerate(cells):
            if not cell.zero_floor:
                continue
            diverges, rows = self._eta_probe(alpha, columns, target, cell, index, gap, log2, seed)
            probes[str(cell.subset + cell.signs)] = rows
            if not diverges:
                continue
            try:
                witness = self._reach(columns, target.closure(), candidate_k=k, seed=seed)
            except NoReachabilityError:
                witness = None
            if witness is not None and witness.k < k:
                witness.variant = "closure"
                logger.info(f"L({tag}, k={k}) is infinite: zero-floor cell {cell.subset}/{cell.signs} diverges")
                return LValue.infinite(k, tag, witness, rule="eta_probe", eta_sequence=rows)
            logger.warning(f"eta probe of cell {cell.subset}/{cell.signs} grew without a lower-order witness")

        factor = c_alpha(alpha) ** k / 2.0 ** k
        while True:
            results = self.pool.map(
                lambda item: self._cell_estimate(alpha, columns, target, item[1], item[0], log2, reps, seed),
                list(enumerate(cells)),
            )
            means = np.array([r[0] for r in results])
            errs = np.array([r[1] for r in results])
            value = factor * float(means.sum())
            error = factor * float(np.sqrt(np.sum(errs ** 2)))
            if not math.isfinite(value):
                witness = self._reach(columns, target.closure(), candidate_k=k, seed=seed)
                if witness.k < k:
                    return LValue.infinite(k, tag, witness, rule="nonfinite_integrand")
                raise AccuracyError(f"integrand of L({tag}, k={k}) is not finite but no lower-order witness exists")
            if tolerance is None or error <= tolerance * max(abs(value), 1e-300):
                break
            if log2 >= TailConfig.QMC_MAX_LOG2_POINTS:
                raise AccuracyError(
                    f"L({tag}, k={k}) error {error:.3e} exceeds relative tolerance {tolerance} "
                    f"at 2^{log2} points x {reps} replicates"
                )
            log2 = min(log2 + 2, TailConfig.QMC_MAX_LOG2_POINTS)
            logger.info(f"escalating quadrature budget to 2^{log2} points")

        target_tol = TailConfig.ZERO_FLOOR_REL_TOL if any(c.zero_floor for c in cells) else TailConfig.FLOORED_REL_TOL
        elapsed = time.monotonic() - started
        logger.info(f"L({tag}, k={k}) = {value:.6g} +/- {error:.2g} in {elapsed:.1f}s")
        return LValue.finite(
            k, tag, value, error,
            method="quadrature",
            cells=len(cells),
            points=f"2^{log2} x {reps}",
            within_target=bool(error <= target_tol * max(value, 1e-300)),
            eta_probes=probes,
        )

    def L_montecarlo(
        self,
        model: StableVectorModel,
        region: Region,
        k: int,
        variant: Optional[RegionVariant] = None,
        n: int = 200_000,
        s_min: Optional[float] = None,
        seed: int = TailConfig.MASTER_SEED,
    ) -> LValue:
        """Sphere-form L with Pareto radii; s_min sweeps down from gap/k unless given"""
        k = self._check_k(k)
        variant = variant or RegionVariant.closure()
        tag = str(variant)
        alpha = model.alpha
        target = apply_variant(region, variant)
        gap = self._gap(target)
        factor = (c_alpha(alpha) * model.measure.total_mass) ** k / math.factorial(k)
        levels = [s_min] if s_min is not None else [
            gap / k * 2.0 ** (-j) for j in range(TailConfig.MC_SMIN_HALVINGS + 1)
        ]

        sweep = []
        stabilized = s_min is not None
        for level, smin in enumerate(levels):
            hits = self._sphere_hits(model, target, k, n, smin, seed, level)
            mean, se = batch_means(hits)
            scale = factor * smin ** (-k * alpha)
            sweep.append({"s_min": smin, "L": scale * mean, "err": scale * se})
            if level > 0:
                prev, cur = sweep[-2], sweep[-1]
                if abs(cur["L"] - prev["L"]) <= 2.0 * math.hypot(cur["err"], prev["err"]):
                    stabilized = True
                    break
        if not stabilized:
            logger.warning(f"sphere-form L({tag}, k={k}) kept moving over the s_min sweep; divergence suspected")
        last = sweep[-1]
        return LValue.finite(
            k, tag, last["L"], last["err"],
            method="sphere_monte_carlo", s_min=last["s_min"], stabilized=stabilized, sweep=sweep,
        )

    def _sphere_hits(
        self, model: StableVectorModel, target: Region, k: int, n: int, s_min: float, seed: int, level: int
    ) -> np.ndarray:
        alpha = model.alpha
        dim = model.dimension

        def chunk(index: int, size: int) -> np.ndarray:
            rng = chunk_rng(seed, index, stream=200 + level)
            dirs = draw_directions(model.measure, rng, size * k).reshape(size, k, dim)
            radii = s_min * (1.0 - rng.uniform(size=(size, k))) ** (-1.0 / alpha)
            return target.member(np.einsum("nk,nkd->nd", radii, dirs))

        return np.concatenate(self.pool.map_chunks(chunk, n)).astype(float)

    def theorem_bounds(
        self,
        model: StableVectorModel,
        region: Region,
        k: int,
        seed: int = TailConfig.MASTER_SEED,
        lower_via_erosion: bool = False,
        log2_points: Optional[int] = None,
        replicates: Optional[int] = None,
    ) -> TheoremBounds:
        """(L(interior), lim over delta of L(dilated delta)) with a halving sweep"""
        k = self._check_k(k)
        region.require(DILATE_ERODE)
        gap = self._gap(region.closure())
        kwargs = {"seed": seed, "log2_points": log2_points, "replicates": replicates}
        delta0 = gap / 4.0
        deltas = [delta0 * 2.0 ** (-j) for j in range(TailConfig.DELTA_HALVINGS + 1)]

        conservative = False
        if lower_via_erosion:
            lower = self.L_quadrature(model, region, k, RegionVariant.eroded(deltas[-1]), **kwargs)
            conservative = region.eroded(deltas[-1]).conservative_erosion
            if conservative:
                logger.info("lower bound used conservative erosion of a union")
        else:
            lower = self.L_quadrature(model, region, k, RegionVariant.interior(), **kwargs)

        try:
            closure_order = self._reach(self._columns(model), region.closure(), candidate_k=k, seed=seed)
        except NoReachabilityError:
            closure_order = None
        if closure_order is not None and closure_order.k < k:
            closure_order.variant = "closure"
            upper = LValue.infinite(k, "dilated_limit", closure_order, rule="closure_reachable_below_k")
            return TheoremBounds(lower, upper, [], True, conservative)

        sweep = []
        extrapolated = []
        converged = False
        value, error = math.nan, math.nan
        for j, delta in enumerate(deltas):
            current = self.L_quadrature(model, region, k, RegionVariant.dilated(delta), **kwargs)
            if not current.is_finite:
                upper = LValue.infinite(k, "dilated_limit", current.divergence_witness, rule="every_dilation_diverges")
                return TheoremBounds(lower, upper, sweep, True, conservative)
            sweep.append({"delta": delta, "L": current.value, "err": current.error_estimate})
            value, error = current.value, current.error_estimate
            if j == 0:
                continue
            prev = sweep[-2]
            rich = 2.0 * current.value - prev["L"]
            rich_err = math.hypot(2.0 * current.error_estimate, prev["err"])
            extrapolated.append((rich, rich_err))
            # tolerance scales with the sweep so a zero limit can settle
            magnitude = max(abs(row["L"]) for row in sweep)
            tol = max(RICHARDSON_REL_TOL * magnitude, RICHARDSON_ABS_TOL)
            if abs(current.value - prev["L"]) < tol:
                converged = True
                break
            if len(extrapolated) >= 2:
                (r0, _), (r1, e1) = extrapolated[-2], extrapolated[-1]
                if abs(r1 - r0) < tol:
                    value, error = r1, e1 + abs(r1 - r0)
                    converged = True
                    break
        if not converged:
            logger.warning(f"delta sweep for k={k} did not settle; reporting the smallest-delta value")
        upper = LValue.finite(k, "dilated_limit", max(value, 0.0), error, converged=converged, sweep=sweep)
        return TheoremBounds(lower, upper, sweep, converged, conservative)

    def gplus_gminus(
        self,
        model: StableVectorModel,
        region: Region,
        center: Sequence[float],
        eps_grid: Sequence[float],
        seed: int = TailConfig.MASTER_SEED,
        log2_points: Optional[int] = None,
    ) -> pd.DataFrame:
        """g+(eps) = L((E u B_eps)^o, 1) and g-(eps) = L((E minus B_eps)^o, 2) with the max-norm ball"""
        rows = []
        for eps in eps_grid:
            cube = ball(center, eps, inside=True, norm="inf")
            plus = self.L_quadrature(model, Union([region, cube]), 1, RegionVariant.interior(), seed=seed, log2_points=log2_points)
            minus = self.L_quadrature(
                model, difference_with_ball(region, cube), 2, RegionVariant.interior(),
                seed=seed, log2_points=log2_points,
            )
            rows.append({
                "eps": float(eps),
                "g_plus": plus.as_float(),
                "g_plus_err": plus.error_estimate,
                "g_minus": minus.as_float(),
                "g_minus_err": minus.error_estimate,
            })
        return pd.DataFrame(rows)


# Create global instance
tail_service = TailAsymptoticsService()


def min_hits(model, region, variant=None, candidate_k=None, seed=TailConfig.MASTER_SEED) -> TailOrder:
    return tail_service.min_hits(model, region, variant, candidate_k, seed)


def coordinate_floors(model, subset, region, variant=None) -> CoordinateFloors:
    return tail_service.coordinate_floors(model, subset, region, variant)


def L_quadrature(model, region, k, variant=None, **kwargs) -> LValue:
    return tail_service.L_quadrature(model, region, k, variant, **kwargs)


def L_montecarlo(model, region, k, variant=None, **kwargs) -> LValue:
    return tail_service.L_montecarlo(model, region, k, variant, **kwargs)


def theorem_bounds(model, region, k, **kwargs) -> TheoremBounds:
    return tail_service.theorem_bounds(model, region, k, **kwargs)


def gplus_gminus(model, region, center, eps_grid, **kwargs) -> pd.DataFrame:
    return tail_service.gplus_gminus(model, region, center, eps_grid, **kwargs)
