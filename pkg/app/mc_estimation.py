"""
Rare-event Monte Carlo for P(X in hE): crude hit counting, conditional
(smoothed) estimation along one stable coordinate, LePage-based counting,
log-log slope fits and normalized-limit tables.
"""

import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm
from statsmodels.stats.proportion import proportion_confint

from app.exceptions import DomainError, InsufficientDataError, ZeroColumnError
from app.linear_programs import coordinate_floor
from app.models import EstimateReport, SlopeFit, StableVectorModel, TruncationControl
from app.region_geometry import LINE_CLIP, LP_FEASIBLE, ORIGIN_GAP, Region
from app.spectral_model import lepage_samples, sample_vectors, to_matrix
from app.stable_univariate import (
    interval_probability,
    pdf_array,
    sf_array,
    std_stable_samples,
    tail_conditioned_samples,
)
from app.worker_pool import WorkerPool, chunk_rng
from tail_config import TailConfig

logger = logging.getLogger(__name__)

MIN_CRUDE_SAMPLES = 1000
Z95 = 1.959963984540054

STREAM_CRUDE = 1
STREAM_CONDITIONAL = 2
STREAM_LEPAGE = 3


def batch_means(values: np.ndarray, batches: Optional[int] = None) -> Tuple[float, float]:
    """Mean and standard error from contiguous equal batches"""
    batches = batches or TailConfig.BATCH_COUNT
    usable = values.size - values.size % batches
    if usable == 0 or usable < 2 * batches:
        se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.nan
        return float(np.mean(values)), se
    means = values[:usable].reshape(batches, -1).mean(axis=1)
    return float(np.mean(values)), float(np.std(means, ddof=1) / math.sqrt(batches))


class HeavyTailMixture:
    """Defensive proposal w0 f + w1 (log-uniform on 1<|s|<c) + w2 (f given |s|>c) for one coordinate"""

    def __init__(self, alpha: float, threshold: float, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.size != 3 or np.any(w < 0) or not w[0] > 0:
            raise DomainError("mixture weights need three nonnegative entries with a positive nominal weight")
        self.alpha = alpha
        self.threshold = float(threshold)
        if not self.threshold > 1.0:
            # no room for the log-uniform band
            w = np.array([w[0] + w[1], 0.0, w[2]])
        self.weights = w / w.sum()
        self.tail_mass = float(2.0 * sf_array(alpha, np.array([self.threshold]))[0])
        self.log_c = math.log(self.threshold) if self.threshold > 1.0 else 0.0

    @property
    def is_nominal(self) -> bool:
        return self.weights[0] == 1.0

    def draw(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draws and their likelihood ratios f/q"""
        if self.is_nominal:
            return std_stable_samples(self.alpha, rng, size=size), np.ones(size)
        component = rng.choice(3, size=size, p=self.weights)
        s = std_stable_samples(self.alpha, rng, size=size)
        band = component == 1
        if np.any(band):
            signs = np.where(rng.uniform(size=int(band.sum())) < 0.5, -1.0, 1.0)
            s[band] = signs * np.exp(rng.uniform(size=int(band.sum())) * self.log_c)
        tail = component == 2
        if np.any(tail):
            s[tail] = tail_conditioned_samples(self.alpha, rng, self.threshold, int(tail.sum()))
        return s, self.likelihood_ratio(s)

    def likelihood_ratio(self, s: np.ndarray) -> np.ndarray:
        a = np.abs(s)
        f = np.maximum(pdf_array(self.alpha, s), 1e-300)
        q = self.weights[0] * f
        if self.weights[1] > 0:
            inside = (a > 1.0) & (a < self.threshold)
            q = q + self.weights[1] * np.where(inside, 1.0 / (2.0 * np.maximum(a, 1.0) * self.log_c), 0.0)
        if self.weights[2] > 0:
            q = q + self.weights[2] * np.where(a > self.threshold, f / self.tail_mass, 0.0)
        return f / q


class MonteCarloService:
    """Estimators of P(X in hE) with fixed chunking and per-chunk random streams"""

    def __init__(self, workers: Optional[int] = None):
        self.pool = WorkerPool(workers)

    def set_workers(self, workers: int) -> None:
        self.pool = WorkerPool(workers)

    @staticmethod
    def _normalized(p_hat: float, h: float, k: Optional[int], alpha: float) -> Optional[float]:
        return None if k is None else float(h ** (k * alpha) * p_hat)

    @staticmethod
    def _check_h(h: float) -> float:
        h = float(h)
        if not h > 0:
            raise DomainError(f"scale point h must be positive, got {h}")
        return h

    def _count_hits(self, draw, target: Region, n: int, seed: int, stream: int) -> int:
        def chunk(index: int, size: int) -> int:
            return int(np.count_nonzero(target.member(draw(chunk_rng(seed, index, stream), size))))

        return int(sum(self.pool.map_chunks(chunk, n)))

    def _wilson_report(
        self, hits: int, n: int, h: float, method: str, seed: int, k: Optional[int], alpha: float, **metadata
    ) -> EstimateReport:
        p_hat = hits / n
        lo, hi = proportion_confint(hits, n, alpha=0.05, method="wilson")
        return EstimateReport(
            h=h, p_hat=p_hat, ci_lo=float(lo), ci_hi=float(hi), n=n, method=method, seed=seed,
            normalized=self._normalized(p_hat, h, k, alpha), metadata={"hits": hits, **metadata},
        )

    def estimate_crude(
        self,
        model: StableVectorModel,
        region: Region,
        h: float,
        n: int,
        seed: int = TailConfig.MASTER_SEED,
        k: Optional[int] = None,
    ) -> EstimateReport:
        """Fraction of exact draws inside hE with a Wilson interval"""
        h = self._check_h(h)
        if n < MIN_CRUDE_SAMPLES:
            raise DomainError(f"crude Monte Carlo needs at least {MIN_CRUDE_SAMPLES} draws, got {n}")
        target = region.scaled(h)
        started = time.monotonic()
        hits = self._count_hits(lambda rng, size: sample_vectors(model, rng, size), target, n, seed, STREAM_CRUDE)
        logger.info(f"crude MC at h={h:g}: {hits}/{n} hits in {time.monotonic() - started:.1f}s")
        return self._wilson_report(hits, n, h, "crude", seed, k, model.alpha)

    def estimate_lepage(
        self,
        model: StableVectorModel,
        region: Region,
        h: float,
        n: int,
        seed: int = TailConfig.MASTER_SEED,
        k: Optional[int] = None,
        ctrl: Optional[TruncationControl] = None,
    ) -> EstimateReport:
        """Hit fraction of truncated LePage draws; works for measures with an isotropic part"""
        h = self._check_h(h)
        if n < MIN_CRUDE_SAMPLES:
            raise DomainError(f"LePage Monte Carlo needs at least {MIN_CRUDE_SAMPLES} draws, got {n}")
        ctrl = ctrl or TruncationControl(**TailConfig.lepage_settings())
        target = region.scaled(h)
        capped = []

        def draw(rng, size):
            values, batch, _ = lepage_samples(model, rng, size, ctrl)
            capped.append(batch.capped_fraction * size)
            return values

        hits = self._count_hits(draw, target, n, seed, STREAM_LEPAGE)
        capped_fraction = float(sum(capped) / n)
        if capped_fraction > 0:
            logger.warning(f"{capped_fraction:.2%} of LePage draws hit the truncation cap")
        return self._wilson_report(hits, n, h, "lepage", seed, k, model.alpha, capped_fraction=capped_fraction)

    def default_smoothing_index(self, model: StableVectorModel, region: Region) -> int:
        """Column best aligned with the region's nearest point, among supported clip directions"""
        columns = to_matrix(model).columns
        candidates = [j for j in range(columns.shape[1]) if region.supports_direction(columns[:, j])]
        if not candidates:
            region.require(LINE_CLIP)
            raise DomainError("no matrix column is a supported clip direction for this region")
        point = region.nearest_point() if ORIGIN_GAP in region.capabilities else None
        if point is None or not np.linalg.norm(point) > 0:
            return candidates[0]
        unit = point / np.linalg.norm(point)
        scores = [abs(float(unit @ columns[:, j])) / np.linalg.norm(columns[:, j]) for j in candidates]
        return candidates[int(np.argmax(scores))]

    def _thresholds(self, columns: np.ndarray, region: Region, h: float) -> np.ndarray:
        """Per-coordinate mixture cut-offs c_i at scale h"""
        gap = region.origin_gap() if ORIGIN_GAP in region.capabilities else 1.0
        fallback = h * gap / (2.0 * float(np.max(np.linalg.norm(columns, axis=0))))
        out = np.full(columns.shape[1], fallback)
        if LP_FEASIBLE in region.capabilities:
            pieces = region.closure().lp_pieces()
            for i in range(columns.shape[1]):
                options = [coordinate_floor(columns, pieces, i, sign) for sign in (1, -1)]
                options = [f for f in options if f is not None]
                if options and min(options) > 0:
                    out[i] = h * min(options)
        return out

    def estimate_conditional(
        self,
        model: StableVectorModel,
        region: Region,
        h: float,
        n: int,
        smoothing_index: Optional[int] = None,
        seed: int = TailConfig.MASTER_SEED,
        k: Optional[int] = None,
        mixture_weights: Optional[Sequence[float]] = None,
    ) -> EstimateReport:
        """Average of P(S_j in clip interval) given the other coordinates, with batch-means CI"""
        h = self._check_h(h)
        alpha = model.alpha
        columns = to_matrix(model).columns
        target = region.scaled(h)
        target.require(LINE_CLIP)
        j = self.default_smoothing_index(model, region) if smoothing_index is None else int(smoothing_index)
        if not 0 <= j < columns.shape[1]:
            raise DomainError(f"smoothing index {j} outside 0..{columns.shape[1] - 1}")
        direction = columns[:, j]
        if not np.linalg.norm(direction) > 0:
            raise ZeroColumnError(f"smoothing column {j} is zero")
        if not target.supports_direction(direction):
            target.require(LINE_CLIP)
            raise DomainError(f"region cannot be clipped along column {j}")

        weights = list(mixture_weights or TailConfig.MIXTURE_WEIGHTS)
        others = [i for i in range(columns.shape[1]) if i != j]
        thresholds = self._thresholds(columns, region, h)
        mixtures = {i: HeavyTailMixture(alpha, thresholds[i], weights) for i in others}

        def chunk(index: int, size: int) -> np.ndarray:
            rng = chunk_rng(seed, index, STREAM_CONDITIONAL)
            partial = np.zeros((size, columns.shape[0]))
            ratio = np.ones(size)
            for i in others:
                s, lr = mixtures[i].draw(rng, size)
                partial += s[:, None] * columns[:, i]
                ratio *= lr
            intervals = target.clip(partial, direction)
            probs = interval_probability(alpha, intervals.lo, intervals.hi).sum(axis=1)
            return ratio * probs

        started = time.monotonic()
        values = np.concatenate(self.pool.map_chunks(chunk, n))
        p_hat, se = batch_means(values)
        se = 0.0 if not math.isfinite(se) else se
        logger.info(
            f"conditional MC at h={h:g} smoothing column {j}: p={p_hat:.4e} +/- {se:.2e} "
            f"in {time.monotonic() - started:.1f}s"
        )
        return EstimateReport(
            h=h, p_hat=p_hat, ci_lo=p_hat - Z95 * se, ci_hi=p_hat + Z95 * se, n=n,
            method="conditional", seed=seed, normalized=self._normalized(p_hat, h, k, alpha),
            metadata={"smoothing_index": j, "std_error": se, "mixture_weights": weights},
        )

    def estimate(self, model, region, h, n, method="conditional", seed=TailConfig.MASTER_SEED, k=None, **kwargs):
        if method == "crude":
            return self.estimate_crude(model, region, h, n, seed, k)
        if method == "conditional":
            return self.estimate_conditional(model, region, h, n, seed=seed, k=k, **kwargs)
        if method == "lepage":
            return self.estimate_lepage(model, region, h, n, seed, k)
        raise DomainError(f"unknown estimation method '{method}'")

    def normalized_limit_probe(
        self,
        model: StableVectorModel,
        region: Region,
        k: int,
        h_grid: Sequence[float],
        method: str = "conditional",
        n: int = 100_000,
        seed: int = TailConfig.MASTER_SEED,
        rate: Optional[float] = None,
        log_power: int = 0,
        **kwargs,
    ) -> pd.DataFrame:
        """(h, p_hat, CI, h^rate (log h)^-log_power p_hat) per grid point; rate defaults to k alpha"""
        rate = k * model.alpha if rate is None else float(rate)
        rows = []
        for h in h_grid:
            report = self.estimate(model, region, h, n, method, seed, k, **kwargs)
            factor = h ** rate / math.log(h) ** log_power if log_power else h ** rate
            row = report.to_row()
            row["normalized"] = factor * report.p_hat
            rows.append(row)
        return pd.DataFrame(rows, columns=["h", "p_hat", "ci_lo", "ci_hi", "n", "method", "seed", "normalized"])

    def slope_fit(self, reports: Sequence[EstimateReport], log_correction: bool = True) -> SlopeFit:
        """Weighted least squares of log p_hat on log h, optionally against a log log h term"""
        if len(reports) < 3:
            raise InsufficientDataError(f"slope fit needs at least 3 grid points, got {len(reports)}")
        if any(r.ci_lo <= 0.0 for r in reports):
            raise InsufficientDataError("every confidence interval must exclude zero")
        h = np.array([r.h for r in reports], dtype=float)
        p = np.array([r.p_hat for r in reports], dtype=float)
        rel_se = np.array([r.standard_error / r.p_hat for r in reports])
        # exact synthetic inputs carry no spread; fall back to equal weights
        weights = 1.0 / np.maximum(rel_se, 1e-12) ** 2 if np.all(rel_se > 0) else np.ones(h.size)
        cov = "fixed scale" if np.all(rel_se > 0) else "nonrobust"
        log_h, log_p = np.log(h), np.log(p)

        base = sm.WLS(log_p, sm.add_constant(log_h), weights=weights).fit(cov_type=cov)
        fit = SlopeFit(
            exponent=float(base.params[1]),
            standard_error=float(base.bse[1]),
            h_grid=h.tolist(),
            intercept=float(base.params[0]),
        )
        if log_correction and h.size >= 4 and np.all(h > math.e):
            design = sm.add_constant(np.column_stack([log_h, np.log(log_h)]))
            extended = sm.WLS(log_p, design, weights=weights).fit(cov_type=cov)
            b, b_se = float(extended.params[2]), float(extended.bse[2])
            fit.log_coefficient = b
            fit.log_coefficient_se = b_se
            fit.base_exponent = float(extended.params[1])
            fit.base_exponent_se = float(extended.bse[1])
            fit.log_correction = bool(b_se > 0 and abs(b) / b_se > 2.0)
        logger.info(f"slope fit over {h.size} points: {fit.exponent:.4f} +/- {fit.standard_error:.4f}")
        return fit


# Create global instance
mc_service = MonteCarloService()


def estimate_crude(model, region, h, n, seed=TailConfig.MASTER_SEED, k=None) -> EstimateReport:
    return mc_service.estimate_crude(model, region, h, n, seed, k)


def estimate_conditional(model, region, h, n, smoothing_index=None, seed=TailConfig.MASTER_SEED, **kwargs):
    return mc_service.estimate_conditional(model, region, h, n, smoothing_index, seed, **kwargs)


def estimate_lepage(model, region, h, n, seed=TailConfig.MASTER_SEED, **kwargs) -> EstimateReport:
    return mc_service.estimate_lepage(model, region, h, n, seed, **kwargs)


def slope_fit(reports: List[EstimateReport], log_correction: bool = True) -> SlopeFit:
    return mc_service.slope_fit(reports, log_correction)


def normalized_limit_probe(model, region, k, h_grid, method="conditional", n=100_000, **kwargs) -> pd.DataFrame:
    return mc_service.normalized_limit_probe(model, region, k, h_grid, method, n, **kwargs)
