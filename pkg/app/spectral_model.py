"""
Spectral measures, matrix representations and samplers of symmetric
alpha-stable vectors.
"""

import logging
import math
import warnings
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from app.exceptions import DomainError, UnsupportedMeasureError
from app.models import (
    LePageBatch,
    LePageState,
    LinearRepresentation,
    SpectralMeasure,
    StableVectorModel,
    TruncationControl,
    canonical_direction,
)
from app.stable_univariate import c_alpha, std_stable_samples
from app.worker_pool import chunk_rng, chunk_sizes
from tail_config import TailConfig

logger = logging.getLogger(__name__)


def from_matrix(rep: LinearRepresentation) -> StableVectorModel:
    """Atoms +/- y/|y| with mass |y|^alpha / 2 for every column y"""
    directions = []
    masses = []
    for column in rep.columns.T:
        norm = float(np.linalg.norm(column))
        # S_j is symmetric, so antiparallel columns feed the same pair
        unit, _ = canonical_direction(column / norm)
        directions.append(unit)
        masses.append(norm ** rep.alpha / 2.0)
    measure = SpectralMeasure.from_atoms(directions, masses, dimension=rep.dimension)
    return StableVectorModel(rep.alpha, measure)


def to_matrix(model: StableVectorModel) -> LinearRepresentation:
    """One column (2m)^(1/alpha) y per atom pair"""
    measure = model.measure
    if not measure.is_atomic:
        raise UnsupportedMeasureError("matrix representation needs a purely atomic spectral measure")
    scales = (2.0 * measure.masses) ** (1.0 / model.alpha)
    return LinearRepresentation(model.alpha, (measure.directions * scales[:, None]).T)


@lru_cache(maxsize=64)
def isotropic_abs_moment(dimension: int, alpha: float) -> float:
    """E|x_1|^alpha for x uniform on the unit sphere of R^dimension"""
    if dimension == 1:
        return 1.0
    beta = (dimension - 3) / 2.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # density of x_1 is proportional to (1 - t^2)^beta on [-1, 1]
        top, _ = integrate.quad(lambda t: (1.0 + t) ** beta, 0.0, 1.0, weight="alg", wvar=(alpha, beta))
        bottom, _ = integrate.quad(lambda t: (1.0 + t) ** beta, 0.0, 1.0, weight="alg", wvar=(0.0, beta))
    return top / bottom


def cf_exponent(model: StableVectorModel, theta: np.ndarray) -> np.ndarray:
    """int |theta . x|^alpha dLambda(x), vectorized over rows of theta"""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    measure = model.measure
    total = np.zeros(theta.shape[0])
    if measure.pair_count:
        proj = np.abs(theta @ measure.directions.T) ** model.alpha
        total += 2.0 * proj @ measure.masses
    if measure.isotropic_mass > 0:
        radius = np.linalg.norm(theta, axis=1) ** model.alpha
        total += measure.isotropic_mass * radius * isotropic_abs_moment(measure.dimension, model.alpha)
    return total


def cf_value(model: StableVectorModel, theta: Sequence[float]) -> float:
    return float(np.exp(-cf_exponent(model, np.asarray(theta, dtype=float))[0]))


def sample_vectors(model: StableVectorModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Exact draws X = A S, one row per draw"""
    if not model.measure.is_atomic:
        raise UnsupportedMeasureError("exact sampling needs an atomic measure; use the LePage sampler")
    columns = to_matrix(model).columns
    draws = std_stable_samples(model.alpha, rng, size=(size, columns.shape[1]))
    return draws @ columns.T


def sample_vector(model: StableVectorModel, rng: np.random.Generator) -> np.ndarray:
    return sample_vectors(model, rng, 1)[0]


def draw_directions(measure: SpectralMeasure, rng: np.random.Generator, size: int) -> np.ndarray:
    """Signed unit vectors from the normalized measure"""
    weights = np.append(2.0 * measure.masses, measure.isotropic_mass) / measure.total_mass
    choice = rng.choice(weights.size, size=size, p=weights)
    out = np.empty((size, measure.dimension))
    atomic = choice < measure.pair_count
    if np.any(atomic):
        out[atomic] = measure.directions[choice[atomic]]
    iso = ~atomic
    if np.any(iso):
        gauss = rng.standard_normal((int(iso.sum()), measure.dimension))
        out[iso] = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
    signs = np.where(rng.uniform(size=size) < 0.5, -1.0, 1.0)
    return out * signs[:, None]


def direction_second_moment(measure: SpectralMeasure) -> np.ndarray:
    """E[W W^T] under the normalized measure"""
    n = measure.dimension
    moment = measure.isotropic_mass / n * np.eye(n)
    for y, m in zip(measure.directions, measure.masses):
        moment += 2.0 * m * np.outer(y, y)
    return moment / measure.total_mass


def lepage_samples(
    model: StableVectorModel,
    rng: np.random.Generator,
    size: int,
    ctrl: Optional[TruncationControl] = None,
    record: bool = False,
) -> Tuple[np.ndarray, LePageBatch, Optional[List[np.ndarray]]]:
    """Truncated LePage series (C_a Lambda)^(1/a) sum Gamma_i^(-1/a) W_i, row per draw.

    The draws are the truncated partial sums. With adaptive truncation and
    ctrl.gaussian_remainder set, a Gaussian with the conditional covariance of
    the dropped tail given Gamma_N is added; the estimators opt in through
    TailConfig.lepage_settings() (TAIL_LEPAGE_GAUSSIAN_REMAINDER).
    """
    ctrl = ctrl or TruncationControl()
    alpha = model.alpha
    measure = model.measure
    n = measure.dimension
    scale = (c_alpha(alpha) * measure.total_mass) ** (1.0 / alpha)

    partial = np.zeros((size, n))
    last_gamma = np.zeros(size)
    terms = np.zeros(size, dtype=int)
    active = np.ones(size, dtype=bool)
    capped = np.zeros(size, dtype=bool)
    increments = np.zeros(size)
    recorded: List[np.ndarray] = []

    while np.any(active):
        idx = np.flatnonzero(active)
        if ctrl.fixed_terms is not None:
            block = int(min(ctrl.block, ctrl.fixed_terms - terms[idx].min()))
        else:
            block = ctrl.block
        arrivals = last_gamma[idx, None] + np.cumsum(rng.standard_exponential((idx.size, block)), axis=1)
        dirs = draw_directions(measure, rng, idx.size * block).reshape(idx.size, block, n)
        step = np.einsum("rb,rbn->rn", arrivals ** (-1.0 / alpha), dirs)
        if record:
            recorded.append((arrivals[0].copy(), dirs[0].copy()))
        partial[idx] += step
        last_gamma[idx] = arrivals[:, -1]
        terms[idx] += block
        increments[idx] = np.max(np.abs(step), axis=1)
        if ctrl.fixed_terms is not None:
            active[idx] = terms[idx] < ctrl.fixed_terms
        else:
            reference = np.maximum(np.max(np.abs(partial[idx]), axis=1), 1e-300)
            done = increments[idx] < ctrl.tolerance * reference
            hit_cap = terms[idx] >= ctrl.max_terms
            capped[idx] = hit_cap & ~done
            active[idx] = ~(done | hit_cap)

    remainder_std = np.zeros(size)
    if ctrl.fixed_terms is None and ctrl.gaussian_remainder:
        # Later arrivals form a Poisson process on (Gamma_N, inf)
        variance = last_gamma ** (1.0 - 2.0 / alpha) / (2.0 / alpha - 1.0)
        eigval, eigvec = np.linalg.eigh(direction_second_moment(measure))
        root = eigvec * np.sqrt(np.clip(eigval, 0.0, None))
        gauss = rng.standard_normal((size, n)) @ root.T
        partial += np.sqrt(variance)[:, None] * gauss
        remainder_std = scale * np.sqrt(variance * np.trace(direction_second_moment(measure)))

    if np.any(capped):
        logger.warning(f"LePage truncation cap {ctrl.max_terms} reached for {int(capped.sum())} of {size} draws")
    batch = LePageBatch(terms=terms, capped_fraction=float(capped.mean()), remainder_std=remainder_std)
    return scale * partial, batch, (recorded if record else None)


def lepage_sample(
    model: StableVectorModel, rng: np.random.Generator, ctrl: Optional[TruncationControl] = None
) -> Tuple[np.ndarray, LePageState]:
    values, batch, recorded = lepage_samples(model, rng, 1, ctrl, record=True)
    arrivals = np.concatenate([r[0] for r in recorded])
    directions = np.concatenate([r[1] for r in recorded])
    state = LePageState(
        arrivals=arrivals,
        directions=directions,
        truncation_index=int(batch.terms[0]),
        last_increment=float(np.max(np.abs(directions[-1])) * arrivals[-1] ** (-1.0 / model.alpha)),
        remainder_std=float(batch.remainder_std[0]),
        capped=batch.capped_fraction > 0,
    )
    return values[0], state


def lepage_tail_moment_probe(
    model: StableVectorModel,
    k: int,
    epsilon: float,
    n_grid: Sequence[int],
    replicates: int = 10_000,
    seed: int = TailConfig.MASTER_SEED,
    chunk: int = 500,
) -> pd.DataFrame:
    """Empirical E|sum_{i=k}^N Gamma_i^(-1/a) W_i(j)|^((k-1)a + eps) per N and coordinate j"""
    alpha = model.alpha
    if int(k) != k or k < 2:
        raise DomainError("tail moment probe needs an integer k >= 2")
    upper = min(alpha, (k - 1) * (2.0 - alpha))
    if not (0.0 < epsilon < upper):
        raise DomainError(f"epsilon must lie in (0, {upper:.6g}), got {epsilon}")
    grid = sorted(int(N) for N in n_grid)
    if grid[0] < k:
        raise DomainError("every truncation index must be at least k")
    power = (k - 1) * alpha + epsilon
    n = model.dimension
    n_max = grid[-1]

    sums = np.zeros((len(grid), n))
    squares = np.zeros((len(grid), n))
    for chunk_index, length in enumerate(chunk_sizes(replicates, chunk)):
        rng = chunk_rng(seed, chunk_index, stream=7)
        arrivals = np.cumsum(rng.standard_exponential((length, n_max)), axis=1)
        dirs = draw_directions(model.measure, rng, length * n_max).reshape(length, n_max, n)
        terms = arrivals[:, :, None] ** (-1.0 / alpha) * dirs
        terms[:, : k - 1, :] = 0.0
        running = np.cumsum(terms, axis=1)
        for row, N in enumerate(grid):
            moment = np.abs(running[:, N - 1, :]) ** power
            sums[row] += moment.sum(axis=0)
            squares[row] += (moment ** 2).sum(axis=0)

    records = []
    for row, N in enumerate(grid):
        mean = sums[row] / replicates
        var = np.maximum(squares[row] / replicates - mean ** 2, 0.0)
        for j in range(n):
            records.append({
                "N": N,
                "coordinate": j,
                "moment": float(mean[j]),
                "std_error": float(math.sqrt(var[j] / replicates)),
                "power": power,
            })
    return pd.DataFrame.from_records(records)


def discretize_measure(measure: SpectralMeasure, m: int) -> SpectralMeasure:
    """Replace the isotropic part by m atoms on equal-mass sphere patches"""
    if measure.is_atomic:
        return measure
    if m < 2 or m % 2:
        raise DomainError(f"atom count must be a positive even number, got {m}")
    n = measure.dimension
    pairs = m // 2
    if n == 2:
        angles = (np.arange(pairs) + 0.5) * 2.0 * math.pi / m
        points = np.column_stack([np.cos(angles), np.sin(angles)])
    elif n == 3:
        points = _hemisphere_patch_centers(pairs)
    else:
        raise DomainError(f"isotropic discretization supports dimensions 2 and 3, got {n}")
    mass = measure.isotropic_mass / m
    directions = [d for d in measure.directions] + [p for p in points]
    masses = list(measure.masses) + [mass] * len(points)
    return SpectralMeasure.from_atoms(directions, masses, 0.0, dimension=n)


def _hemisphere_patch_centers(count: int) -> np.ndarray:
    """Centers of `count` equal-area patches of the upper unit hemisphere"""
    bands = max(1, int(round(math.sqrt(count / 2.0))))
    per_band = [count // bands + (1 if j < count % bands else 0) for j in range(bands)]
    centers = []
    z_low = 0.0
    for q in per_band:
        # Archimedes: area of a zone is proportional to its height
        z_high = z_low + q / count
        z_mid = 0.5 * (z_low + z_high)
        ring = math.sqrt(max(1.0 - z_mid ** 2, 0.0))
        for i in range(q):
            phi = (i + 0.5) * 2.0 * math.pi / q
            centers.append([ring * math.cos(phi), ring * math.sin(phi), z_mid])
        z_low = z_high
    return np.array(centers)


def cone_mass(measure: SpectralMeasure, theta_lo: float, theta_hi: float) -> float:
    """Lambda of the open arc (theta_lo, theta_hi) of the unit circle"""
    if measure.dimension != 2:
        raise DomainError("arc masses are defined for planar measures")
    total = measure.isotropic_mass * (theta_hi - theta_lo) / (2.0 * math.pi)
    for y, m in measure.signed_atoms():
        angle = math.atan2(y[1], y[0]) % (2.0 * math.pi)
        for shift in (0.0, 2.0 * math.pi):
            if theta_lo < angle + shift < theta_hi:
                total += m
                break
    return total
