"""
Domain types shared by the numerical services.

Spectral measures keep one representative per +/- pair (first nonzero
coordinate positive) and book masses per signed atom, so a pair carries 2m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import DomainError, UnsupportedMeasureError, ZeroColumnError

UNIT_NORM_TOL = 1e-12
MERGE_TOL = 1e-10


def check_alpha(alpha: float) -> float:
    """Validate a stability index"""
    alpha = float(alpha)
    if not np.isfinite(alpha) or not (0.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie strictly inside (0, 2), got {alpha}")
    return alpha


def canonical_direction(y: np.ndarray) -> Tuple[np.ndarray, float]:
    """Representative of the +/- pair of y and the sign that maps y onto it"""
    nonzero = np.flatnonzero(np.abs(y) > 0.0)
    if nonzero.size == 0:
        raise ZeroColumnError("direction vector is zero")
    sign = 1.0 if y[nonzero[0]] > 0 else -1.0
    return sign * y, sign


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    directions: np.ndarray
    masses: np.ndarray
    isotropic_mass: float = 0.0

    def __post_init__(self):
        directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if directions.shape[0] != masses.shape[0]:
            raise DomainError("each atom needs exactly one mass")
        if directions.shape[1] < 1:
            raise DomainError("spectral measure dimension must be at least 1")
        if masses.size and np.any(masses <= 0):
            raise DomainError("atom masses must be positive")
        if masses.size:
            norms = np.linalg.norm(directions, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                raise DomainError("atom directions must have unit Euclidean norm")
        if self.isotropic_mass < 0:
            raise DomainError("isotropic mass must be nonnegative")
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "isotropic_mass", float(self.isotropic_mass))
        if self.total_mass <= 0:
            raise DomainError("spectral measure must have positive total mass")

    @classmethod
    def from_atoms(
        cls,
        directions: Sequence[Sequence[float]],
        masses: Sequence[float],
        isotropic_mass: float = 0.0,
        dimension: Optional[int] = None,
    ) -> "SpectralMeasure":
        """Build a symmetric measure from signed atoms.

        Atoms listed on both sides of a pair must carry the same mass; a pair
        listed on one side only is closed by symmetry. Repeats on the same
        side are summed.
        """
        if len(directions) == 0:
            if dimension is None:
                raise DomainError("dimension is required for a measure without atoms")
            return cls(np.zeros((0, dimension)), np.zeros(0), isotropic_mass)

        representatives: List[np.ndarray] = []
        plus: List[float] = []
        minus: List[float] = []
        for raw, mass in zip(directions, masses):
            y = np.asarray(raw, dtype=float)
            norm = np.linalg.norm(y)
            if norm == 0.0:
                raise ZeroColumnError("atom direction is the zero vector")
            rep, sign = canonical_direction(y / norm)
            for idx, existing in enumerate(representatives):
                if np.max(np.abs(existing - rep)) < MERGE_TOL:
                    break
            else:
                representatives.append(rep)
                plus.append(0.0)
                minus.append(0.0)
                idx = len(representatives) - 1
            if sign > 0:
                plus[idx] += float(mass)
            else:
                minus[idx] += float(mass)

        pair_masses = []
        for p, q in zip(plus, minus):
            if p > 0 and q > 0 and abs(p - q) > MERGE_TOL * max(p, q):
                raise DomainError("spectral measure must be symmetric: +y and -y carry different masses")
            pair_masses.append(max(p, q))
        dirs = np.array([rep / np.linalg.norm(rep) for rep in representatives])
        return cls(dirs, np.array(pair_masses), isotropic_mass)

    @classmethod
    def isotropic(cls, dimension: int, total_mass: float) -> "SpectralMeasure":
        """Uniform measure on the sphere with the given total mass"""
        return cls(np.zeros((0, dimension)), np.zeros(0), total_mass)

    @property
    def dimension(self) -> int:
        return int(self.directions.shape[1])

    @property
    def pair_count(self) -> int:
        return int(self.masses.shape[0])

    @property
    def atomic_mass(self) -> float:
        return float(2.0 * self.masses.sum())

    @property
    def total_mass(self) -> float:
        return self.atomic_mass + self.isotropic_mass

    @property
    def is_atomic(self) -> bool:
        return self.isotropic_mass == 0.0

    def signed_atoms(self) -> List[Tuple[np.ndarray, float]]:
        """All atoms (both signs) as (direction, mass)"""
        atoms = []
        for y, m in zip(self.directions, self.masses):
            atoms.append((y, float(m)))
            atoms.append((-y, float(m)))
        return atoms

    def same_atoms(self, other: "SpectralMeasure", tol: float = 1e-10) -> bool:
        """Whether two measures carry the same atoms and isotropic part"""
        if self.dimension != other.dimension or self.pair_count != other.pair_count:
            return False
        if abs(self.isotropic_mass - other.isotropic_mass) > tol:
            return False
        used = set()
        for y, m in zip(self.directions, self.masses):
            match = None
            for j, (z, w) in enumerate(zip(other.directions, other.masses)):
                if j not in used and np.max(np.abs(y - z)) < tol and abs(m - w) < tol:
                    match = j
                    break
            if match is None:
                return False
            used.add(match)
        return True


@dataclass(frozen=True, eq=False)
class StableVectorModel:
    alpha: float
    measure: SpectralMeasure

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if self.measure.dimension < 1:
            raise DomainError("model dimension must be at least 1")

    @property
    def dimension(self) -> int:
        return self.measure.dimension

    def with_alpha(self, alpha: float) -> "StableVectorModel":
        return StableVectorModel(alpha, self.measure)


@dataclass(frozen=True, eq=False)
class LinearRepresentation:
    """X = A S with the columns of A as the vectors y-hat"""

    alpha: float
    columns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        columns = np.asarray(self.columns, dtype=float)
        if columns.ndim == 1:
            columns = columns.reshape(-1, 1)
        norms = np.linalg.norm(columns, axis=0)
        if np.any(norms == 0.0):
            bad = [int(i) for i in np.flatnonzero(norms == 0.0)]
            raise ZeroColumnError(f"zero column(s) at index {bad}")
        object.__setattr__(self, "columns", columns)

    @property
    def dimension(self) -> int:
        return int(self.columns.shape[0])

    @property
    def column_count(self) -> int:
        return int(self.columns.shape[1])


@dataclass
class TruncationControl:
    """LePage truncation: a fixed term count or adaptive block stopping"""

    fixed_terms: Optional[int] = None
    tolerance: float = 1e-4
    block: int = 100
    max_terms: int = 4000
    gaussian_remainder: bool = False

    def __post_init__(self):
        if self.fixed_terms is not None and self.fixed_terms < 1:
            raise DomainError("fixed LePage truncation needs at least one term")
        if self.block < 1 or self.max_terms < 1:
            raise DomainError("LePage block and term cap must be positive")


@dataclass
class LePageState:
    arrivals: np.ndarray
    directions: np.ndarray
    truncation_index: int
    last_increment: float
    remainder_std: float = 0.0
    capped: bool = False


@dataclass
class LePageBatch:
    """Truncation metadata of a batch of LePage draws"""

    terms: np.ndarray
    capped_fraction: float
    remainder_std: np.ndarray

    def summary(self) -> Dict[str, Any]:
        return {
            "mean_terms": float(np.mean(self.terms)),
            "max_terms": int(np.max(self.terms)),
            "capped_fraction": self.capped_fraction,
            "mean_remainder_std": float(np.mean(self.remainder_std)),
        }


@dataclass
class TailOrder:
    k: int
    variant: str
    subset: Optional[Tuple[int, ...]] = None
    coefficients: Optional[np.ndarray] = None
    point: Optional[np.ndarray] = None
    verified: bool = True

    def to_report(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "variant": self.variant,
            "subset": list(self.subset) if self.subset is not None else None,
            "coefficients": self.coefficients.tolist() if self.coefficients is not None else None,
            "point": self.point.tolist() if self.point is not None else None,
            "verified": self.verified,
        }


@dataclass
class CoordinateFloors:
    subset: Tuple[int, ...]
    feasible: bool
    floors: Optional[np.ndarray] = None
    signs: Optional[Tuple[int, ...]] = None


@dataclass
class LValue:
    status: str
    k: int
    variant: str
    value: Optional[float] = None
    error_estimate: Optional[float] = None
    divergence_witness: Optional[TailOrder] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status == "finite":
            if self.value is None or self.error_estimate is None:
                raise DomainError("finite L value needs a value and an error estimate")
            self.value = max(float(self.value), 0.0)
        elif self.status == "infinite":
            if self.divergence_witness is None:
                raise DomainError("infinite L value needs a divergence witness")
        else:
            raise DomainError(f"unknown L status {self.status}")

    @property
    def is_finite(self) -> bool:
        return self.status == "finite"

    @classmethod
    def finite(cls, k: int, variant: str, value: float, error: float, **metadata) -> "LValue":
        return cls("finite", k, variant, value=value, error_estimate=error, metadata=metadata)

    @classmethod
    def infinite(cls, k: int, variant: str, witness: TailOrder, **metadata) -> "LValue":
        return cls("infinite", k, variant, divergence_witness=witness, metadata=metadata)

    def as_float(self) -> float:
        return float(self.value) if self.is_finite else float("inf")

    def to_report(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "variant": self.variant,
            "status": self.status,
            "value": self.value,
            "error": self.error_estimate,
            "witness": self.divergence_witness.to_report() if self.divergence_witness else None,
            "metadata": self.metadata,
        }


@dataclass
class EstimateReport:
    h: float
    p_hat: float
    ci_lo: float
    ci_hi: float
    n: int
    method: str
    seed: int
    normalized: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.p_hat = float(np.clip(self.p_hat, 0.0, 1.0))
        self.ci_lo = float(np.clip(min(self.ci_lo, self.p_hat), 0.0, 1.0))
        self.ci_hi = float(np.clip(max(self.ci_hi, self.p_hat), 0.0, 1.0))

    @property
    def standard_error(self) -> float:
        return (self.ci_hi - self.ci_lo) / (2.0 * 1.959963984540054)

    def to_row(self) -> Dict[str, Any]:
        return {
            "h": self.h,
            "p_hat": self.p_hat,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "n": self.n,
            "method": self.method,
            "seed": self.seed,
            "normalized": self.normalized,
        }


@dataclass
class SlopeFit:
    exponent: float
    standard_error: float
    h_grid: List[float]
    intercept: float
    log_correction: Optional[bool] = None
    log_coefficient: Optional[float] = None
    log_coefficient_se: Optional[float] = None
    base_exponent: Optional[float] = None
    base_exponent_se: Optional[float] = None

    def to_report(self) -> Dict[str, Any]:
        return {
            "exponent": self.exponent,
            "standard_error": self.standard_error,
            "h_grid": list(self.h_grid),
            "intercept": self.intercept,
            "log_correction": self.log_correction,
            "log_coefficient": self.log_coefficient,
            "log_coefficient_se": self.log_coefficient_se,
            "base_exponent": self.base_exponent,
            "base_exponent_se": self.base_exponent_se,
        }


@dataclass
class TheoremBounds:
    lower: LValue
    upper: LValue
    sweep: List[Dict[str, Any]] = field(default_factory=list)
    upper_converged: bool = True
    conservative: bool = False

    def to_report(self) -> Dict[str, Any]:
        return {
            "lower": self.lower.to_report(),
            "upper": self.upper.to_report(),
            "upper_converged": self.upper_converged,
            "conservative_erosion": self.conservative,
        }
