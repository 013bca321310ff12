"""
Regions E of R^n: membership, scaling hE, interior/closure, delta dilation
and erosion, origin gap and batch line clipping.

Polyhedral leaves keep strict and non-strict rows side by side, so E and its
closure are represented exactly. Composite nodes derive their capabilities
from their children.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from app.exceptions import CapabilityError, DomainError
from app.intervals import IntervalSet
from app.linear_programs import Piece, feasible_point

logger = logging.getLogger(__name__)

MEMBERSHIP = "membership"
LINE_CLIP = "line_clip"
DILATE_ERODE = "dilate_erode"
LP_FEASIBLE = "lp_feasible"
ORIGIN_GAP = "origin_gap"

PARALLEL_TOL = 1e-14
BOUNDARY_SLAB = 1e-12

VARIANT_TAGS = ("interior", "closure", "dilated", "eroded")


@dataclass(frozen=True)
class RegionVariant:
    tag: str
    delta: Optional[float] = None

    def __post_init__(self):
        if self.tag not in VARIANT_TAGS:
            raise DomainError(f"unknown region variant '{self.tag}'")
        if self.tag in ("dilated", "eroded"):
            if self.delta is None or not self.delta > 0:
                raise DomainError(f"{self.tag} variant needs delta > 0")

    @classmethod
    def interior(cls) -> "RegionVariant":
        return cls("interior")

    @classmethod
    def closure(cls) -> "RegionVariant":
        return cls("closure")

    @classmethod
    def dilated(cls, delta: float) -> "RegionVariant":
        return cls("dilated", float(delta))

    @classmethod
    def eroded(cls, delta: float) -> "RegionVariant":
        return cls("eroded", float(delta))

    @classmethod
    def parse(cls, text: str) -> "RegionVariant":
        """'interior', 'closure', 'dilated:0.1' or 'eroded:0.1'"""
        tag, _, delta = text.partition(":")
        return cls(tag.strip(), float(delta) if delta else None)

    def __str__(self) -> str:
        return self.tag if self.delta is None else f"{self.tag}:{self.delta:g}"


def apply_variant(region: "Region", variant: Optional[RegionVariant]) -> "Region":
    if variant is None:
        return region
    if variant.tag == "interior":
        return region.interior()
    if variant.tag == "closure":
        return region.closure()
    if variant.tag == "dilated":
        return region.dilated(variant.delta)
    return region.eroded(variant.delta)


def _check_scale(h: float) -> float:
    h = float(h)
    if not h > 0:
        raise DomainError(f"scale factor must be positive, got {h}")
    return h


class Region(ABC):
    """Immutable region; subclasses honor the strictness they store"""

    label = "region"

    @property
    @abstractmethod
    def dimension(self) -> int:
        ...

    @property
    @abstractmethod
    def capabilities(self) -> FrozenSet[str]:
        ...

    @abstractmethod
    def member(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def scaled(self, h: float) -> "Region":
        ...

    @abstractmethod
    def interior(self) -> "Region":
        ...

    @abstractmethod
    def closure(self) -> "Region":
        ...

    def children(self) -> Sequence["Region"]:
        return ()

    def describe(self) -> str:
        return self.label

    def offending_node(self, capability: str) -> str:
        for child in self.children():
            if capability not in child.capabilities:
                return child.offending_node(capability)
        return self.describe()

    def require(self, capability: str) -> None:
        if capability not in self.capabilities:
            raise CapabilityError(f"region does not support {capability}", node=self.offending_node(capability))

    def contains(self, x, variant: Optional[RegionVariant] = None):
        """Membership of one point (bool) or of each row of a batch (array)"""
        region = apply_variant(self, variant)
        x = np.asarray(x, dtype=float)
        result = region.member(np.atleast_2d(x))
        return bool(result[0]) if x.ndim == 1 else result

    def dilated(self, delta: float) -> "Region":
        self.require(DILATE_ERODE)
        raise NotImplementedError

    def eroded(self, delta: float) -> "Region":
        self.require(DILATE_ERODE)
        raise NotImplementedError

    def complement(self) -> "Region":
        raise CapabilityError("complement is not available", node=self.describe())

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        """{t : p + t d in region} for every row p of points"""
        self.require(LINE_CLIP)
        raise NotImplementedError

    def supports_direction(self, direction: np.ndarray) -> bool:
        return LINE_CLIP in self.capabilities

    def origin_gap(self) -> float:
        """inf of |x| over the closure"""
        self.require(ORIGIN_GAP)
        raise NotImplementedError

    def nearest_point(self) -> Optional[np.ndarray]:
        self.require(ORIGIN_GAP)
        raise NotImplementedError

    def lp_pieces(self) -> List[Piece]:
        """Polyhedra whose union contains the region (equals it when lp_exact)"""
        self.require(LP_FEASIBLE)
        raise NotImplementedError

    @property
    def lp_exact(self) -> bool:
        return True

    @property
    def scale_closed(self) -> bool:
        """x in E implies c x in E for every c >= 1"""
        return False

    @property
    def conservative_erosion(self) -> bool:
        return any(child.conservative_erosion for child in self.children())


class Polyhedron(Region):
    """{x : a_i . x > b_i (strict rows) and a_i . x >= b_i (others)}"""

    def __init__(self, normals, offsets, strict=True, label: str = "polyhedron"):
        normals = np.asarray(normals, dtype=float)
        offsets = np.asarray(offsets, dtype=float).reshape(-1)
        if normals.ndim == 1:
            normals = normals.reshape(offsets.size, -1) if offsets.size else normals.reshape(0, -1)
        if normals.shape[0] != offsets.size:
            raise DomainError("each halfspace row needs one offset")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms == 0.0):
            raise DomainError("halfspace normals must be nonzero")
        self.normals = normals
        self.offsets = offsets
        self.strict = np.broadcast_to(np.asarray(strict, dtype=bool), offsets.shape).copy()
        self.norms = norms
        self.label = label

    @property
    def dimension(self) -> int:
        return int(self.normals.shape[1])

    @property
    def capabilities(self) -> FrozenSet[str]:
        return frozenset({MEMBERSHIP, LINE_CLIP, DILATE_ERODE, LP_FEASIBLE, ORIGIN_GAP})

    def _with(self, offsets, strict) -> "Polyhedron":
        return Polyhedron(self.normals, offsets, strict, self.label)

    def member(self, x: np.ndarray) -> np.ndarray:
        lhs = x @ self.normals.T
        ok = np.where(self.strict, lhs > self.offsets, lhs >= self.offsets)
        return np.all(ok, axis=-1)

    def on_boundary(self, x: np.ndarray) -> np.ndarray:
        """Points within the diagnostic slab of some face"""
        gap = (np.atleast_2d(x) @ self.normals.T - self.offsets) / self.norms
        return np.any(np.abs(gap) <= BOUNDARY_SLAB, axis=-1)

    def scaled(self, h: float) -> "Polyhedron":
        return self._with(self.offsets * _check_scale(h), self.strict)

    def interior(self) -> "Polyhedron":
        return self._with(self.offsets, True)

    def closure(self) -> "Polyhedron":
        return self._with(self.offsets, False)

    def dilated(self, delta: float) -> "Polyhedron":
        return self._with(self.offsets - float(delta) * self.norms, True)

    def eroded(self, delta: float) -> "Polyhedron":
        return self._with(self.offsets + float(delta) * self.norms, True)

    def complement(self) -> "Region":
        if self.offsets.size == 0:
            # e_1 . x > inf never holds
            return Polyhedron(np.eye(1, self.dimension), [np.inf], True, "empty")
        rows = [
            Polyhedron(-self.normals[i:i + 1], [-self.offsets[i]], not self.strict[i], f"not({self.label}[{i}])")
            for i in range(self.offsets.size)
        ]
        return rows[0] if len(rows) == 1 else Union(rows, label=f"complement({self.label})")

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        points = np.atleast_2d(points)
        rows = points.shape[0]
        if self.offsets.size == 0:
            return IntervalSet.full(rows)
        direction = np.broadcast_to(np.asarray(direction, dtype=float), points.shape)
        rate = direction @ self.normals.T
        slack = self.offsets - points @ self.normals.T
        scale = self.norms * np.linalg.norm(direction, axis=-1, keepdims=True)
        parallel = np.abs(rate) <= PARALLEL_TOL * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = slack / rate
        lower = np.where(~parallel & (rate > 0), bound, -np.inf)
        upper = np.where(~parallel & (rate < 0), bound, np.inf)
        # a parallel face either holds along the whole line or nowhere
        parallel_ok = np.where(self.strict, slack < 0, slack <= 0)
        blocked = np.any(parallel & ~parallel_ok, axis=1)
        lo = np.max(lower, axis=1)
        hi = np.min(upper, axis=1)
        lo = np.where(blocked, np.inf, lo)
        hi = np.where(blocked, np.inf, hi)
        return IntervalSet(lo, hi)

    def _box_bounds(self):
        """Per-coordinate bounds when every row is a signed coordinate axis"""
        lo = np.full(self.dimension, -np.inf)
        hi = np.full(self.dimension, np.inf)
        for a, b in zip(self.normals, self.offsets):
            nz = np.flatnonzero(a)
            if nz.size != 1:
                return None
            j = nz[0]
            if a[j] > 0:
                lo[j] = max(lo[j], b / a[j])
            else:
                hi[j] = min(hi[j], b / a[j])
        return lo, hi

    def nearest_point(self) -> Optional[np.ndarray]:
        if self.offsets.size == 0 or np.all(self.offsets <= 0):
            return np.zeros(self.dimension)
        bounds = self._box_bounds()
        if bounds is not None:
            lo, hi = bounds
            if np.any(lo > hi):
                return None
            return np.clip(np.zeros(self.dimension), lo, hi)
        if self.offsets.size == 1:
            a, b = self.normals[0], self.offsets[0]
            return a * b / float(a @ a)
        start = feasible_point(self.closure().piece())
        if start is None:
            return None
        result = minimize(
            lambda x: float(x @ x),
            start,
            jac=lambda x: 2.0 * x,
            constraints=[{
                "type": "ineq",
                "fun": lambda x: self.normals @ x - self.offsets,
                "jac": lambda x: self.normals,
            }],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        if not result.success:
            logger.warning(f"nearest point of {self.label} did not converge: {result.message}")
        return result.x

    def origin_gap(self) -> float:
        point = self.nearest_point()
        return math.inf if point is None else float(np.linalg.norm(point))

    def piece(self) -> Piece:
        return self.normals, self.offsets, self.strict

    def lp_pieces(self) -> List[Piece]:
        return [self.piece()]

    @property
    def scale_closed(self) -> bool:
        return bool(np.all(self.offsets >= 0))


def halfspace(normal: Sequence[float], offset: float, strict: bool = True) -> Polyhedron:
    """{x : normal . x > offset}"""
    return Polyhedron(np.atleast_2d(np.asarray(normal, dtype=float)), [offset], strict, "halfspace")


def box(lo: Sequence[Optional[float]], hi: Sequence[Optional[float]], open_faces: bool = True) -> Polyhedron:
    """Axis-aligned box; None or infinite bounds drop the face"""
    if len(lo) != len(hi):
        raise DomainError("box bounds must have equal length")
    n = len(lo)
    normals, offsets = [], []
    for j, (a, b) in enumerate(zip(lo, hi)):
        if a is not None and np.isfinite(a):
            normals.append(np.eye(n)[j])
            offsets.append(float(a))
        if b is not None and np.isfinite(b):
            normals.append(-np.eye(n)[j])
            offsets.append(-float(b))
        if a is not None and b is not None and a >= b:
            raise DomainError(f"box bound {j} is empty: lo={a} >= hi={b}")
    return Polyhedron(np.array(normals).reshape(len(offsets), n), offsets, open_faces, "box")


class EuclideanBall(Region):
    """{|x - c| < r} when inside, {|x - c| > r} otherwise"""

    label = "ball"

    def __init__(self, center, radius: float, inside: bool = True, strict: bool = True):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        if self.radius < 0:
            raise DomainError("ball radius must be nonnegative")
        self.inside = bool(inside)
        self.strict = bool(strict)
        self.label = "ball" if inside else "ball_complement"

    @property
    def dimension(self) -> int:
        return int(self.center.size)

    @property
    def capabilities(self) -> FrozenSet[str]:
        return frozenset({MEMBERSHIP, LINE_CLIP, DILATE_ERODE, ORIGIN_GAP})

    def _with(self, radius: float, strict: bool) -> "EuclideanBall":
        return EuclideanBall(self.center, max(radius, 0.0), self.inside, strict)

    def member(self, x: np.ndarray) -> np.ndarray:
        dist = np.linalg.norm(x - self.center, axis=-1)
        if self.inside:
            return dist < self.radius if self.strict else dist <= self.radius
        return dist > self.radius if self.strict else dist >= self.radius

    def scaled(self, h: float) -> "EuclideanBall":
        h = _check_scale(h)
        return EuclideanBall(self.center * h, self.radius * h, self.inside, self.strict)

    def interior(self) -> "EuclideanBall":
        return self._with(self.radius, True)

    def closure(self) -> "EuclideanBall":
        return self._with(self.radius, False)

    def dilated(self, delta: float) -> "EuclideanBall":
        return self._with(self.radius + delta if self.inside else self.radius - delta, True)

    def eroded(self, delta: float) -> "EuclideanBall":
        return self._with(self.radius - delta if self.inside else self.radius + delta, True)

    def complement(self) -> "EuclideanBall":
        return EuclideanBall(self.center, self.radius, not self.inside, not self.strict)

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        points = np.atleast_2d(points)
        direction = np.broadcast_to(np.asarray(direction, dtype=float), points.shape)
        rel = points - self.center
        a = np.sum(direction * direction, axis=1)
        b = 2.0 * np.sum(rel * direction, axis=1)
        c = np.sum(rel * rel, axis=1) - self.radius ** 2
        disc = b * b - 4.0 * a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        t1 = np.where(disc > 0, (-b - root) / (2.0 * a), np.inf)
        t2 = np.where(disc > 0, (-b + root) / (2.0 * a), np.inf)
        if self.inside:
            return IntervalSet(t1, t2)
        lo = np.column_stack([np.full(t1.shape, -np.inf), np.where(disc > 0, t2, -np.inf)])
        hi = np.column_stack([np.where(disc > 0, t1, np.inf), np.full(t1.shape, np.inf)])
        return IntervalSet(lo, hi).normalized()

    def nearest_point(self) -> Optional[np.ndarray]:
        norm = float(np.linalg.norm(self.center))
        if self.inside:
            if norm <= self.radius:
                return np.zeros(self.dimension)
            return self.center * (1.0 - self.radius / norm)
        if norm >= self.radius:
            return np.zeros(self.dimension)
        if norm == 0.0:
            return self.radius * np.eye(self.dimension)[0]
        return self.center - self.radius * self.center / norm

    def origin_gap(self) -> float:
        norm = float(np.linalg.norm(self.center))
        return max(norm - self.radius, 0.0) if self.inside else max(self.radius - norm, 0.0)

    @property
    def scale_closed(self) -> bool:
        return not self.inside and not np.any(self.center)


def ball(center, radius: float, inside: bool = True, norm: str = "2", strict: bool = True) -> Region:
    """Euclidean ball leaf, or the box / box complement of an infinity-norm ball"""
    center = np.asarray(center, dtype=float).reshape(-1)
    if norm in ("2", "euclidean"):
        return EuclideanBall(center, radius, inside, strict)
    if norm not in ("inf", "max"):
        raise DomainError(f"unsupported ball norm '{norm}'")
    cube = box(center - radius, center + radius, open_faces=strict)
    cube.label = "inf_ball"
    return cube if inside else cube.complement()


class ConeArc2D(Region):
    """{x in R^2 : |x| > r, angle(x) in (theta_lo, theta_hi)}"""

    label = "cone_arc"

    def __init__(self, theta_lo: float, theta_hi: float, radius_gt: float = 1.0, strict: bool = True):
        self.theta_lo = float(theta_lo)
        self.theta_hi = float(theta_hi)
        self.radius = float(radius_gt)
        self.strict = bool(strict)
        width = self.theta_hi - self.theta_lo
        if not (0.0 < width <= 2.0 * math.pi):
            raise DomainError(f"cone arc must have width in (0, 2 pi], got {width}")
        if self.radius < 0:
            raise DomainError("cone radius must be nonnegative")

    @property
    def width(self) -> float:
        return self.theta_hi - self.theta_lo

    @property
    def dimension(self) -> int:
        return 2

    @property
    def capabilities(self) -> FrozenSet[str]:
        caps = {MEMBERSHIP, ORIGIN_GAP}
        if self.width <= math.pi:
            caps |= {LINE_CLIP, LP_FEASIBLE}
        return frozenset(caps)

    def member(self, x: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(x, axis=-1)
        offset = np.mod(np.arctan2(x[..., 1], x[..., 0]) - self.theta_lo, 2.0 * math.pi)
        if self.strict:
            return (norm > self.radius) & (offset > 0) & (offset < self.width)
        return (norm >= self.radius) & (offset <= self.width)

    def scaled(self, h: float) -> "ConeArc2D":
        return ConeArc2D(self.theta_lo, self.theta_hi, self.radius * _check_scale(h), self.strict)

    def interior(self) -> "ConeArc2D":
        return ConeArc2D(self.theta_lo, self.theta_hi, self.radius, True)

    def closure(self) -> "ConeArc2D":
        return ConeArc2D(self.theta_lo, self.theta_hi, self.radius, False)

    def _wedge(self) -> Polyhedron:
        lo, hi = self.theta_lo, self.theta_hi
        normals = [[-math.sin(lo), math.cos(lo)], [math.sin(hi), -math.cos(hi)]]
        return Polyhedron(normals, [0.0, 0.0], self.strict, "cone_wedge")

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        self.require(LINE_CLIP)
        disc = EuclideanBall(np.zeros(2), self.radius, inside=False, strict=self.strict)
        return self._wedge().clip(points, direction).intersect(disc.clip(points, direction))

    def nearest_point(self) -> np.ndarray:
        mid = 0.5 * (self.theta_lo + self.theta_hi)
        return self.radius * np.array([math.cos(mid), math.sin(mid)])

    def origin_gap(self) -> float:
        return self.radius

    def lp_pieces(self) -> List[Piece]:
        """Wedge cut by the bisector halfplane: a polyhedral superset"""
        self.require(LP_FEASIBLE)
        wedge = self._wedge()
        mid = 0.5 * (self.theta_lo + self.theta_hi)
        normals = np.vstack([wedge.normals, [math.cos(mid), math.sin(mid)]])
        offsets = np.append(wedge.offsets, self.radius * math.cos(0.5 * self.width))
        return [(normals, offsets, np.full(3, self.strict))]

    @property
    def lp_exact(self) -> bool:
        return False

    @property
    def scale_closed(self) -> bool:
        return True


class PowerRegion(Region):
    """{x in R^2 : x_2 > 0, h < x_1 < h + h^(1 - sigma) x_2^sigma}, the scaled power set"""

    label = "power_region"

    def __init__(self, sigma: float, scale: float = 1.0, strict: bool = True):
        self.sigma = float(sigma)
        if not self.sigma > 0:
            raise DomainError("power region exponent must be positive")
        self.scale = _check_scale(scale)
        self.strict = bool(strict)

    @property
    def dimension(self) -> int:
        return 2

    @property
    def capabilities(self) -> FrozenSet[str]:
        return frozenset({MEMBERSHIP, LINE_CLIP, ORIGIN_GAP})

    def _upper(self, x2: np.ndarray) -> np.ndarray:
        h = self.scale
        return h + h ** (1.0 - self.sigma) * np.maximum(x2, 0.0) ** self.sigma

    def member(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = x[..., 0], x[..., 1]
        upper = self._upper(x2)
        if self.strict:
            return (x2 > 0) & (x1 > self.scale) & (x1 < upper)
        return (x2 >= 0) & (x1 >= self.scale) & (x1 <= upper)

    def scaled(self, h: float) -> "PowerRegion":
        return PowerRegion(self.sigma, self.scale * _check_scale(h), self.strict)

    def interior(self) -> "PowerRegion":
        return PowerRegion(self.sigma, self.scale, True)

    def closure(self) -> "PowerRegion":
        return PowerRegion(self.sigma, self.scale, False)

    def supports_direction(self, direction: np.ndarray) -> bool:
        d = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(d)
        horizontal = abs(d[1]) <= PARALLEL_TOL * norm and d[0] != 0
        vertical = abs(d[0]) <= PARALLEL_TOL * norm and d[1] != 0
        return bool(horizontal or vertical)

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        d = np.asarray(direction, dtype=float)
        if d.ndim != 1 or not self.supports_direction(d):
            raise CapabilityError("power region clips only along the coordinate axes", node=self.describe())
        points = np.atleast_2d(points)
        x1, x2 = points[:, 0], points[:, 1]
        if abs(d[1]) <= PARALLEL_TOL * np.linalg.norm(d):
            a = (self.scale - x1) / d[0]
            b = (self._upper(x2) - x1) / d[0]
            above = x2 > 0 if self.strict else x2 >= 0
        else:
            # x_1 fixed: x_2 must exceed ((x_1 - h) h^(sigma - 1))^(1 / sigma)
            h = self.scale
            excess = np.maximum(x1 - h, 0.0)
            floor = (excess * h ** (self.sigma - 1.0)) ** (1.0 / self.sigma)
            a = (floor - x2) / d[1]
            b = np.full(x2.shape, np.inf if d[1] > 0 else -np.inf)
            above = x1 > h if self.strict else x1 >= h
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return IntervalSet(np.where(above, lo, np.inf), np.where(above, hi, np.inf))

    def nearest_point(self) -> np.ndarray:
        return np.array([self.scale, 0.0])

    def origin_gap(self) -> float:
        return self.scale


class _Composite(Region):
    def __init__(self, members: Sequence[Region], label: str):
        members = list(members)
        if not members:
            raise DomainError(f"{label} needs at least one member")
        dims = {m.dimension for m in members}
        if len(dims) != 1:
            raise DomainError(f"{label} members have different dimensions {sorted(dims)}")
        self.members = members
        self.label = label
        self._conservative = False

    def children(self) -> Sequence[Region]:
        return self.members

    def describe(self) -> str:
        return f"{self.label}[{', '.join(m.describe() for m in self.members)}]"

    @property
    def dimension(self) -> int:
        return self.members[0].dimension

    @property
    def capabilities(self) -> FrozenSet[str]:
        return frozenset.intersection(*[m.capabilities for m in self.members])

    def _map(self, fn) -> "_Composite":
        out = type(self)([fn(m) for m in self.members], label=self.label)
        out._conservative = self._conservative
        return out

    def scaled(self, h: float) -> Region:
        _check_scale(h)
        return self._map(lambda m: m.scaled(h))

    def interior(self) -> Region:
        return self._map(lambda m: m.interior())

    def closure(self) -> Region:
        return self._map(lambda m: m.closure())

    def dilated(self, delta: float) -> Region:
        self.require(DILATE_ERODE)
        return self._map(lambda m: m.dilated(delta))

    def supports_direction(self, direction: np.ndarray) -> bool:
        return all(m.supports_direction(direction) for m in self.members)

    @property
    def lp_exact(self) -> bool:
        return all(m.lp_exact for m in self.members)

    @property
    def scale_closed(self) -> bool:
        return all(m.scale_closed for m in self.members)

    @property
    def conservative_erosion(self) -> bool:
        return self._conservative or super().conservative_erosion


class Union(_Composite):
    def __init__(self, members: Sequence[Region], label: str = "union"):
        super().__init__(members, label)

    def member(self, x: np.ndarray) -> np.ndarray:
        return np.any([m.member(x) for m in self.members], axis=0)

    def eroded(self, delta: float) -> Region:
        """Union of eroded members, a subset of the true erosion"""
        out = self._map(lambda m: m.eroded(delta))
        out._conservative = len(self.members) > 1
        return out

    def complement(self) -> Region:
        return Intersection([m.complement() for m in self.members], label=f"complement({self.label})")

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        self.require(LINE_CLIP)
        result = self.members[0].clip(points, direction)
        for m in self.members[1:]:
            result = result.union(m.clip(points, direction))
        return result

    def nearest_point(self) -> Optional[np.ndarray]:
        self.require(ORIGIN_GAP)
        best = None
        for m in self.members:
            point = m.nearest_point()
            if point is not None and (best is None or np.linalg.norm(point) < np.linalg.norm(best)):
                best = point
        return best

    def origin_gap(self) -> float:
        self.require(ORIGIN_GAP)
        return min(m.origin_gap() for m in self.members)

    def lp_pieces(self) -> List[Piece]:
        self.require(LP_FEASIBLE)
        return [piece for m in self.members for piece in m.lp_pieces()]


class Intersection(_Composite):
    def __init__(self, members: Sequence[Region], label: str = "intersection"):
        super().__init__(members, label)

    @property
    def capabilities(self) -> FrozenSet[str]:
        caps = set(super().capabilities)
        # the gap of an intersection is only computed through exact polyhedral pieces
        caps.discard(ORIGIN_GAP)
        if LP_FEASIBLE in caps and self.lp_exact:
            caps.add(ORIGIN_GAP)
        return frozenset(caps)

    def member(self, x: np.ndarray) -> np.ndarray:
        return np.all([m.member(x) for m in self.members], axis=0)

    def eroded(self, delta: float) -> Region:
        self.require(DILATE_ERODE)
        return self._map(lambda m: m.eroded(delta))

    def complement(self) -> Region:
        return Union([m.complement() for m in self.members], label=f"complement({self.label})")

    def clip(self, points: np.ndarray, direction: np.ndarray) -> IntervalSet:
        self.require(LINE_CLIP)
        result = self.members[0].clip(points, direction)
        for m in self.members[1:]:
            result = result.intersect(m.clip(points, direction))
        return result

    def lp_pieces(self) -> List[Piece]:
        self.require(LP_FEASIBLE)
        pieces = []
        for combo in itertools.product(*[m.lp_pieces() for m in self.members]):
            pieces.append((
                np.vstack([c[0] for c in combo]),
                np.concatenate([c[1] for c in combo]),
                np.concatenate([c[2] for c in combo]),
            ))
        return pieces

    def _polyhedra(self) -> List[Polyhedron]:
        return [Polyhedron(a, b, s, "piece") for a, b, s in self.lp_pieces()]

    def nearest_point(self) -> Optional[np.ndarray]:
        self.require(ORIGIN_GAP)
        best = None
        for poly in self._polyhedra():
            if feasible_point(poly.closure().piece()) is None:
                continue
            point = poly.nearest_point()
            if point is not None and (best is None or np.linalg.norm(point) < np.linalg.norm(best)):
                best = point
        return best

    def origin_gap(self) -> float:
        point = self.nearest_point()
        return math.inf if point is None else float(np.linalg.norm(point))


def difference_with_ball(region: Region, removed: Region) -> Intersection:
    """E minus a ball, as E intersected with the ball's complement"""
    return Intersection([region, removed.complement()], label="difference_with_ball")


def scale(region: Region, h: float) -> Region:
    return region.scaled(h)


def dilate(region: Region, delta: float) -> Region:
    region.require(DILATE_ERODE)
    return region.dilated(delta)


def erode(region: Region, delta: float) -> Region:
    region.require(DILATE_ERODE)
    return region.eroded(delta)


def origin_gap(region: Region) -> float:
    return region.origin_gap()


def line_clip(region: Region, point, direction, variant: Optional[RegionVariant] = None) -> IntervalSet:
    target = apply_variant(region, variant)
    target.require(LINE_CLIP)
    return target.clip(np.atleast_2d(np.asarray(point, dtype=float)), np.asarray(direction, dtype=float))
