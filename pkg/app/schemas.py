from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Region schemas
REGION_KINDS = (
    "halfspace", "box", "ball", "cone_arc", "power_region", "or", "and", "difference_with_ball", "example",
)


class HalfspaceSpec(BaseModel):
    normal: List[float]
    offset: float
    strict: bool = True

    model_config = ConfigDict(extra="forbid")


class BoxSpec(BaseModel):
    lo: List[Optional[float]]
    hi: List[Optional[float]]
    open: bool = True

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def same_length(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box bounds lo and hi must have the same length")
        return self


class BallSpec(BaseModel):
    center: List[float]
    radius: float = Field(gt=0)
    inside: bool = True
    norm: Literal["2", "inf"] = "2"
    strict: bool = True

    model_config = ConfigDict(extra="forbid")


class ConeArcSpec(BaseModel):
    theta_lo: float
    theta_hi: float
    radius: float = Field(default=1.0, gt=0)
    strict: bool = True

    model_config = ConfigDict(extra="forbid")


class PowerRegionSpec(BaseModel):
    sigma: float = Field(gt=0)
    scale: float = Field(default=1.0, gt=0)
    strict: bool = True

    model_config = ConfigDict(extra="forbid")


class ExampleRegionSpec(BaseModel):
    name: str
    params: Dict[str, float] = {}

    model_config = ConfigDict(extra="forbid")


class DifferenceSpec(BaseModel):
    region: "RegionNode"
    ball: BallSpec

    model_config = ConfigDict(extra="forbid")


class RegionNode(BaseModel):
    """Exactly one region constructor per node"""

    halfspace: Optional[HalfspaceSpec] = None
    box: Optional[BoxSpec] = None
    ball: Optional[BallSpec] = None
    cone_arc: Optional[ConeArcSpec] = None
    power_region: Optional[PowerRegionSpec] = None
    any_of: Optional[List["RegionNode"]] = Field(default=None, alias="or")
    all_of: Optional[List["RegionNode"]] = Field(default=None, alias="and")
    difference_with_ball: Optional[DifferenceSpec] = None
    example: Optional[ExampleRegionSpec] = None

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def exactly_one(self):
        present = [kind for kind, value in zip(REGION_KINDS, self._values()) if value is not None]
        if len(present) != 1:
            raise ValueError(f"region node needs exactly one of {', '.join(REGION_KINDS)}; got {present or 'none'}")
        for kind in ("or", "and"):
            members = self.any_of if kind == "or" else self.all_of
            if members is not None and not members:
                raise ValueError(f"'{kind}' needs at least one member")
        return self

    def _values(self):
        return (
            self.halfspace, self.box, self.ball, self.cone_arc, self.power_region,
            self.any_of, self.all_of, self.difference_with_ball, self.example,
        )

    @property
    def kind(self) -> str:
        return next(kind for kind, value in zip(REGION_KINDS, self._values()) if value is not None)


DifferenceSpec.model_rebuild()


# Model schemas
class AtomSpec(BaseModel):
    direction: List[float]
    mass: float = Field(gt=0)

    model_config = ConfigDict(extra="forbid")


class MeasureSpec(BaseModel):
    atoms: List[AtomSpec] = []
    isotropic_mass: float = Field(default=0.0, ge=0)
    dimension: Optional[int] = None

    model_config = ConfigDict(extra="forbid")


class ModelSpec(BaseModel):
    """alpha plus one of: a spectral measure, a matrix (rows = coordinates) or a named bank model"""

    alpha: Optional[float] = Field(default=None, gt=0, lt=2)
    measure: Optional[MeasureSpec] = None
    matrix: Optional[List[List[float]]] = None
    example: Optional[str] = None
    params: Dict[str, float] = {}

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def one_source(self):
        sources = [s for s in (self.measure, self.matrix, self.example) if s is not None]
        if len(sources) != 1:
            raise ValueError("model needs exactly one of 'measure', 'matrix' or 'example'")
        return self


# Scenario schemas
class ScenarioParams(BaseModel):
    k: Optional[int] = Field(default=None, ge=1)
    h: Optional[float] = Field(default=None, gt=0)
    h_grid: Optional[List[float]] = None
    n: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    variant: Optional[str] = None
    tolerance: Optional[float] = Field(default=None, gt=0)
    method: Optional[Literal["crude", "conditional", "lepage", "quadrature", "montecarlo"]] = None
    smoothing_index: Optional[int] = Field(default=None, ge=0)
    rate: Optional[float] = None
    log_power: int = 0
    eps_grid: Optional[List[float]] = None
    center: Optional[List[float]] = None
    lower_via_erosion: bool = False
    theta_grid: Optional[List[List[float]]] = None
    x_grid: Optional[List[float]] = None

    model_config = ConfigDict(extra="forbid")

    @field_validator("h_grid", "eps_grid")
    @classmethod
    def positive_grid(cls, grid):
        if grid is not None and any(not g > 0 for g in grid):
            raise ValueError("grid entries must be positive")
        return grid


class Scenario(BaseModel):
    id: str
    task: Literal["dist", "cf-check", "L", "bounds", "estimate", "probe", "slope", "reproduce"]
    model: ModelSpec
    region: Optional[RegionNode] = None
    params: ScenarioParams = ScenarioParams()

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def region_when_needed(self):
        if self.task in ("L", "bounds", "estimate", "probe", "slope") and self.region is None:
            raise ValueError(f"task '{self.task}' needs a region")
        return self


class ScenarioFile(BaseModel):
    scenarios: List[Scenario]

    model_config = ConfigDict(extra="forbid")

    @field_validator("scenarios")
    @classmethod
    def unique_ids(cls, scenarios):
        seen = set()
        for scenario in scenarios:
            if scenario.id in seen:
                raise ValueError(f"duplicate scenario id '{scenario.id}'")
            seen.add(scenario.id)
        return scenarios


# Bank schemas
class ExpectedOutcome(BaseModel):
    kind: Literal["closed_form", "property"]
    reference: str
    params: Dict[str, Any] = {}
    provenance: str

    model_config = ConfigDict(extra="forbid")


class BankEntrySchema(BaseModel):
    id: str
    description: str
    anchor: str = Field(min_length=1)
    default_alpha: float
    expected: ExpectedOutcome
    tolerance: float = Field(gt=0)

    model_config = ConfigDict(extra="forbid")


class BankListing(BaseModel):
    entries: List[BankEntrySchema]


# Report schemas
class ReportEnvelope(BaseModel):
    id: str
    task: str
    status: Literal["ok", "failed"]
    seed: int
    alpha: Optional[float] = None
    result: Dict[str, Any] = {}
    expected: Optional[Dict[str, Any]] = None
    passed: Optional[bool] = None
    settings: Dict[str, Any] = {}
