"""
Scenario files: JSON parsing with positions, model/region construction and
capability checks at load time.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union as TypingUnion

import numpy as np
from pydantic import ValidationError

from app.bank import example_model, example_region
from app.exceptions import DomainError, ScenarioError, UnknownExampleError
from app.models import LinearRepresentation, SpectralMeasure, StableVectorModel
from app.region_geometry import (
    DILATE_ERODE,
    LINE_CLIP,
    MEMBERSHIP,
    ORIGIN_GAP,
    ConeArc2D,
    Intersection,
    PowerRegion,
    Region,
    Union,
    ball,
    box,
    difference_with_ball,
    halfspace,
)
from app.schemas import ModelSpec, RegionNode, Scenario, ScenarioFile
from app.spectral_model import from_matrix

logger = logging.getLogger(__name__)


def build_region(node: RegionNode) -> Region:
    kind = node.kind
    if kind == "halfspace":
        spec = node.halfspace
        return halfspace(spec.normal, spec.offset, spec.strict)
    if kind == "box":
        return box(node.box.lo, node.box.hi, open_faces=node.box.open)
    if kind == "ball":
        spec = node.ball
        return ball(spec.center, spec.radius, spec.inside, spec.norm, spec.strict)
    if kind == "cone_arc":
        spec = node.cone_arc
        return ConeArc2D(spec.theta_lo, spec.theta_hi, spec.radius, spec.strict)
    if kind == "power_region":
        spec = node.power_region
        return PowerRegion(spec.sigma, spec.scale, spec.strict)
    if kind == "or":
        return Union([build_region(child) for child in node.any_of])
    if kind == "and":
        return Intersection([build_region(child) for child in node.all_of])
    if kind == "example":
        return example_region(node.example.name, **node.example.params)
    spec = node.difference_with_ball
    removed = ball(spec.ball.center, spec.ball.radius, spec.ball.inside, spec.ball.norm, spec.ball.strict)
    return difference_with_ball(build_region(spec.region), removed)


def build_model(spec: ModelSpec, alpha: Optional[float] = None) -> StableVectorModel:
    """alpha argument overrides the scenario's alpha"""
    alpha = alpha if alpha is not None else spec.alpha
    if alpha is None:
        raise ScenarioError("model needs an alpha (in the scenario or on the command line)")
    if spec.example is not None:
        return example_model(spec.example, alpha, **spec.params)
    if spec.matrix is not None:
        return from_matrix(LinearRepresentation(alpha, np.asarray(spec.matrix, dtype=float)))
    measure = spec.measure
    directions = [atom.direction for atom in measure.atoms]
    masses = [atom.mass for atom in measure.atoms]
    dimension = measure.dimension
    if not directions and dimension is None:
        raise ScenarioError("a measure without atoms needs an explicit dimension")
    if not directions:
        return StableVectorModel(alpha, SpectralMeasure.isotropic(dimension, measure.isotropic_mass))
    return StableVectorModel(alpha, SpectralMeasure.from_atoms(directions, masses, measure.isotropic_mass))


def required_capabilities(scenario: Scenario) -> List[str]:
    method = scenario.params.method
    if scenario.task == "L":
        return [LINE_CLIP, ORIGIN_GAP] if method != "montecarlo" else [MEMBERSHIP, ORIGIN_GAP]
    if scenario.task == "bounds":
        return [LINE_CLIP, ORIGIN_GAP, DILATE_ERODE]
    if scenario.task in ("estimate", "probe", "slope"):
        return [MEMBERSHIP] if method in ("crude", "lepage") else [LINE_CLIP]
    return []


def check_scenario(scenario: Scenario, alpha: Optional[float] = None) -> None:
    """Build model and region once and check the capabilities the task needs"""
    try:
        model = build_model(scenario.model, alpha if alpha is not None else scenario.model.alpha or 1.0)
        if scenario.region is None:
            return
        region = build_region(scenario.region)
    except (DomainError, UnknownExampleError) as e:
        raise ScenarioError(f"scenario '{scenario.id}': {e.message}") from None
    if region.dimension != model.dimension:
        raise ScenarioError(
            f"scenario '{scenario.id}': region dimension {region.dimension} does not match model dimension {model.dimension}"
        )
    for capability in required_capabilities(scenario):
        region.require(capability)


def parse_scenarios(text: str, source: str = "<scenario>") -> List[Scenario]:
    """A scenario file holds {"scenarios": [...]} or a single scenario object"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from None
    payload = raw if isinstance(raw, dict) and "scenarios" in raw else {"scenarios": [raw]}
    try:
        parsed = ScenarioFile.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ScenarioError(f"{source}: {where}: {first['msg']} ({e.error_count()} error(s))") from None
    logger.info(f"Loaded {len(parsed.scenarios)} scenario(s) from {source}")
    return parsed.scenarios


def load_scenarios(path: TypingUnion[str, Path], alpha: Optional[float] = None) -> List[Scenario]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file {path}: {e}") from None
    scenarios = parse_scenarios(text, str(path))
    for scenario in scenarios:
        check_scenario(scenario, alpha)
    return scenarios
