"""
Shared CLI arguments and scenario construction from flags.
"""

import argparse
import json
import logging
from dataclasses import dataclass
from typing import List, Optional

from pydantic import ValidationError

from app.exceptions import ScenarioError
from app.schemas import ExampleRegionSpec, ModelSpec, RegionNode, Scenario, ScenarioParams
from app.scenarios import check_scenario, load_scenarios

logger = logging.getLogger(__name__)


@dataclass
class Overrides:
    """Command-line values; they win over scenario parameters and configuration"""

    seed: Optional[int] = None
    n: Optional[int] = None
    alpha: Optional[float] = None
    h_grid: Optional[List[float]] = None
    workers: Optional[int] = None
    tolerance_scale: float = 1.0
    report_dir: Optional[str] = None


def _h_grid(text: str) -> List[float]:
    try:
        grid = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"h-grid must be comma-separated numbers, got '{text}'") from None
    if not grid or any(not h > 0 for h in grid):
        raise argparse.ArgumentTypeError("h-grid entries must be positive")
    return grid


def add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--n", type=int, help="sample count")
    parser.add_argument("--alpha", type=float, help="stability index override")
    parser.add_argument("--h-grid", type=_h_grid, help="comma-separated scale points")
    parser.add_argument("--workers", type=int, help="worker threads")
    parser.add_argument("--tolerance-scale", type=float, default=1.0, help="multiplies every bank tolerance")
    parser.add_argument("--report-dir", help="directory for JSON/CSV reports")


def add_target_args(parser: argparse.ArgumentParser, region: bool = True) -> None:
    parser.add_argument("--scenario", help="scenario JSON file")
    parser.add_argument("--id", help="scenario id inside the file, or the report id")
    parser.add_argument("--model", help="example model name (ex1, ex2, ex3, iso2) or model JSON")
    if region:
        parser.add_argument("--region", help="example region name or region JSON")
    parser.add_argument("-k", type=int, help="decay order")


def overrides_from_args(args: argparse.Namespace) -> Overrides:
    return Overrides(
        seed=args.seed,
        n=args.n,
        alpha=args.alpha,
        h_grid=args.h_grid,
        workers=args.workers,
        tolerance_scale=args.tolerance_scale,
        report_dir=args.report_dir,
    )


def _parse_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid {what} JSON: {e.msg}", line=e.lineno, column=e.colno) from None


def _validation_error(e: ValidationError, what: str) -> ScenarioError:
    first = e.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or what
    return ScenarioError(f"{what}: {where}: {first['msg']}")


def parse_model_arg(text: str) -> ModelSpec:
    try:
        if text.lstrip().startswith("{"):
            return ModelSpec.model_validate(_parse_json(text, "model"))
        return ModelSpec(example=text)
    except ValidationError as e:
        raise _validation_error(e, "model") from None


def parse_region_arg(text: str) -> RegionNode:
    try:
        if text.lstrip().startswith("{"):
            return RegionNode.model_validate(_parse_json(text, "region"))
        return RegionNode(example=ExampleRegionSpec(name=text))
    except ValidationError as e:
        raise _validation_error(e, "region") from None


def scenario_from_args(args: argparse.Namespace, task: str, **params) -> Scenario:
    """Scenario from --scenario/--id, or assembled from --model/--region and task flags"""
    if getattr(args, "scenario", None):
        scenarios = load_scenarios(args.scenario, args.alpha)
        if args.id:
            matches = [s for s in scenarios if s.id == args.id]
            if not matches:
                raise ScenarioError(f"no scenario '{args.id}' in {args.scenario}")
            return matches[0]
        if len(scenarios) != 1:
            raise ScenarioError(f"{args.scenario} holds {len(scenarios)} scenarios; pick one with --id")
        return scenarios[0]

    if not getattr(args, "model", None):
        raise ScenarioError("give --scenario or --model")
    model = parse_model_arg(args.model)
    region = parse_region_arg(args.region) if getattr(args, "region", None) else None
    values = {key: value for key, value in params.items() if value is not None}
    if getattr(args, "k", None) is not None:
        values["k"] = args.k
    try:
        scenario = Scenario(
            id=args.id or task,
            task=task,
            model=model,
            region=region,
            params=ScenarioParams(**values),
        )
    except ValidationError as e:
        raise _validation_error(e, "arguments") from None
    check_scenario(scenario, args.alpha)
    return scenario
