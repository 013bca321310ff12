"""
Scenario execution shared by every subcommand, and the `run` subcommand for
whole scenario files.
"""

import argparse
import json
import logging
import math
import sys
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from app.bank import RunSettings, get_entry, run_entry
from app.commands.common import Overrides, add_common_args, overrides_from_args, scenario_from_args
from app.exceptions import DomainError, NoReachabilityError, ScenarioError
from app.mc_estimation import mc_service
from app.models import EstimateReport
from app.region_geometry import RegionVariant
from app.reports import ReportWriter, estimates_table, to_jsonable
from app.scenarios import build_model, build_region, load_scenarios
from app.schemas import ReportEnvelope, Scenario
from app.spectral_model import cf_exponent, lepage_samples, sample_vectors
from app.stable_univariate import c_alpha, cdf_array, pdf_array, sf_array
from app.tail_asymptotics import tail_service
from app.worker_pool import chunk_rng
from tail_config import TailConfig

logger = logging.getLogger(__name__)

DEFAULT_X_GRID = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0]


def _seed(scenario: Scenario, overrides: Overrides) -> int:
    if overrides.seed is not None:
        return overrides.seed
    if scenario.params.seed is not None:
        return scenario.params.seed
    return TailConfig.MASTER_SEED


def _samples(scenario: Scenario, overrides: Overrides, default: int) -> int:
    return int(overrides.n or scenario.params.n or default)


def _grid(scenario: Scenario, overrides: Overrides):
    grid = overrides.h_grid or scenario.params.h_grid
    if grid is None and scenario.params.h is not None:
        grid = [scenario.params.h]
    if not grid:
        raise DomainError(f"scenario '{scenario.id}' needs an h or h-grid")
    return list(grid)


def _dist(scenario, overrides, seed):
    alpha = overrides.alpha or scenario.model.alpha
    if alpha is None:
        raise DomainError("dist needs an alpha")
    x = np.asarray(scenario.params.x_grid or DEFAULT_X_GRID, dtype=float)
    sf = sf_array(alpha, x)
    table = pd.DataFrame({
        "x": x,
        "pdf": pdf_array(alpha, x),
        "cdf": cdf_array(alpha, x),
        "sf": sf,
        "tail_ratio": np.where(x > 0, 2.0 * x ** alpha * sf / c_alpha(alpha), np.nan),
    })
    return {"alpha": alpha, "c_alpha": c_alpha(alpha)}, table


def _cf_check(scenario, overrides, seed):
    model = build_model(scenario.model, overrides.alpha)
    n = _samples(scenario, overrides, 200_000)
    rng = chunk_rng(seed, 0, stream=21)
    if model.measure.is_atomic:
        draws = sample_vectors(model, rng, n)
    else:
        draws, _, _ = lepage_samples(model, rng, n)
    if scenario.params.theta_grid:
        theta = np.asarray(scenario.params.theta_grid, dtype=float)
    else:
        directions = rng.standard_normal((10, model.dimension))
        theta = directions / np.linalg.norm(directions, axis=1, keepdims=True) * np.linspace(0.2, 2.0, 10)[:, None]
    cosines = np.cos(draws @ theta.T)
    empirical = cosines.mean(axis=0)
    se = cosines.std(axis=0, ddof=1) / math.sqrt(n)
    exact = np.exp(-cf_exponent(model, theta))
    table = pd.DataFrame({
        "theta": [t.tolist() for t in theta],
        "empirical": empirical,
        "exact": exact,
        "std_error": se,
        "z": (empirical - exact) / np.maximum(se, 1e-300),
    })
    return {"max_abs_z": float(np.max(np.abs(table["z"]))), "n": n}, table


def _L(scenario, overrides, seed):
    model = build_model(scenario.model, overrides.alpha)
    region = build_region(scenario.region)
    params = scenario.params
    variant = RegionVariant.parse(params.variant) if params.variant else RegionVariant.closure()
    try:
        order = tail_service.min_hits(model, region, RegionVariant.interior(), candidate_k=params.k or 2, seed=seed)
    except NoReachabilityError:
        if params.k is None:
            raise
        order = None
    k = params.k or order.k
    if params.method == "montecarlo":
        value = tail_service.L_montecarlo(model, region, k, variant, n=_samples(scenario, overrides, 200_000), seed=seed)
    else:
        value = tail_service.L_quadrature(model, region, k, variant, tolerance=params.tolerance, seed=seed)
    return {"L": value.to_report(), "interior_order": order.to_report() if order else None}, None


def _bounds(scenario, overrides, seed):
    model = build_model(scenario.model, overrides.alpha)
    region = build_region(scenario.region)
    k = scenario.params.k
    if k is None:
        raise DomainError("bounds needs an order k")
    bounds = tail_service.theorem_bounds(model, region, k, seed=seed, lower_via_erosion=scenario.params.lower_via_erosion)
    table = pd.DataFrame(bounds.sweep, columns=["delta", "L", "err"])
    return bounds.to_report(), table


def _estimator_kwargs(scenario):
    if scenario.params.smoothing_index is not None:
        return {"smoothing_index": scenario.params.smoothing_index}
    return {}


def _method(scenario, model):
    method = scenario.params.method
    if method in ("crude", "conditional", "lepage"):
        return method
    return "conditional" if model.measure.is_atomic else "lepage"


def _estimates(scenario, overrides, seed) -> List[EstimateReport]:
    model = build_model(scenario.model, overrides.alpha)
    region = build_region(scenario.region)
    method = _method(scenario, model)
    n = _samples(scenario, overrides, 100_000)
    kwargs = _estimator_kwargs(scenario) if method == "conditional" else {}
    return [
        mc_service.estimate(model, region, h, n, method, seed, scenario.params.k, **kwargs)
        for h in _grid(scenario, overrides)
    ]


def _estimate(scenario, overrides, seed):
    reports = _estimates(scenario, overrides, seed)
    return {"estimates": [r.to_row() for r in reports]}, estimates_table(reports)


def _probe(scenario, overrides, seed):
    model = build_model(scenario.model, overrides.alpha)
    region = build_region(scenario.region)
    params = scenario.params
    if params.k is None and params.rate is None:
        raise DomainError("probe needs an order k or an explicit rate")
    method = _method(scenario, model)
    table = mc_service.normalized_limit_probe(
        model, region, params.k or 1, _grid(scenario, overrides), method=method,
        n=_samples(scenario, overrides, 100_000), seed=seed, rate=params.rate, log_power=params.log_power,
        **(_estimator_kwargs(scenario) if method == "conditional" else {}),
    )
    return {"rows": len(table), "rate": params.rate, "log_power": params.log_power}, table


def _slope(scenario, overrides, seed):
    reports = _estimates(scenario, overrides, seed)
    fit = mc_service.slope_fit(reports)
    return {"slope": fit.to_report(), "estimates": [r.to_row() for r in reports]}, estimates_table(reports)


TASKS = {
    "dist": _dist,
    "cf-check": _cf_check,
    "L": _L,
    "bounds": _bounds,
    "estimate": _estimate,
    "probe": _probe,
    "slope": _slope,
}


def execute(scenario: Scenario, overrides: Overrides) -> Tuple[ReportEnvelope, Optional[pd.DataFrame]]:
    """Run one scenario; flags beat scenario parameters, which beat configuration"""
    seed = _seed(scenario, overrides)
    if scenario.task == "reproduce":
        settings = RunSettings(seed=seed, n=overrides.n or scenario.params.n,
                               h_grid=overrides.h_grid or scenario.params.h_grid,
                               tolerance_scale=overrides.tolerance_scale)
        envelope = run_entry(get_entry(scenario.id), overrides.alpha or scenario.model.alpha, settings)
        return envelope, None
    logger.info(f"Running scenario {scenario.id} ({scenario.task})")
    result, table = TASKS[scenario.task](scenario, overrides, seed)
    envelope = ReportEnvelope(
        id=scenario.id,
        task=scenario.task,
        status="ok",
        seed=seed,
        alpha=overrides.alpha or scenario.model.alpha,
        result=to_jsonable(result),
        settings={"n": overrides.n or scenario.params.n, "workers": overrides.workers or TailConfig.WORKERS},
    )
    return envelope, table


def emit(envelope: ReportEnvelope, table: Optional[pd.DataFrame], overrides: Overrides) -> None:
    """Write report files and print the envelope to stdout"""
    ReportWriter(overrides.report_dir).write(envelope, table)
    print(json.dumps(to_jsonable(envelope.model_dump())))


def run_command(args: argparse.Namespace) -> int:
    overrides = overrides_from_args(args)
    scenarios = load_scenarios(args.file, args.alpha)
    failed = 0
    for scenario in scenarios:
        envelope, table = execute(scenario, overrides)
        emit(envelope, table, overrides)
        if envelope.passed is False:
            failed += 1
    if failed:
        print(f"{failed} scenario(s) outside tolerance", file=sys.stderr)
        return 1
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="run every scenario in a JSON file")
    parser.add_argument("file", help="scenario JSON file")
    add_common_args(parser)
    parser.set_defaults(handler=run_command)


def run_single(args: argparse.Namespace, task: str, **params) -> int:
    """Handler body shared by the single-scenario subcommands"""
    overrides = overrides_from_args(args)
    scenario = scenario_from_args(args, task, **params)
    if scenario.task != task:
        raise ScenarioError(f"scenario '{scenario.id}' is a '{scenario.task}' task, not '{task}'")
    envelope, table = execute(scenario, overrides)
    emit(envelope, table, overrides)
    return 1 if envelope.passed is False else 0
