"""
Univariate distribution and characteristic-function checks.
"""

import argparse
import json
import logging

from app.commands.common import add_common_args, add_target_args
from app.commands.run import run_single
from app.exceptions import ScenarioError

logger = logging.getLogger(__name__)

# One-dimensional carrier for `dist`; only alpha is read from it
UNIVARIATE_MODEL = '{"measure": {"atoms": [{"direction": [1.0], "mass": 0.5}]}}'


def _floats(text: str):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _theta(text: str):
    try:
        grid = json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError("theta must be a JSON list of vectors") from None
    if not isinstance(grid, list) or not all(isinstance(row, list) for row in grid):
        raise argparse.ArgumentTypeError("theta must be a JSON list of vectors")
    return grid


def dist_command(args: argparse.Namespace) -> int:
    if not args.scenario:
        if args.alpha is None:
            raise ScenarioError("dist needs --alpha or --scenario")
        args.model = UNIVARIATE_MODEL
    return run_single(args, "dist", x_grid=args.x)


def cf_check_command(args: argparse.Namespace) -> int:
    return run_single(args, "cf-check", theta_grid=args.theta)


def register(subparsers) -> None:
    dist = subparsers.add_parser("dist", help="standard SaS pdf, cdf and survival on an x grid")
    dist.add_argument("--scenario", help="scenario JSON file")
    dist.add_argument("--id", help="scenario id inside the file, or the report id")
    dist.add_argument("--x", type=_floats, help="comma-separated evaluation points")
    add_common_args(dist)
    dist.set_defaults(handler=dist_command, model=None, k=None)

    cf = subparsers.add_parser("cf-check", help="empirical against exact characteristic function")
    add_target_args(cf, region=False)
    cf.add_argument("--theta", type=_theta, help='JSON list of frequency vectors, e.g. "[[1,0],[0.5,0.5]]"')
    add_common_args(cf)
    cf.set_defaults(handler=cf_check_command)
