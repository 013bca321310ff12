"""
Monte Carlo estimates of P(X in hE), normalized probes and log-log slopes.
"""

import argparse
import logging

from app.commands.common import add_common_args, add_target_args
from app.commands.run import run_single

logger = logging.getLogger(__name__)


def _estimator_params(args: argparse.Namespace) -> dict:
    return {"h": args.h, "method": args.method, "smoothing_index": args.smoothing_index}


def estimate_command(args: argparse.Namespace) -> int:
    return run_single(args, "estimate", **_estimator_params(args))


def probe_command(args: argparse.Namespace) -> int:
    return run_single(args, "probe", rate=args.rate, log_power=args.log_power, **_estimator_params(args))


def slope_command(args: argparse.Namespace) -> int:
    return run_single(args, "slope", **_estimator_params(args))


def _add_estimator_args(parser: argparse.ArgumentParser) -> None:
    add_target_args(parser)
    parser.add_argument("--h", type=float, help="single scale point (or use --h-grid)")
    parser.add_argument("--method", choices=["crude", "conditional", "lepage"],
                        help="default conditional for atomic measures, lepage otherwise")
    parser.add_argument("--smoothing-index", type=int, help="column smoothed exactly by conditional MC")
    add_common_args(parser)


def register(subparsers) -> None:
    estimate = subparsers.add_parser("estimate", help="estimate P(X in hE) over an h grid")
    _add_estimator_args(estimate)
    estimate.set_defaults(handler=estimate_command)

    probe = subparsers.add_parser("probe", help="tabulate h^rate (log h)^-p P(X in hE)")
    _add_estimator_args(probe)
    probe.add_argument("--rate", type=float, help="normalizing exponent, default k*alpha")
    probe.add_argument("--log-power", type=int, help="power of log h divided out")
    probe.set_defaults(handler=probe_command)

    slope = subparsers.add_parser("slope", help="fit log P(X in hE) against log h")
    _add_estimator_args(slope)
    slope.set_defaults(handler=slope_command)
