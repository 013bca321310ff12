"""
Limit integrals L(E, k, alpha) and the interior/dilation sandwich.
"""

import argparse
import logging

from app.commands.common import add_common_args, add_target_args
from app.commands.run import run_single

logger = logging.getLogger(__name__)


def limit_command(args: argparse.Namespace) -> int:
    return run_single(args, "L", variant=args.variant, method=args.method, tolerance=args.tolerance)


def bounds_command(args: argparse.Namespace) -> int:
    return run_single(args, "bounds", lower_via_erosion=args.lower_via_erosion or None)


def register(subparsers) -> None:
    limit = subparsers.add_parser("L", help="limit integral for a region variant")
    add_target_args(limit)
    limit.add_argument("--variant", help="interior, closure, dilated:<delta> or eroded:<delta>")
    limit.add_argument("--method", choices=["quadrature", "montecarlo"], help="default quadrature")
    limit.add_argument("--tolerance", type=float, help="relative accuracy target")
    add_common_args(limit)
    limit.set_defaults(handler=limit_command)

    bounds = subparsers.add_parser("bounds", help="lower/upper bounds from interior and dilations")
    add_target_args(bounds)
    bounds.add_argument("--lower-via-erosion", action="store_true", help="lower bound from the smallest erosion")
    add_common_args(bounds)
    bounds.set_defaults(handler=bounds_command)
