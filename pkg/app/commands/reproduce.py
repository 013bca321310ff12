"""
Bank reproduction: run named reference experiments and compare against
their expected outcomes.
"""

import argparse
import json
import logging
import sys

from app.bank import RunSettings, get_entry, list_bank, run_entry
from app.commands.common import add_common_args, overrides_from_args
from app.commands.run import emit
from app.exceptions import ScenarioError
from app.schemas import BankListing
from tail_config import TailConfig

logger = logging.getLogger(__name__)


def reproduce_command(args: argparse.Namespace) -> int:
    if args.all == bool(args.id):
        raise ScenarioError("give one bank id or --all")
    overrides = overrides_from_args(args)
    settings = RunSettings(
        seed=overrides.seed if overrides.seed is not None else TailConfig.MASTER_SEED,
        n=overrides.n,
        h_grid=overrides.h_grid,
        tolerance_scale=overrides.tolerance_scale,
    )
    entries = list_bank() if args.all else [get_entry(args.id)]
    failed = []
    for entry in entries:
        envelope = run_entry(entry, overrides.alpha, settings)
        emit(envelope, None, overrides)
        if not envelope.passed:
            failed.append(entry.id)
    if failed:
        logger.warning(f"outside tolerance: {', '.join(failed)}")
        print(json.dumps({"error": "Tolerance failure", "message": f"outside tolerance: {', '.join(failed)}"}),
              file=sys.stderr)
        return 1
    logger.info(f"{len(entries)} bank entr{'y' if len(entries) == 1 else 'ies'} within tolerance")
    return 0


def list_bank_command(args: argparse.Namespace) -> int:
    entries = [entry.to_schema() for entry in list_bank()]
    if args.json:
        print(BankListing(entries=entries).model_dump_json(indent=2))
        return 0
    for entry in entries:
        print(f"{entry.id:<22} alpha={entry.default_alpha:<5g} tol={entry.tolerance:<7g} {entry.description} [{entry.anchor}]")
    return 0


def register(subparsers) -> None:
    reproduce = subparsers.add_parser("reproduce", help="run bank entries against their expected outcomes")
    reproduce.add_argument("id", nargs="?", help="bank entry id (see list-bank)")
    reproduce.add_argument("--all", action="store_true", help="run every bank entry")
    add_common_args(reproduce)
    reproduce.set_defaults(handler=reproduce_command)

    listing = subparsers.add_parser("list-bank", help="list reference experiments")
    listing.add_argument("--json", action="store_true", help="machine-readable listing")
    listing.set_defaults(handler=list_bank_command)
