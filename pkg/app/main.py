import argparse
import json
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables before the configuration class reads them
load_dotenv()

from tail_config import TailConfig  # noqa: E402
from app.commands import distribution, estimation, limits, reproduce, run  # noqa: E402
from app.exceptions import ScenarioError, StableTailsError  # noqa: E402
from app.logging_config import setup_logging  # noqa: E402
from app.mc_estimation import mc_service  # noqa: E402
from app.tail_asymptotics import tail_service  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_ERROR = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as a JSON line with exit code 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "Usage error", "message": message}), file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stable-tails",
        description="Tail asymptotics of multivariate symmetric alpha-stable vectors",
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for group in (distribution, limits, estimation, reproduce, run):
        group.register(subparsers)
    logger.debug("CLI subcommands registered")
    return parser


def _configure_workers(args: argparse.Namespace) -> None:
    workers = getattr(args, "workers", None)
    if workers is None:
        return
    if not TailConfig.validate_workers(workers):
        raise ScenarioError(f"worker count must be between 1 and 256, got {workers}")
    tail_service.set_workers(workers)
    mc_service.set_workers(workers)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    logger.info(f"stable-tails {args.command} started")
    try:
        _configure_workers(args)
        code = args.handler(args)
    except ScenarioError as e:
        logger.error(f"{args.command} rejected its input: {e.message}", exc_info=True)
        print(json.dumps(e.detail()), file=sys.stderr)
        return EXIT_USAGE
    except StableTailsError as e:
        logger.error(f"{args.command} failed: {e.message}", exc_info=True)
        print(json.dumps(e.detail()), file=sys.stderr)
        return EXIT_ERROR
    logger.info(f"stable-tails {args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
