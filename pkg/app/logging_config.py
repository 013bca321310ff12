import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

from tail_config import TailConfig

_HANDLER_TAG = "_stable_tails_handler"
LOG_FILE = "stable_tails.log"


def _tagged(handler: logging.Handler, level: int, formatter: logging.Formatter) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    setattr(handler, _HANDLER_TAG, True)
    return handler


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None):
    """Configure the root logger once per call site; safe to call repeatedly"""
    level_name = (level or TailConfig.LOG_LEVEL).upper()
    log_level = getattr(logging, level_name, logging.INFO)
    log_dir = log_dir or TailConfig.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    root = logging.getLogger()
    root.setLevel(log_level)
    for handler in list(root.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root.removeHandler(handler)
            handler.close()

    detailed = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s [%(filename)s:%(lineno)d]')
    simple = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

    # 10MB per file, 5 backups
    file_handler = _tagged(
        RotatingFileHandler(os.path.join(log_dir, LOG_FILE), maxBytes=10_000_000, backupCount=5),
        log_level,
        detailed,
    )
    # stdout carries report envelopes only
    console_handler = _tagged(logging.StreamHandler(), log_level, simple)
    root.addHandler(file_handler)
    root.addHandler(console_handler)

    # scipy integration and numpy runtime warnings land in the same log
    logging.captureWarnings(True)
    logging.getLogger("py.warnings").setLevel(logging.WARNING)


if __name__ == "__main__":
    setup_logging()
    logging.info("Logging configuration initialized")
