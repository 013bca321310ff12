"""
Report files: one JSON envelope per run plus CSV tables for h-grids.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from app.schemas import ReportEnvelope
from tail_config import TailConfig

logger = logging.getLogger(__name__)

ESTIMATE_COLUMNS = ["h", "p_hat", "ci_lo", "ci_hi", "n", "method", "seed", "normalized"]


def to_jsonable(value: Any) -> Any:
    """numpy scalars/arrays, DataFrames and non-finite floats to plain JSON values"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return to_jsonable(value.to_dict(orient="records"))
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


class ReportWriter:
    """Writes <id>.json (and <id>.csv for tables) under the report directory"""

    def __init__(self, directory: Optional[str] = None):
        self.directory = Path(directory or TailConfig.REPORT_DIR)

    def write_json(self, envelope: ReportEnvelope) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{envelope.id}.json"
        payload = to_jsonable(envelope.model_dump())
        path.write_text(json.dumps(payload, indent=2))
        logger.info(f"Wrote report {path}")
        return path

    def write_csv(self, name: str, table: pd.DataFrame) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{name}.csv"
        table.to_csv(path, index=False)
        logger.info(f"Wrote table {path} ({len(table)} rows)")
        return path

    def write(self, envelope: ReportEnvelope, table: Optional[pd.DataFrame] = None) -> Path:
        path = self.write_json(envelope)
        if table is not None:
            self.write_csv(envelope.id, table)
        return path


def estimates_table(reports) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=ESTIMATE_COLUMNS)
