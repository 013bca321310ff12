"""
Stable Tails Configuration
Numerical budgets, tolerances and reproducibility settings for the tail-asymptotics toolkit
"""

import os
from typing import Dict, Any, List


def _floats(raw: str) -> List[float]:
    return [float(part) for part in raw.split(",") if part.strip()]


class TailConfig:
    """Configuration class for tail-asymptotic computations"""

    # Reproducibility and parallelism
    MASTER_SEED = int(os.getenv("TAIL_MASTER_SEED", "20240917"))
    WORKERS = int(os.getenv("TAIL_WORKERS", "1"))
    CHUNK_SIZE = int(os.getenv("TAIL_CHUNK_SIZE", str(2**14)))
    BATCH_COUNT = int(os.getenv("TAIL_BATCH_COUNT", "32"))

    # Univariate numerics
    QUAD_ABS_TOL = float(os.getenv("TAIL_QUAD_ABS_TOL", "1e-10"))
    CROSSOVER_AGREEMENT = float(os.getenv("TAIL_CROSSOVER_AGREEMENT", "1e-6"))
    TABLE_NODES = int(os.getenv("TAIL_TABLE_NODES", "600"))
    SERIES_MAX_TERMS = 200

    # Quadrature of the limit integral
    QMC_LOG2_POINTS = int(os.getenv("TAIL_QMC_LOG2_POINTS", "16"))
    QMC_MAX_LOG2_POINTS = int(os.getenv("TAIL_QMC_MAX_LOG2_POINTS", "20"))
    QMC_REPLICATES = int(os.getenv("TAIL_QMC_REPLICATES", "8"))
    FLOORED_REL_TOL = float(os.getenv("TAIL_FLOORED_REL_TOL", "5e-3"))
    ZERO_FLOOR_REL_TOL = float(os.getenv("TAIL_ZERO_FLOOR_REL_TOL", "1e-2"))
    ZERO_FLOOR_STRATA = [0.0, 0.9, 0.99, 0.999, 0.9999, 1.0]
    ETA_LEVELS = 5

    # Linear programs
    LP_TIE_TOL = float(os.getenv("TAIL_LP_TIE_TOL", "1e-9"))
    STRICT_SLACKS = _floats(os.getenv("TAIL_STRICT_SLACKS", "1e-6,1e-9"))

    # Sandwich bounds and sphere-form Monte Carlo
    DELTA_HALVINGS = int(os.getenv("TAIL_DELTA_HALVINGS", "6"))
    MC_SMIN_HALVINGS = int(os.getenv("TAIL_MC_SMIN_HALVINGS", "10"))

    # LePage series
    LEPAGE_BLOCK = int(os.getenv("TAIL_LEPAGE_BLOCK", "100"))
    LEPAGE_TOL = float(os.getenv("TAIL_LEPAGE_TOL", "1e-4"))
    LEPAGE_MAX_TERMS = int(os.getenv("TAIL_LEPAGE_MAX_TERMS", "4000"))
    LEPAGE_GAUSSIAN_REMAINDER = os.getenv("TAIL_LEPAGE_GAUSSIAN_REMAINDER", "true").lower() == "true"

    # Conditional Monte Carlo
    MIXTURE_WEIGHTS = _floats(os.getenv("TAIL_MIXTURE_WEIGHTS", "0.3334,0.3333,0.3333"))

    # Output
    REPORT_DIR = os.getenv("TAIL_REPORT_DIR", "reports")
    LOG_DIR = os.getenv("TAIL_LOG_DIR", "logs")
    LOG_LEVEL = os.getenv("TAIL_LOG_LEVEL", "INFO")

    @classmethod
    def quadrature_settings(cls) -> Dict[str, Any]:
        """Get limit-integral quadrature settings"""
        return {
            "log2_points": cls.QMC_LOG2_POINTS,
            "max_log2_points": cls.QMC_MAX_LOG2_POINTS,
            "replicates": cls.QMC_REPLICATES,
            "floored_rel_tol": cls.FLOORED_REL_TOL,
            "zero_floor_rel_tol": cls.ZERO_FLOOR_REL_TOL,
            "strata": list(cls.ZERO_FLOOR_STRATA),
            "eta_levels": cls.ETA_LEVELS,
        }

    @classmethod
    def monte_carlo_settings(cls) -> Dict[str, Any]:
        """Get Monte Carlo settings"""
        return {
            "chunk_size": cls.CHUNK_SIZE,
            "batch_count": cls.BATCH_COUNT,
            "workers": cls.WORKERS,
            "mixture_weights": list(cls.MIXTURE_WEIGHTS),
        }

    @classmethod
    def lepage_settings(cls) -> Dict[str, Any]:
        """Get LePage truncation settings"""
        return {
            "block": cls.LEPAGE_BLOCK,
            "tolerance": cls.LEPAGE_TOL,
            "max_terms": cls.LEPAGE_MAX_TERMS,
            "gaussian_remainder": cls.LEPAGE_GAUSSIAN_REMAINDER,
        }

    @classmethod
    def validate_workers(cls, workers: int) -> bool:
        """Validate a worker count"""
        return 1 <= workers <= 256


# Environment variables template
ENV_TEMPLATE = """
# Stable Tails Configuration
# Reproducibility
TAIL_MASTER_SEED=20240917
TAIL_WORKERS=1

# Limit-integral quadrature (2^points low-discrepancy points x replicates)
TAIL_QMC_LOG2_POINTS=16
TAIL_QMC_REPLICATES=8

# LePage truncation
TAIL_LEPAGE_TOL=1e-4
TAIL_LEPAGE_MAX_TERMS=4000

# Output locations
TAIL_REPORT_DIR=reports
TAIL_LOG_DIR=logs
TAIL_LOG_LEVEL=INFO
"""

if __name__ == "__main__":
    print("Stable Tails Configuration")
    print("=" * 30)
    print(f"Master seed: {TailConfig.MASTER_SEED}")
    print(f"Workers: {TailConfig.WORKERS}")
    print(f"Chunk size: {TailConfig.CHUNK_SIZE}")
    print(f"QMC points per replicate: 2^{TailConfig.QMC_LOG2_POINTS}")
    print(f"QMC replicates: {TailConfig.QMC_REPLICATES}")
    print(f"LePage tolerance: {TailConfig.LEPAGE_TOL}")
    print(f"Report directory: {TailConfig.REPORT_DIR}")
    print("\nEnvironment Variables Template:")
    print(ENV_TEMPLATE)
