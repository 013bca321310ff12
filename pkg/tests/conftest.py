import numpy as np
import pytest

from app.bank import example_model, example_region
from app.models import EstimateReport
from app.worker_pool import chunk_rng
from tail_config import TailConfig


@pytest.fixture(autouse=True)
def isolated_output(tmp_path, monkeypatch):
    """Logs and reports of every test go under its own tmp_path"""
    monkeypatch.setattr(TailConfig, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(TailConfig, "REPORT_DIR", str(tmp_path / "reports"))
    return tmp_path


@pytest.fixture
def small_qmc(monkeypatch):
    """Quadrature budget small enough for unit tests"""
    monkeypatch.setattr(TailConfig, "QMC_LOG2_POINTS", 11)
    monkeypatch.setattr(TailConfig, "QMC_REPLICATES", 4)
    monkeypatch.setattr(TailConfig, "DELTA_HALVINGS", 4)


@pytest.fixture
def rng():
    return chunk_rng(TailConfig.MASTER_SEED, 0, stream=900)


@pytest.fixture
def ex1_model():
    return example_model("ex1", 1.0)


@pytest.fixture
def ex2_model():
    return example_model("ex2", 0.5)


@pytest.fixture
def quadrant():
    return example_region("ex1_i")


@pytest.fixture
def ex2_region():
    return example_region("ex2")


@pytest.fixture
def synthetic_reports():
    """Factory for exact p = h^-exponent (log h)^log_power with zero-width intervals"""

    def build(exponent, h_grid, log_power=0):
        reports = []
        for h in h_grid:
            p = h ** -exponent * np.log(h) ** log_power
            reports.append(EstimateReport(h=h, p_hat=p, ci_lo=p, ci_hi=p, n=1, method="synthetic", seed=0))
        return reports

    return build
