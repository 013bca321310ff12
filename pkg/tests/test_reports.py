import json
import math

import numpy as np
import pandas as pd

from app.models import EstimateReport
from app.reports import ESTIMATE_COLUMNS, ReportWriter, estimates_table, to_jsonable
from app.schemas import ReportEnvelope


class TestToJsonable:
    def test_non_finite_floats_become_strings(self):
        assert to_jsonable([math.inf, -math.inf, math.nan, 1.5]) == ["inf", "-inf", "nan", 1.5]

    def test_numpy_values(self):
        value = to_jsonable({"a": np.float64(2.0), "b": np.arange(3), "c": (np.int64(4),)})
        assert value == {"a": 2.0, "b": [0, 1, 2], "c": [4]}
        assert type(value["a"]) is float

    def test_data_frames_become_records(self):
        frame = pd.DataFrame({"h": [10.0], "p": [np.inf]})
        assert to_jsonable(frame) == [{"h": 10.0, "p": "inf"}]


class TestReportWriter:
    def test_writes_envelope_and_table(self, tmp_path):
        envelope = ReportEnvelope(id="probe_1", task="probe", status="ok", seed=3, result={"L": math.inf})
        table = pd.DataFrame({"h": [10.0, 100.0], "p_hat": [1e-2, 1e-4]})
        path = ReportWriter(str(tmp_path)).write(envelope, table)
        assert path == tmp_path / "probe_1.json"
        payload = json.loads(path.read_text())
        assert payload["result"] == {"L": "inf"}
        assert payload["status"] == "ok"
        assert (tmp_path / "probe_1.csv").read_text().splitlines()[0] == "h,p_hat"

    def test_default_directory_comes_from_configuration(self, isolated_output):
        envelope = ReportEnvelope(id="plain", task="dist", status="ok", seed=0)
        path = ReportWriter().write(envelope)
        assert path.parent == isolated_output / "reports"
        assert not (isolated_output / "reports" / "plain.csv").exists()


def test_estimates_table_columns():
    report = EstimateReport(h=10.0, p_hat=0.01, ci_lo=0.008, ci_hi=0.012, n=1000, method="crude", seed=1)
    table = estimates_table([report])
    assert list(table.columns) == ESTIMATE_COLUMNS
    assert table.loc[0, "p_hat"] == 0.01
