"""
Command-line tests: exit codes, stdout envelopes, stderr diagnostics and
report files.
"""

import json
import logging
import math

import pytest

from app.main import EXIT_ERROR, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(autouse=True)
def detach_log_handlers():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_stable_tails_handler", False):
            root.removeHandler(handler)
            handler.close()


def _json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


class TestDist:
    def test_tabulates_the_univariate_law(self, tmp_path, capsys):
        code = main(["dist", "--alpha", "1", "--x", "0,1", "--report-dir", str(tmp_path)])
        assert code == EXIT_OK
        envelope = _json_lines(capsys.readouterr().out)[-1]
        assert envelope["task"] == "dist"
        assert envelope["result"]["c_alpha"] == pytest.approx(2.0 / math.pi)
        table = (tmp_path / "dist.csv").read_text().splitlines()
        assert table[0].startswith("x,pdf,cdf,sf")
        assert len(table) == 3

    def test_needs_alpha(self, capsys):
        assert main(["dist"]) == EXIT_USAGE
        error = _json_lines(capsys.readouterr().err)[-1]
        assert error["error"] == "Scenario error"


class TestLimits:
    def test_single_atom_constant(self, tmp_path, capsys):
        code = main([
            "L", "--model", "ex1", "--region", "ex1_iii", "-k", "1", "--alpha", "1",
            "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        envelope = _json_lines(capsys.readouterr().out)[-1]
        assert envelope["result"]["L"]["value"] == pytest.approx(1.0 / math.pi)
        assert envelope["result"]["interior_order"]["k"] == 2
        assert (tmp_path / "L.json").exists()

    def test_malformed_region_json(self, capsys):
        code = main(["L", "--model", "ex1", "--region", '{"box": {"lo": [1, 1]', "--alpha", "1", "-k", "2"])
        assert code == EXIT_USAGE
        error = _json_lines(capsys.readouterr().err)[-1]
        assert "line 1" in error["message"]

    def test_region_touching_origin_is_a_domain_error(self, capsys):
        region = '{"halfspace": {"normal": [1, 0], "offset": 0}}'
        code = main(["L", "--model", "ex1", "--region", region, "--alpha", "1", "-k", "1"])
        assert code == EXIT_ERROR
        assert _json_lines(capsys.readouterr().err)[-1]["error"] == "Domain error"

    def test_bad_variant(self, capsys):
        code = main(["L", "--model", "ex1", "--region", "ex1_i", "--alpha", "1", "-k", "2", "--variant", "blurred"])
        assert code == EXIT_ERROR


class TestCharacteristicFunction:
    def test_empirical_matches_exact(self, tmp_path, capsys):
        code = main([
            "cf-check", "--model", "ex1", "--alpha", "1.5", "--n", "20000",
            "--theta", "[[1, 0], [0.5, 0.5]]", "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        result = _json_lines(capsys.readouterr().out)[-1]["result"]
        assert result["n"] == 20000
        assert result["max_abs_z"] < 5.0
        assert len((tmp_path / "cf-check.csv").read_text().splitlines()) == 3


class TestBounds:
    def test_half_plane_pair(self, tmp_path, capsys):
        code = main([
            "bounds", "--model", "ex1", "--region", "ex1_iii", "-k", "1", "--alpha", "1",
            "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        result = _json_lines(capsys.readouterr().out)[-1]["result"]
        assert result["lower"]["value"] == 0.0
        assert result["upper"]["value"] == pytest.approx(1.0 / math.pi, rel=1e-2)
        assert (tmp_path / "bounds.csv").read_text().startswith("delta,L,err")


class TestEstimation:
    QUADRANT_AT_100 = (math.atan(1.0 / 100.0) / math.pi) ** 2

    def test_estimate_single_scale(self, tmp_path, capsys):
        code = main([
            "estimate", "--model", "ex1", "--region", "ex1_i", "--alpha", "1",
            "--h", "100", "--n", "20000", "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        rows = _json_lines(capsys.readouterr().out)[-1]["result"]["estimates"]
        assert len(rows) == 1
        assert rows[0]["method"] == "conditional"
        assert rows[0]["p_hat"] == pytest.approx(self.QUADRANT_AT_100, rel=0.05)
        assert (tmp_path / "estimate.csv").exists()

    def test_probe_table(self, tmp_path, capsys):
        code = main([
            "probe", "--model", "ex1", "--region", "ex1_i", "--alpha", "1", "-k", "2",
            "--h-grid", "10,100", "--n", "5000", "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert _json_lines(capsys.readouterr().out)[-1]["result"]["rows"] == 2
        header = (tmp_path / "probe.csv").read_text().splitlines()[0]
        assert header.endswith("normalized")

    def test_slope_of_the_quadrant(self, tmp_path, capsys):
        code = main([
            "slope", "--model", "ex1", "--region", "ex1_i", "--alpha", "1",
            "--h-grid", "10,100,1000", "--n", "20000", "--report-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        slope = _json_lines(capsys.readouterr().out)[-1]["result"]["slope"]
        assert slope["exponent"] == pytest.approx(-2.0, abs=0.1)

    def test_estimate_needs_a_scale(self, capsys):
        code = main(["estimate", "--model", "ex1", "--region", "ex1_i", "--alpha", "1", "--n", "1000"])
        assert code == EXIT_ERROR


class TestPrecedence:
    def test_seed_flag_beats_scenario_file(self, tmp_path, capsys):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps({
            "id": "tail", "task": "dist", "model": {"alpha": 1.5, "example": "ex1"},
            "params": {"x_grid": [10.0], "seed": 5},
        }))
        assert main(["run", str(path), "--seed", "9", "--report-dir", str(tmp_path)]) == EXIT_OK
        assert _json_lines(capsys.readouterr().out)[-1]["seed"] == 9


class TestScenarioFiles:
    def test_run_writes_one_report_per_scenario(self, tmp_path, capsys):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps({"scenarios": [
            {"id": "tail", "task": "dist", "model": {"alpha": 1.5, "example": "ex1"}, "params": {"x_grid": [10.0]}},
            {"id": "half_plane", "task": "L", "model": {"alpha": 1.0, "example": "ex1"},
             "region": {"example": {"name": "ex1_iii"}}, "params": {"k": 1}},
        ]}))
        code = main(["run", str(path), "--report-dir", str(tmp_path / "out")])
        assert code == EXIT_OK
        assert [e["id"] for e in _json_lines(capsys.readouterr().out)] == ["tail", "half_plane"]
        assert (tmp_path / "out" / "tail.json").exists()
        assert (tmp_path / "out" / "half_plane.json").exists()

    def test_invalid_scenario_file(self, tmp_path, capsys):
        path = tmp_path / "scenarios.json"
        path.write_text('{"scenarios": [{"id": "x", "task": "L"}]}')
        assert main(["run", str(path)]) == EXIT_USAGE


class TestBank:
    def test_list_bank_json(self, capsys):
        assert main(["list-bank", "--json"]) == EXIT_OK
        listing = json.loads(capsys.readouterr().out)
        assert len(listing["entries"]) == 17

    def test_reproduce_needs_an_id_or_all(self, capsys):
        assert main(["reproduce"]) == EXIT_USAGE

    def test_reproduce_unknown_entry(self, capsys):
        assert main(["reproduce", "ex42"]) == EXIT_ERROR

    def test_reproduce_one_entry(self, tmp_path, capsys):
        code = main(["reproduce", "univariate_tail", "--n", "200000", "--report-dir", str(tmp_path)])
        assert code == EXIT_OK
        report = json.loads((tmp_path / "univariate_tail.json").read_text())
        assert report["passed"] is True
        assert report["seed"] == _json_lines(capsys.readouterr().out)[-1]["seed"]


class TestUsage:
    def test_unknown_subcommand_exits_with_usage_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["integrate"])
        assert exc.value.code == EXIT_USAGE
        assert _json_lines(capsys.readouterr().err)[-1]["error"] == "Usage error"

    def test_worker_count_is_validated(self, capsys):
        assert main(["dist", "--alpha", "1", "--workers", "0"]) == EXIT_USAGE
