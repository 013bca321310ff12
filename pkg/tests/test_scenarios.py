"""
Tests for scenario schemas, scenario parsing and load-time checks.
"""

import json

import pytest
from pydantic import ValidationError

from app.exceptions import CapabilityError, ScenarioError
from app.region_geometry import DILATE_ERODE, LINE_CLIP, MEMBERSHIP, ORIGIN_GAP, Intersection, Union
from app.scenarios import (
    build_model,
    build_region,
    check_scenario,
    load_scenarios,
    parse_scenarios,
    required_capabilities,
)
from app.schemas import ModelSpec, RegionNode, Scenario, ScenarioFile

QUADRANT = {"box": {"lo": [1.0, 1.0], "hi": [None, None]}}


def _scenario(**overrides):
    raw = {"id": "s1", "task": "L", "model": {"alpha": 1.0, "example": "ex1"}, "region": QUADRANT, "params": {"k": 2}}
    raw.update(overrides)
    return raw


class TestRegionNode:
    def test_exactly_one_constructor(self):
        with pytest.raises(ValidationError):
            RegionNode.model_validate({"box": QUADRANT["box"], "halfspace": {"normal": [1, 0], "offset": 1}})
        with pytest.raises(ValidationError):
            RegionNode.model_validate({})

    def test_boolean_aliases(self):
        node = RegionNode.model_validate({"or": [QUADRANT, {"halfspace": {"normal": [0, 1], "offset": 3}}]})
        assert node.kind == "or"
        assert isinstance(build_region(node), Union)
        node = RegionNode.model_validate({"and": [QUADRANT]})
        assert isinstance(build_region(node), Intersection)

    def test_empty_union_is_rejected(self):
        with pytest.raises(ValidationError):
            RegionNode.model_validate({"or": []})

    def test_box_bounds_must_match(self):
        with pytest.raises(ValidationError):
            RegionNode.model_validate({"box": {"lo": [1.0], "hi": [None, None]}})

    def test_unknown_fields_are_forbidden(self):
        with pytest.raises(ValidationError):
            RegionNode.model_validate({"ball": {"center": [0, 0], "radius": 1, "colour": "red"}})
        with pytest.raises(ValidationError):
            RegionNode.model_validate({**QUADRANT, "note": "extra"})
        assert RegionNode.model_config["extra"] == "forbid"

    def test_field_names_work_beside_aliases(self):
        node = RegionNode.model_validate({"any_of": [QUADRANT, {"halfspace": {"normal": [0, 1], "offset": 3}}]})
        assert node.kind == "or"
        assert isinstance(build_region(node), Union)

    def test_difference_with_ball(self):
        node = RegionNode.model_validate({
            "difference_with_ball": {"region": {"example": {"name": "ex2"}}, "ball": {"center": [1, 1], "radius": 0.1}},
        })
        region = build_region(node)
        assert not region.contains([1.05, 0.95])
        assert region.contains([3.0, -2.0])


class TestModelSpec:
    def test_needs_exactly_one_source(self):
        with pytest.raises(ValidationError):
            ModelSpec.model_validate({"alpha": 1.0})
        with pytest.raises(ValidationError):
            ModelSpec.model_validate({"alpha": 1.0, "example": "ex1", "matrix": [[1.0]]})

    @pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValidationError):
            ModelSpec.model_validate({"alpha": alpha, "example": "ex1"})

    def test_matrix_model(self):
        model = build_model(ModelSpec.model_validate({"alpha": 0.5, "matrix": [[1.0, 0.0], [1.0, -1.0]]}))
        assert model.dimension == 2
        assert model.measure.pair_count == 2

    def test_isotropic_measure_needs_dimension(self):
        with pytest.raises(ScenarioError):
            build_model(ModelSpec.model_validate({"alpha": 1.0, "measure": {"isotropic_mass": 1.0}}))
        model = build_model(ModelSpec.model_validate({"alpha": 1.0, "measure": {"isotropic_mass": 1.0, "dimension": 3}}))
        assert model.dimension == 3

    def test_alpha_from_the_command_line(self):
        spec = ModelSpec.model_validate({"example": "ex1"})
        with pytest.raises(ScenarioError):
            build_model(spec)
        assert build_model(spec, alpha=1.5).alpha == 1.5


class TestScenarioSchema:
    def test_region_is_required_for_limit_tasks(self):
        with pytest.raises(ValidationError):
            Scenario.model_validate(_scenario(region=None))
        assert Scenario.model_validate(_scenario(task="dist", region=None)).region is None

    def test_ids_must_be_unique(self):
        with pytest.raises(ValidationError):
            ScenarioFile.model_validate({"scenarios": [_scenario(), _scenario()]})

    def test_grids_must_be_positive(self):
        with pytest.raises(ValidationError):
            Scenario.model_validate(_scenario(task="slope", params={"h_grid": [10.0, -1.0]}))

    @pytest.mark.parametrize(
        "task, method, expected",
        [
            ("L", None, [LINE_CLIP, ORIGIN_GAP]),
            ("L", "montecarlo", [MEMBERSHIP, ORIGIN_GAP]),
            ("bounds", None, [LINE_CLIP, ORIGIN_GAP, DILATE_ERODE]),
            ("estimate", "crude", [MEMBERSHIP]),
            ("estimate", "conditional", [LINE_CLIP]),
            ("dist", None, []),
        ],
    )
    def test_required_capabilities(self, task, method, expected):
        scenario = Scenario.model_validate(_scenario(task=task, params={"method": method} if method else {}))
        assert required_capabilities(scenario) == expected


class TestParsing:
    def test_single_object_and_list(self):
        assert len(parse_scenarios(json.dumps(_scenario()))) == 1
        text = json.dumps({"scenarios": [_scenario(), _scenario(id="s2")]})
        assert [s.id for s in parse_scenarios(text)] == ["s1", "s2"]

    def test_malformed_json_reports_position(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenarios('{"id": "s1",\n  "task": }', "bad.json")
        assert exc.value.line == 2
        assert "(line 2, column" in exc.value.message

    def test_validation_error_names_the_field(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenarios(json.dumps(_scenario(task="integrate")), "bad.json")
        assert exc.value.message.startswith("bad.json: scenarios.0.task")

    def test_load_checks_dimensions(self, tmp_path):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps(_scenario(model={"alpha": 0.5, "example": "ex3"})))
        with pytest.raises(ScenarioError):
            load_scenarios(path)

    def test_load_reports_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenarios(tmp_path / "missing.json")

    def test_unknown_example_is_a_scenario_error(self):
        scenario = Scenario.model_validate(_scenario(model={"alpha": 1.0, "example": "ex9"}))
        with pytest.raises(ScenarioError):
            check_scenario(scenario)

    def test_capability_gap_is_reported_at_load(self):
        cone = {"cone_arc": {"theta_lo": 0.0, "theta_hi": 4.7}}
        scenario = Scenario.model_validate(_scenario(region=cone))
        with pytest.raises(CapabilityError):
            check_scenario(scenario)

    def test_valid_file_loads(self, tmp_path):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps({"scenarios": [_scenario(), _scenario(id="s2", task="bounds", params={"k": 1})]}))
        assert len(load_scenarios(path)) == 2
