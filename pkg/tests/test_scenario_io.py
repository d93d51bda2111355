import json

import pytest

from src.exceptions import ConfigError, ScenarioError
from src.noma.scenario_io import load_config, load_scenario, save_scenario, scenario_from_document, write_json
from src.optim.solver import SolverConfig
from tests.conftest import make_scenario

DOCUMENT = {
    "gains": [4e-9, 1e-9, 9e-9],
    "noise_power_mw": 1e-9,
    "p_max_mw": 16.0,
    "dc_bias": 20.0,
    "peak_intensity": 30.0,
    "pam_coefficient": 1.0,
}


def test_document_keeps_input_order(tmp_path):
    s = scenario_from_document(DOCUMENT)
    path = tmp_path / "scenario.json"
    save_scenario(s, str(path))
    saved = json.loads(path.read_text())
    assert saved["gains"] == DOCUMENT["gains"]
    assert load_scenario(str(path)) == s


def test_repeated_saves_are_byte_identical(tmp_path):
    s = make_scenario([3.3e-11, 1.7e-10, 2.9e-12])
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    save_scenario(s, str(first))
    save_scenario(load_scenario(str(first)), str(second))
    assert first.read_bytes() == second.read_bytes()


def test_unknown_key_names_the_field():
    with pytest.raises(ScenarioError) as info:
        scenario_from_document({**DOCUMENT, "gain_db": 3})
    assert info.value.field == "gain_db"


def test_missing_key_names_the_field():
    doc = dict(DOCUMENT)
    del doc["p_max_mw"]
    with pytest.raises(ScenarioError) as info:
        scenario_from_document(doc)
    assert info.value.field == "p_max_mw"


def test_bad_list_entry_names_the_index():
    with pytest.raises(ScenarioError) as info:
        scenario_from_document({**DOCUMENT, "gains": [1e-9, "x"]})
    assert info.value.field == "gains[1]"


def test_non_object_document():
    with pytest.raises(ScenarioError):
        scenario_from_document([1, 2, 3])


def test_malformed_and_missing_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{\"gains\": [1e-9,")
    with pytest.raises(ScenarioError, match="malformed JSON"):
        load_scenario(str(broken))
    with pytest.raises(ScenarioError, match="file not found"):
        load_scenario(str(tmp_path / "absent.json"))


def test_load_config(tmp_path):
    path = tmp_path / "solver.json"
    path.write_text(json.dumps({"barrier_mu": 20.0, "gap_tol": 1e-9}))
    cfg = load_config(SolverConfig, str(path))
    assert cfg.barrier_mu == 20.0 and cfg.gap_tol == 1e-9

    path.write_text(json.dumps({"barrier_mu": 20.0, "step": 1}))
    with pytest.raises(ConfigError) as info:
        load_config(SolverConfig, str(path))
    assert info.value.field == "step"


def test_non_finite_values_are_written_as_null(tmp_path):
    path = tmp_path / "report.json"
    write_json(str(path), {"objective": float("inf"), "gaps": (1.0, float("nan")), "status": "max_iterations"})
    text = path.read_text()
    assert "Infinity" not in text and "NaN" not in text
    assert json.loads(text) == {"objective": None, "gaps": [1.0, None], "status": "max_iterations"}
