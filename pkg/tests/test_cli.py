import json
import os

import pytest

from kslab import reports
from kslab.cli import bundled_scenarios, main, resolve_scenario, run_scenario
from kslab.errors import ScenarioError
from kslab.scenario import CATALOG, catalog, default_scenario, validate

FAST_SCENARIOS = ["sine-identity", "cos-square-identity", "winding-oracle", "keldysh-n2", "krein-n3"]


def test_list_has_all_named_models(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("sine_family", "cos_square", "bi_expansion", "defect_half", "keldysh_n2", "krein_n3"):
        assert name in out


def test_list_json(capsys):
    assert main(["list", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["models"]) >= 6
    assert "sine-identity" in doc["scenarios"]


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_default_scenarios_validate_and_run(name, tmp_path):
    doc = default_scenario(name)
    validate(json.loads(json.dumps(doc)))
    code, summary = run_scenario(doc, str(tmp_path), log=lambda s: None)
    assert code == 0 and summary["status"] == "pass"


def test_catalog_entries_carry_parameters():
    entries = {e["name"]: e for e in catalog()}
    assert entries["krein_n3"]["params"] == {"alpha": 3.0, "truncation": 10000}


@pytest.mark.parametrize("name", bundled_scenarios())
def test_bundled_scenarios_validate_and_cite_criteria(name):
    doc = resolve_scenario(name)
    validate(doc)
    assert doc["expectations"]
    assert all(e["id"].startswith("AC-") for e in doc["expectations"])


@pytest.mark.parametrize("name", FAST_SCENARIOS)
def test_fast_bundled_scenarios_pass(name, tmp_path, capsys):
    assert main(["run", name, "--out", str(tmp_path)]) == 0
    assert "pass" in capsys.readouterr().out
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(c["passed"] for c in summary["expectations"])


def test_malformed_document_exit_1(tmp_path, capsys):
    bad = {"name": "bad", "model": {"example": "sine_family"},
           "analyses": [{"kind": "eval", "tol": -1.0}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["run", str(path)]) == 1
    assert "analyses" in capsys.readouterr().err


def test_unknown_example_is_a_validation_error():
    with pytest.raises(ScenarioError):
        validate({"name": "x", "model": {"example": "nope"}, "analyses": [{"kind": "eval"}]})


def test_json_syntax_error_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  "model": \n}\n')
    assert main(["run", str(path)]) == 1
    assert "line 4" in capsys.readouterr().err


def test_missing_scenario(capsys):
    assert main(["run", "no-such-scenario"]) == 1


def test_expectation_failure_exit_3(tmp_path):
    doc = resolve_scenario("sine-identity")
    doc["expectations"][0]["value"] = 1e-30
    code, summary = run_scenario(doc, str(tmp_path), log=lambda s: None)
    assert code == 3 and summary["status"] == "expectation-failure"


def test_pole_hit_exit_2(capsys):
    assert main(["eval", "--example", "sine_family", "--z", "0,0"]) == 2


def test_eval_output(capsys):
    assert main(["eval", "--example", "sine_family", "--z", "0.5,0.25", "--tol", "1e-12"]) == 0
    out = json.loads(capsys.readouterr().out)
    v = complex(*out["value"])
    ref = complex(*out["closed_form"])
    assert abs(v - ref) <= out["bound"] + 1e-12


def test_eval_negative_coordinates(capsys):
    assert main(["eval", "--example", "cos_square", "--z=-0.5,-0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["z"] == [-0.5, -0.5]


def test_determinism_across_threads(tmp_path):
    doc = resolve_scenario("winding-oracle")
    doc["analyses"].append({"kind": "eval", "name": "eval",
                            "sample": {"count": 8, "radius": 1.5, "clearance": 0.1}})
    # one eval against the single explicit pole, on seeded random points
    outs = []
    for threads, sub in ((1, "a"), (2, "b")):
        run_scenario(doc, str(tmp_path / sub), seed=7, threads=threads, log=lambda s: None)
        outs.append(sorted(os.listdir(tmp_path / sub)))
    assert outs[0] == outs[1] and "eval.eval.csv" in outs[0]
    for fname in outs[0]:
        if fname.endswith(".csv"):
            assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [(0.1, 1e-300, float("nan"), True), (-2.5, 3, 1 / 3, False)]
    reports.write_csv(str(path), ("a", "b", "c", "d"), rows)
    header, back = reports.read_csv(str(path))
    assert header == ["a", "b", "c", "d"]
    assert float(back[1][2]) == 1 / 3
    assert back[0][2] == "nan" and back[0][3] == "true"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    reports.write_json(str(tmp_path / "x.json"), {"b": 1, "a": [1.5, 2]})
    assert os.listdir(tmp_path) == ["x.json"]
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": [1.5, 2], "b": 1}
