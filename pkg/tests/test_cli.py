"""Command line driver: exit codes, report layout, determinism."""

import csv
import json

import pytest

from halfosc import cli
from halfosc.cli import AnalysisConfig, main, run
from halfosc.errors import ConfigError

from conftest import EX31

EX32 = {
    "r1": {"kind": "powerlaw", "coef": 1.0, "exp": 2.0},
    "r2": {"kind": "powerlaw", "coef": 1.0, "exp": 1.0},
    "q": {"kind": "powerlaw", "coef": 2.0, "exp": 0.0},
    "sigma": {"kind": "proportional", "delta": 2.0},
    "alpha": "1", "beta": "1/3", "gamma": "1/3", "t0": 1.0,
}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def strip_timestamp(path):
    data = json.loads(open(path).read())
    data.pop("timestamp")
    return json.dumps(data, sort_keys=True)


def test_success_writes_report(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"equation": EX31})
    out = tmp_path / "r.json"
    assert main(["analyze", cfg, "--report", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["schema_version"] == cli.SCHEMA_VERSION
    assert report["property_A"] == {"verdict": "Satisfied", "granted_by": "T2_1"}
    assert "T2_1" in capsys.readouterr().err


def test_bare_equation_and_stdout(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", EX32)
    assert main(["analyze", cfg, "--criteria", "T2_1,E2_28"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [r["id"] for r in report["results"]] == ["E2_28", "T2_1"]


@pytest.mark.parametrize("raw", [
    {"equation": EX31, "bogus": 1},
    {"equation": EX31, "horizon": 5.0},
    {"equation": EX31, "grid_ratio": 3.0},
    {"equation": EX31, "tolerance": 0.5},
    {"equation": EX31, "criteria": "T9_9"},
    {"criteria": "all"},
])
def test_config_errors_exit_2(tmp_path, raw):
    assert main(["analyze", write(tmp_path, "c.json", raw)]) == cli.EXIT_CONFIG


def test_missing_and_malformed_files_exit_2(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", str(bad)]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("patch", [
    {"alpha": "2/3"},
    {"r1": {"kind": "powerlaw", "coef": 1.0, "exp": 0.5}},
    {"sigma": {"kind": "proportional", "delta": 0.5}},
])
def test_hypothesis_failures_exit_3_with_report(tmp_path, patch):
    out = tmp_path / "r.json"
    cfg = write(tmp_path, "c.json", {"equation": {**EX31, **patch}})
    assert main(["analyze", cfg, "--report", str(out)]) == cli.EXIT_HYPOTHESIS
    report = json.loads(out.read_text())
    assert report["error"]["stage"] == "hypotheses"


def test_cross_check_disagreement_exits_4(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "_disagreements", lambda a, b: ["E2_28/E2_28: closed form Satisfied, numeric NotSatisfied"])
    out = tmp_path / "r.json"
    cfg = write(tmp_path, "c.json", {"equation": EX32, "criteria": "E2_28"})
    assert main(["analyze", cfg, "--cross-check", "--report", str(out)]) == cli.EXIT_NUMERIC
    notes = json.loads(out.read_text())["discrepancy_notes"]
    assert notes[0].startswith("disagreement:")


def test_cross_check_clean_run(tmp_path):
    out = run(AnalysisConfig.from_dict({"equation": EX32, "criteria": "T2_5,T2_8", "cross_check": True}))
    assert out.exit_code == 0
    assert not any(n.startswith("disagreement") for n in out.report["discrepancy_notes"])
    assert any(n.startswith("reduction:") for n in out.report["discrepancy_notes"])


def test_reports_are_deterministic_apart_from_timestamp(tmp_path):
    cfg = write(tmp_path, "c.json", {"equation": EX32})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", cfg, "--report", str(a)]) == 0
    assert main(["analyze", cfg, "--report", str(b)]) == 0
    assert strip_timestamp(a) == strip_timestamp(b)
    assert a.read_bytes() != b"" and "elapsed_seconds" in json.loads(a.read_text())["timestamp"]


def test_csv_has_criterion_functions(tmp_path):
    cfg = write(tmp_path, "c.json", {"equation": EX32, "criteria": "T2_8"})
    out, table = tmp_path / "r.json", tmp_path / "f.csv"
    assert main(["analyze", cfg, "--report", str(out), "--csv", str(table)]) == 0
    rows = list(csv.DictReader(open(table)))
    assert rows and {"criterion", "t", "value"} == set(rows[0])
    assert {r["criterion"] for r in rows} >= {"E2_33"}


def test_horizon_from_environment(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", {"equation": EX32, "criteria": "E2_3"})
    out = tmp_path / "r.json"
    monkeypatch.setenv(cli.HORIZON_ENV, "5e4")
    assert main(["analyze", cfg, "--report", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["horizon"] == 5e4
    # the command line wins over the environment
    assert main(["analyze", cfg, "--horizon", "1e5", "--report", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["horizon"] == 1e5


def test_empty_criteria_list(tmp_path):
    out = run(AnalysisConfig.from_dict({"equation": EX32, "criteria": []}))
    assert out.exit_code == 0
    assert out.report["results"] == []
    assert out.report["property_A"]["verdict"] == "Inconclusive"


def test_criteria_expansion():
    cfg = AnalysisConfig.from_dict({"equation": EX32, "rho_choices": ["pi1"]})
    ids = [str(c) for c in cfg.criterion_ids()]
    assert "T2_10(rho=pi1)" in ids and "T2_12(rho=pi1)" in ids
    assert len(ids) == len(set(ids))
    cfg = AnalysisConfig.from_dict({"equation": EX32, "criteria": "E2_53(lambda=0.1,mu=0.2),T2_1"})
    assert [str(c) for c in cfg.criterion_ids()] == ["E2_53(lambda=0.1,mu=0.2)", "T2_1"]


def test_config_aliases():
    cfg = AnalysisConfig.from_dict({"equation": EX32, "tol": 1e-8, "margins": 0.05})
    assert cfg.tolerance == 1e-8 and cfg.margin == 0.05
    with pytest.raises(ConfigError):
        AnalysisConfig.from_dict([1, 2])
