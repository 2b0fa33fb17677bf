import json
import shutil
from pathlib import Path

import pytest

from nabasin.cli import build_parser, load_scenario
from nabasin.commands import RunOptions
from nabasin.suite import (
    CHECKS,
    check_affine_orbit,
    check_conjugation_k2,
    check_conjugation_k3,
    check_golden_orderings,
    run_suite,
    scenario_files,
)

from conftest import SCENARIOS


@pytest.fixture
def orderings():
    return load_scenario(SCENARIOS / "orderings_affine.json")


def suite_args(pack: Path, out: Path):
    return build_parser().parse_args(["suite", "--scenario", str(pack), "--out", str(out)])


def test_checks_cover_every_criterion():
    assert sorted(criterion for criterion, _ in CHECKS.values()) == list(range(1, 11))


def test_golden_orderings(orderings, tmp_path):
    passed, details = check_golden_orderings(orderings, tmp_path, RunOptions())
    assert passed, details["results"]


def test_affine_orbit(orderings, tmp_path):
    passed, details = check_affine_orbit(orderings, tmp_path, RunOptions())
    assert passed
    assert details["recurrence_defect"] <= 1e-12
    assert max(details["closed_forms"].values()) <= 1e-12


def test_run_suite_writes_reports(tmp_path, capsys):
    pack = tmp_path / "pack"
    pack.mkdir()
    shutil.copy(SCENARIOS / "orderings_affine.json", pack)
    out = tmp_path / "out"
    assert run_suite(pack, suite_args(pack, out), RunOptions()) == 0
    report = json.loads((out / "suite.json").read_text())
    assert set(report["criteria"]) == {"3", "4"}
    assert all(c["passed"] for c in report["criteria"].values())
    assert json.loads((out / "summary.json").read_text())["command"] == "suite"
    assert "2/2 checks passed" in capsys.readouterr().out


def test_selected_checks_only(tmp_path, monkeypatch):
    monkeypatch.setenv("NABASIN_SUITE_CHECKS", "golden_orderings")
    pack = tmp_path / "pack"
    pack.mkdir()
    shutil.copy(SCENARIOS / "orderings_affine.json", pack)
    out = tmp_path / "out"
    assert run_suite(pack, suite_args(pack, out), RunOptions()) == 0
    report = json.loads((out / "suite.json").read_text())
    assert [r["check"] for r in report["results"]] == ["golden_orderings"]


def test_invalid_scenario_in_pack(tmp_path):
    pack = tmp_path / "pack"
    pack.mkdir()
    shutil.copy(SCENARIOS / "orderings_affine.json", pack)
    (pack / "broken.json").write_text(json.dumps({"sequence": {"family": "custom"}}))
    out = tmp_path / "out"
    assert run_suite(pack, suite_args(pack, out), RunOptions()) == 2
    rows = (out / "suite.csv").read_text().splitlines()
    assert rows[0] == "criterion,check,scenario,passed,error"
    assert any(row.startswith(",,broken.json,False") for row in rows)


def test_scenario_files(tmp_path):
    (tmp_path / "b.json").write_text("{}")
    (tmp_path / "a.json").write_text("{}")
    (tmp_path / "notes.txt").write_text("")
    assert [p.name for p in scenario_files(tmp_path)] == ["a.json", "b.json"]
    assert scenario_files(tmp_path / "a.json") == [tmp_path / "a.json"]


def test_conjugation_k2_csv_is_reproducible(tmp_path):
    sc = load_scenario(SCENARIOS / "k2_triangular.json")
    passed, details = check_conjugation_k2(sc, tmp_path / "a", RunOptions())
    check_conjugation_k2(sc, tmp_path / "b", RunOptions())
    assert passed
    assert len(details["trials"]) == 10
    first = (tmp_path / "a" / "conjugation_k2.csv").read_bytes()
    assert first == (tmp_path / "b" / "conjugation_k2.csv").read_bytes()
    assert first.splitlines()[0] == b"seed,k0,residual,linear_defect"


def test_conjugation_k3_needs_twenty_steps(tmp_path):
    sc = load_scenario(SCENARIOS / "k3_golden.json")
    assert sc.solver.horizon >= 20
    short = sc.model_copy(update={"solver": sc.solver.model_copy(update={"horizon": 4})})
    passed, details = check_conjugation_k3(short, tmp_path, RunOptions())
    assert details["covers_horizon"] is False
    assert not passed
