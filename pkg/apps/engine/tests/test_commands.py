import json

from nabasin.cli import load_scenario
from nabasin.commands import (
    RunOptions,
    run_classify,
    run_factorize,
    run_green,
    run_normalize,
    run_render,
    run_solve,
)

from conftest import SCENARIOS


def scenario(name: str, **dynamics):
    sc = load_scenario(SCENARIOS / name)
    if dynamics:
        sc = sc.model_copy(update={"dynamics": sc.dynamics.model_copy(update=dynamics)})
    return sc


def test_normalize_rotated_triangular(tmp_path):
    res = run_normalize(scenario("k3_golden.json"), tmp_path, RunOptions())
    assert all(res.checks.values()), res.details
    assert (tmp_path / "normalize.csv").read_text().startswith("n,abs_u11,abs_u22,abs_u33\n")


def test_factorize_perturbed_germs(tmp_path):
    res = run_factorize(scenario("perturbed_k3_d4.json"), tmp_path, RunOptions())
    assert res.checks == {"perturbation_germs": True}
    assert res.details["order"] == 2


def test_classify_points(tmp_path):
    res = run_classify(scenario("perturbed_k3_d4.json", samples=100), tmp_path, RunOptions())
    assert res.checks == {"basin_ball": True, "region_escaping": True}
    lines = (tmp_path / "classify.csv").read_text().splitlines()
    assert lines[0] == "index,tag,n"
    assert lines[2].startswith("1,Escaping,")


def test_green_command(tmp_path):
    res = run_green(scenario("perturbed_k3_d4.json", samples=100, period=1), tmp_path, RunOptions())
    assert res.checks == {"cauchy_rate": True, "functional_m1": True}
    payload = json.loads((tmp_path / "green.json").read_text())
    assert len(payload["estimates"]) == 3
    assert payload["estimates"][1]["status"] == "converged"


def test_render_images(tmp_path):
    res = run_render(scenario("perturbed_k3_d4.json", samples=100, maxiter=30), tmp_path, RunOptions(threads=2))
    assert res.checks["deterministic"]
    assert (tmp_path / "classes.pgm").read_bytes().startswith(b"P5\n48 48\n255\n")
    assert (tmp_path / "escape_time.pgm").exists()


def test_solve_artifacts_are_identical_across_reruns(tmp_path):
    sc = scenario("k2_triangular.json")
    first = run_solve(sc, tmp_path / "a", RunOptions())
    second = run_solve(sc, tmp_path / "b", RunOptions())
    assert all(first.checks.values()), first.details
    assert "seconds" not in first.details
    assert first.details == second.details
    for name in ("solution.json", "residual.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_solve_residual_check_uses_acceptance_tolerance(tmp_path):
    sc = scenario("k2_triangular.json")
    loose = sc.model_copy(update={"solver": sc.solver.model_copy(update={"tol": 1e-6})})
    res = run_solve(loose, tmp_path, RunOptions())
    assert res.checks["residual"] == (res.details["residual"] <= 1e-9)
