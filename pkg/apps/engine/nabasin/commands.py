"""Command handlers: scenario in, artifacts and named checks out.

Each handler returns a CommandResult; cli.py turns it into summary.json and an
exit code, suite.py reads the same named checks.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from nabasin.core.config import get_settings
from nabasin.core.errors import ParameterError
from nabasin.core.types import Scenario, to_complex
from nabasin.data.artifacts import write_csv, write_json, write_pgm
from nabasin.dynamics.classify import ESCAPING, IN_BASIN, certify_attraction_radius, classify_batch
from nabasin.dynamics.filtration import FiltrationSpec, find_filtration_spec, sample_V_plus, verify_filtration
from nabasin.dynamics.green import (
    cauchy_rate_check,
    green_estimate,
    green_functional_check,
    green_trajectory,
)
from nabasin.dynamics.render import render_basin
from nabasin.families.bounds import ball_samples
from nabasin.families.factorize import henon_factorize_k2, shift_factorize
from nabasin.families.normalize import lower_triangular_normalize
from nabasin.families.registry import BuiltSequence, build_sequence
from nabasin.families.sequence import AutoSequence, block_compose
from nabasin.solver.conjugation import ConjugationSolution, residual_rows, solution_to_json, solve_conjugation

log = logging.getLogger("commands")

POINTWISE_TOL = 1e-10
GERM_TOL = 1e-12
FUNCTIONAL_TOL = 1e-6
RESIDUAL_TOL = 1e-9
DEFAULT_ATTRACTION_R = 0.05


@dataclass
class RunOptions:
    threads: Optional[int] = None


@dataclass
class CommandResult:
    details: dict[str, Any] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    def write_json(self, out: Path, name: str, payload: Any) -> None:
        self.artifacts.append(str(write_json(out / name, payload)))

    def write_csv(self, out: Path, name: str, rows: list[dict], columns: Optional[list[str]] = None) -> None:
        self.artifacts.append(str(write_csv(out / name, rows, columns)))

    def write_pgm(self, out: Path, name: str, image: np.ndarray) -> None:
        self.artifacts.append(str(write_pgm(out / name, image)))


# ---------------------------
# Shared pieces
# ---------------------------


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_json(M: np.ndarray) -> list[list[list[float]]]:
    return [[_pair(x) for x in row] for row in M]


def _horizon(sc: Scenario) -> int:
    return sc.solver.horizon or get_settings().HORIZON


def _maxiter(sc: Scenario) -> int:
    return sc.dynamics.maxiter if sc.dynamics.maxiter is not None else get_settings().MAXITER


def _tol(sc: Scenario) -> float:
    return sc.solver.tol or get_settings().TOL


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    num = np.linalg.norm(a - b, axis=0)
    den = np.maximum(np.linalg.norm(b, axis=0), 1e-300)
    return float(np.max(num / den))


def random_points(k: int, count: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    return scale * (rng.standard_normal((k, count)) + 1j * rng.standard_normal((k, count)))


def scenario_points(sc: Scenario, k: int) -> np.ndarray:
    pts = [[to_complex(c) for c in p] for p in sc.points]
    for idx, p in enumerate(pts):
        if len(p) != k:
            raise ParameterError(f"points.{idx} has {len(p)} coordinates, expected {k}")
    return np.array(pts, dtype=complex).T.reshape(k, len(pts))


def _require_perturbed(built: BuiltSequence, command: str) -> AutoSequence:
    if built.spec.family != "perturbed":
        raise ParameterError(f"{command} needs the 'perturbed' family, got '{built.spec.family}'")
    return built.seq


def solve_scenario(sc: Scenario) -> tuple[AutoSequence, ConjugationSolution]:
    f = lower_triangular_normalize(build_sequence(sc.sequence).seq)
    sol = solve_conjugation(f, k0=sc.solver.k0, horizon=sc.solver.horizon, tol=sc.solver.tol)
    return f, sol


def filtration_for(sc: Scenario, seq: AutoSequence) -> FiltrationSpec:
    return find_filtration_spec(seq, r_cap_exp=sc.dynamics.r_cap_exp, samples=sc.dynamics.samples, seed=sc.seed)


def attraction_radius(sc: Scenario, seq: AutoSequence) -> tuple[float, dict[str, Any]]:
    if sc.dynamics.r_tilde is not None:
        return sc.dynamics.r_tilde, {"r_tilde": sc.dynamics.r_tilde, "source": "scenario"}
    r = sc.sequence.bounds.r if sc.sequence.bounds is not None else DEFAULT_ATTRACTION_R
    block = sc.dynamics.block or seq.k
    cert = certify_attraction_radius(seq, r, block=block, seed=sc.seed)
    return cert.r_tilde, {
        "r_tilde": cert.r_tilde,
        "source": "certified",
        "r": r,
        "block": block,
        "growth": cert.growth,
        "A_est": cert.estimate.A_est,
        "B_est": cert.estimate.B_est,
    }


def interior_V_k(k: int, R: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points strictly inside V_R^k: |z_k| in [2R, 4R], the rest below 0.9 |z_k| / (k-1)."""
    t = R * rng.uniform(2.0, 4.0, count)
    z = (0.9 * t / (k - 1)) * np.sqrt(rng.random((k, count))) * np.exp(2j * np.pi * rng.random((k, count)))
    z[-1] = t * np.exp(2j * np.pi * rng.random(count))
    return z


# ---------------------------
# normalize
# ---------------------------


def run_normalize(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    built = build_sequence(sc.sequence)
    norm = lower_triangular_normalize(built.seq)
    N = _horizon(sc)
    k = built.seq.k
    res = CommandResult()
    rows, linear, unitary = [], [], []
    upper, unitary_defect = 0.0, 0.0
    for n in range(1, N + 1):
        L = norm.linear_part(n)
        V = norm.unitary(n)
        upper = max(upper, float(np.max(np.abs(np.triu(L, 1)), initial=0.0)))
        unitary_defect = max(unitary_defect, float(np.max(np.abs(V.conj().T @ V - np.eye(k)))))
        row = {"n": n}
        row.update({f"abs_u{i + 1}{i + 1}": float(abs(L[i, i])) for i in range(k)})
        rows.append(row)
        linear.append(_matrix_json(L))
        unitary.append(_matrix_json(V))

    res.checks["lower_triangular"] = upper == 0.0
    res.checks["unitary"] = unitary_defect <= 1e-12
    moduli = np.array([[r[f"abs_u{i + 1}{i + 1}"] for i in range(k)] for r in rows])
    if sc.sequence.bounds is not None:
        A, B = sc.sequence.bounds.A, sc.sequence.bounds.B
        res.checks["diagonal_in_bounds"] = bool(np.all((moduli >= A - 1e-9) & (moduli <= B + 1e-9)))

    # V_n unitary: orbit norms agree between the two sequences
    rng = np.random.default_rng(sc.seed)
    r = sc.sequence.bounds.r if sc.sequence.bounds is not None else DEFAULT_ATTRACTION_R
    z = random_points(k, 16, r / 4, rng)
    w_orig, w_norm, worst = z.copy(), z.copy(), 0.0
    for n in range(1, min(N, 10) + 1):
        w_orig = built.seq[n].forward(w_orig)
        w_norm = norm[n].forward(w_norm)
        a, b = np.linalg.norm(w_orig, axis=0), np.linalg.norm(w_norm, axis=0)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(a, 1e-300))))
    res.checks["orbit_norms_preserved"] = worst <= 1e-9

    res.details.update(
        {"horizon": N, "max_upper": upper, "unitary_defect": unitary_defect, "orbit_norm_defect": worst}
    )
    res.write_json(out, "normalize.json", {"linear": linear, "unitary": unitary})
    res.write_csv(out, "normalize.csv", rows)
    return res


# ---------------------------
# solve
# ---------------------------


def solve_checks(f: AutoSequence, sol: ConjugationSolution) -> dict[str, Any]:
    linear = 0.0
    shape = True
    for n in range(1, sol.horizon + 1):
        g = sol.g(n)
        linear = max(linear, float(np.max(np.abs(g.germ(1).linear_part() - f.linear_part(n)))))
        shape &= all(factor.P_full.degree <= sol.k0 for factor in g.factors)
        if sol.k >= 3:
            shape &= [factor.i for factor in g.factors] == list(range(1, sol.k + 1))
    return {"linear_defect": linear, "shape": shape}


def run_solve(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    started = time.perf_counter()
    f, sol = solve_scenario(sc)
    log.info("solve_run scenario=%s residual=%.3e secs=%.3f", sc.name, sol.residual, time.perf_counter() - started)
    extra = solve_checks(f, sol)
    res = CommandResult()
    res.checks["residual"] = sol.residual <= RESIDUAL_TOL
    res.checks["linear_parts"] = extra["linear_defect"] <= GERM_TOL
    res.checks["g_shape"] = bool(extra["shape"])
    res.details.update(
        {
            "k": sol.k,
            "k0": sol.k0,
            "horizon": sol.horizon,
            "tail_length": sol.tail,
            "residual": sol.residual,
            "bound_constant": sol.bound_constant,
            "h_bound": sol.h_bound,
            "top_degree_zero": list(sol.top_degree_zero),
            "linear_defect": extra["linear_defect"],
        }
    )
    res.write_json(out, "solution.json", solution_to_json(sol))
    res.write_csv(out, "residual.csv", residual_rows(sol), ["degree", "max_defect"])
    return res


def trivial_exactness(sol: ConjugationSolution, f: AutoSequence) -> dict[str, Any]:
    """Nonlinear coefficients of h and of every g-factor, and g - f on the window."""
    B = sol.basis
    nonlinear = np.concatenate([B.degree_indices(j) for j in range(2, sol.k0 + 1)])
    h_nonlinear = float(np.max(np.abs(sol.X[: sol.horizon + 1][:, :, nonlinear])))
    g_nonlinear = float(np.max(np.abs(sol.factor_poly[:, : sol.horizon][:, :, nonlinear])))
    g_vs_f = 0.0
    for n in range(1, sol.horizon + 1):
        g_vs_f = max(g_vs_f, sol.g(n).germ(sol.k0).max_abs_difference(f.germ(n, sol.k0)))
    return {"h_nonlinear": h_nonlinear, "g_nonlinear": g_nonlinear, "g_minus_f": g_vs_f}


# ---------------------------
# factorize
# ---------------------------


def perturbation_germ_defect(built: BuiltSequence, blocks: int = 4) -> float:
    """Max coefficient gap between blocked perturbed and unperturbed shifts up to order d - 2."""
    if built.base is None or built.spec.d is None:
        raise ParameterError("perturbation check needs the perturbed family")
    order = built.spec.d - 2
    k = built.seq.k
    pert, base = block_compose(built.seq, k), block_compose(built.base, k)
    worst = 0.0
    for n in range(1, blocks + 1):
        worst = max(worst, pert.germ(n, order).max_abs_difference(base.germ(n, order)))
    return worst


def factorization_errors(sol: ConjugationSolution, rng: np.random.Generator, count: int = 1000) -> tuple[float, list[dict]]:
    worst = 0.0
    rows = []
    for n in range(1, sol.horizon + 1):
        g = sol.g(n)
        Z = random_points(sol.k, count, 0.5, rng)
        ref = g.forward(Z)
        if sol.k == 2:
            params = sol.henon_parameters(n)
            h_odd, h_even = henon_factorize_k2(**vars(params), k0=sol.k0)
            got = h_odd.forward(h_even.forward(Z))
            factors = {
                "a": _pair(params.a),
                "c": _pair(params.c),
                "b": _pair(params.b),
                "p": params.p.to_json(),
                "q": params.q.to_json(),
            }
        else:
            shifts = shift_factorize(g)
            got = Z
            for s in shifts:
                got = s.forward(got)
            factors = {"shifts": [{"a": _pair(s.a), "p": s.p.to_json()} for s in shifts]}
        err = relative_error(got, ref)
        worst = max(worst, err)
        rows.append({"n": n, "relative_error": err, **factors})
    return worst, rows


def run_factorize(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    res = CommandResult()
    if sc.sequence.family == "perturbed":
        built = build_sequence(sc.sequence)
        defect = perturbation_germ_defect(built)
        res.checks["perturbation_germs"] = defect <= GERM_TOL
        res.details.update({"order": built.spec.d - 2, "germ_defect": defect})
        res.write_json(out, "factorize.json", res.details)
        return res

    f, sol = solve_scenario(sc)
    worst, rows = factorization_errors(sol, np.random.default_rng(sc.seed))
    name = "henon_pointwise" if sol.k == 2 else "shift_pointwise"
    res.checks[name] = worst <= POINTWISE_TOL
    res.details.update({"k": sol.k, "k0": sol.k0, "max_relative_error": worst})
    res.write_json(out, "factorize.json", {"k": sol.k, "k0": sol.k0, "factors": rows})
    res.write_csv(out, "factorize.csv", rows, ["n", "relative_error"])
    return res


# ---------------------------
# filtration
# ---------------------------


def run_filtration(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    built = build_sequence(sc.sequence)
    seq = _require_perturbed(built, "filtration")
    spec = filtration_for(sc, seq)
    samples = 10 * sc.dynamics.samples
    report = verify_filtration(seq, spec, samples=samples, seed=sc.seed + 1)
    doubled = verify_filtration(seq, spec.with_radius(2 * spec.R), samples=sc.dynamics.samples, seed=sc.seed + 2)
    res = CommandResult()
    for name in ("sandwich", "inclusion", "inverse_growth", "nesting"):
        res.checks[name] = report.violations.get(name, 0) == 0
    res.checks["doubling"] = doubled.ok
    res.details.update({"R": spec.R, "samples": samples, "violations": dict(report.violations)})
    res.write_json(
        out,
        "filtration.json",
        {
            "spec": spec.to_json(),
            "checked": report.checked,
            "violations": report.violations,
            "doubled": {"R": 2 * spec.R, "checked": doubled.checked, "violations": doubled.violations},
        },
    )
    return res


# ---------------------------
# green
# ---------------------------


def functional_residuals(
    sc: Scenario, seq: AutoSequence, spec: FiltrationSpec, periods: list[int], count: int = 100
) -> dict[int, float]:
    rng = np.random.default_rng(sc.seed + 3)
    out = {}
    for m in periods:
        pts = sample_V_plus(seq.k, spec.R, count, rng)
        out[m] = max(
            green_functional_check(seq, m, pts[:, j], spec, tol=_tol(sc), maxiter=_maxiter(sc))
            for j in range(count)
        )
    return out


def run_green(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    built = build_sequence(sc.sequence)
    seq = _require_perturbed(built, "green")
    spec = filtration_for(sc, seq)
    tol, maxiter = _tol(sc), _maxiter(sc)
    r_tilde = sc.dynamics.r_tilde or 0.0
    res = CommandResult()

    pts = scenario_points(sc, seq.k) if sc.points else sample_V_plus(seq.k, spec.R, 4, np.random.default_rng(sc.seed))
    estimates = []
    for j in range(pts.shape[1]):
        est = green_estimate(seq, pts[:, j], spec, tol=tol, maxiter=maxiter, r_tilde=r_tilde)
        estimates.append(
            {
                "point": [_pair(c) for c in pts[:, j]],
                "value": est.value,
                "iterations": est.iterations,
                "tail_bound": est.tail_bound,
                "status": est.status,
                "entry": est.entry,
            }
        )
    checked, bad, worst = cauchy_rate_check(seq, spec, samples=sc.dynamics.samples, seed=sc.seed)
    res.checks["cauchy_rate"] = bad == 0
    periods = [sc.dynamics.period] if sc.dynamics.period else [1, 2, 3]
    functional = functional_residuals(sc, seq, spec, periods)
    for m, value in functional.items():
        res.checks[f"functional_m{m}"] = value <= FUNCTIONAL_TOL

    res.details.update(
        {
            "R": spec.R,
            "Mtilde": spec.Mtilde,
            "cauchy_checked": checked,
            "cauchy_violations": bad,
            "cauchy_worst_ratio": worst,
            "functional": {str(m): v for m, v in functional.items()},
        }
    )
    res.write_json(out, "green.json", {"spec": spec.to_json(), "estimates": estimates, **res.details})
    rows = green_trajectory(seq, pts[:, 0], spec, tol=tol, maxiter=maxiter)
    res.write_csv(out, "green_trajectory.csv", rows, ["n", "norm_sup", "G", "tail"])
    return res


# ---------------------------
# classify / render
# ---------------------------


def run_classify(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    built = build_sequence(sc.sequence)
    seq = _require_perturbed(built, "classify")
    spec = filtration_for(sc, seq)
    r_tilde, radius_info = attraction_radius(sc, seq)
    maxiter = _maxiter(sc)
    rng = np.random.default_rng(sc.seed)
    res = CommandResult()

    ball = ball_samples(seq.k, 0.999 * r_tilde, 64, seed=sc.seed)
    codes, steps = classify_batch(seq, ball, spec, r_tilde, maxiter)
    res.checks["basin_ball"] = bool(np.all((codes == IN_BASIN) & (steps == 0)))
    region = interior_V_k(seq.k, spec.R, sc.dynamics.samples, rng)
    codes, steps = classify_batch(seq, region, spec, r_tilde, maxiter)
    res.checks["region_escaping"] = bool(np.all((codes == ESCAPING) & (steps == 0)))

    rows = []
    if sc.points:
        pts = scenario_points(sc, seq.k)
        codes, steps = classify_batch(seq, pts, spec, r_tilde, maxiter)
        tags = {0: "InBasin", 1: "Undecided", 2: "Escaping"}
        rows = [{"index": j, "tag": tags[int(c)], "n": int(s)} for j, (c, s) in enumerate(zip(codes, steps))]
    res.details.update({"R": spec.R, **radius_info})
    res.write_json(out, "classify.json", {"spec": spec.to_json(), "attraction": radius_info, "points": rows})
    res.write_csv(out, "classify.csv", rows, ["index", "tag", "n"])
    return res


def run_render(sc: Scenario, out: Path, opts: RunOptions) -> CommandResult:
    if sc.render is None:
        raise ParameterError("render needs a 'render' section")
    built = build_sequence(sc.sequence)
    seq = _require_perturbed(built, "render")
    spec = filtration_for(sc, seq)
    r_tilde, radius_info = attraction_radius(sc, seq)
    maxiter = _maxiter(sc)
    threads = opts.threads or get_settings().THREADS
    result = render_basin(seq, sc.render, spec, r_tilde, maxiter=maxiter, threads=threads)
    again = render_basin(seq, sc.render, spec, r_tilde, maxiter=maxiter, threads=1 if threads > 1 else 2)
    res = CommandResult()
    res.checks["deterministic"] = bool(
        np.array_equal(result.classes, again.classes) and np.array_equal(result.steps, again.steps)
    )
    res.write_pgm(out, "classes.pgm", result.classification_image())
    res.write_pgm(out, "escape_time.pgm", result.escape_time_image())
    res.details.update({"R": spec.R, "threads": threads, "counts": result.counts(), **radius_info})
    res.write_json(
        out,
        "render.json",
        {
            "window": sc.render.model_dump(),
            "R": spec.R,
            "r_tilde": r_tilde,
            "maxiter": maxiter,
            "counts": result.counts(),
            "gray": {"in_basin": 0, "undecided": 128, "escaping": 255},
        },
    )
    return res


HANDLERS: dict[str, Callable[[Scenario, Path, RunOptions], CommandResult]] = {
    "normalize": run_normalize,
    "solve": run_solve,
    "factorize": run_factorize,
    "filtration": run_filtration,
    "green": run_green,
    "classify": run_classify,
    "render": run_render,
}
