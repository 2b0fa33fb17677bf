"""nabasin command line: one subcommand per pipeline stage plus the acceptance suite.

Precedence for every tunable: flag > scenario file > environment > default.
Exit codes: 0 all checks pass, 2 scenario/parameter error, 3 numeric failure
or failed check, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

from nabasin.commands import HANDLERS, CommandResult, RunOptions
from nabasin.core.config import get_settings
from nabasin.core.errors import (
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_SCHEMA,
    ArtifactError,
    ConvergenceError,
    NabasinError,
    ScenarioError,
)
from nabasin.core.logging import setup_logging
from nabasin.core.types import RunSummary, Scenario, parse_scenario
from nabasin.data.artifacts import write_csv, write_summary

log = logging.getLogger("cli")

COMMANDS = ("normalize", "solve", "factorize", "filtration", "green", "classify", "render", "suite")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nabasin",
        description="Germ conjugation and escape dynamics for sequences of polynomial automorphisms",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", type=Path, required=True, help="Scenario JSON (a directory for 'suite')")
    parser.add_argument("--out", type=Path, default=None, help="Artifact directory (default: scenario 'out' or NABASIN_OUT_DIR)")
    parser.add_argument("--tol", type=float, default=None, help="Residual / Green tolerance")
    parser.add_argument("--horizon", type=int, default=None, help="Solver horizon N")
    parser.add_argument("--seed", type=int, default=None, help="Seed for generated coefficients and sampling")
    parser.add_argument("--threads", type=int, default=None, help="Render worker threads (default NABASIN_THREADS)")
    parser.add_argument("--log-level", default=None, help="Logging level (default NABASIN_LOG_LEVEL)")
    return parser


def load_scenario(path: Path) -> Scenario:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ArtifactError(f"scenario not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    except OSError as exc:
        raise ArtifactError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ScenarioError("scenario must be a JSON object")
    return parse_scenario(payload)


def apply_overrides(sc: Scenario, args: argparse.Namespace) -> Scenario:
    solver: dict[str, Any] = {}
    if args.tol is not None:
        if args.tol <= 0:
            raise ScenarioError("must be positive", "solver.tol")
        solver["tol"] = args.tol
    if args.horizon is not None:
        if args.horizon < 1:
            raise ScenarioError("must be >= 1", "solver.horizon")
        solver["horizon"] = args.horizon
    update: dict[str, Any] = {}
    if solver:
        update["solver"] = sc.solver.model_copy(update=solver)
    if args.seed is not None:
        update["seed"] = args.seed
        if sc.sequence.seed is not None:
            update["sequence"] = sc.sequence.model_copy(update={"seed": args.seed})
    if args.out is not None:
        update["out"] = str(args.out)
    return sc.model_copy(update=update) if update else sc


def output_dir(sc: Scenario) -> Path:
    return Path(sc.out or get_settings().OUT_DIR)


def run_command(command: str, sc: Scenario, out: Path, opts: RunOptions) -> tuple[RunSummary, int]:
    """Run one handler; failures become a summary with the mapped exit code."""
    try:
        result: CommandResult = HANDLERS[command](sc, out, opts)
    except NabasinError as exc:
        details: dict[str, Any] = {"error": type(exc).__name__, "message": str(exc)}
        artifacts: list[str] = []
        if isinstance(exc, ConvergenceError) and exc.table:
            try:
                artifacts.append(str(write_csv(out / "diagnostics.csv", exc.table)))
            except ArtifactError:
                pass
        log.error("command_failed command=%s error=%s message=%s", command, type(exc).__name__, exc)
        summary = RunSummary(
            command=command,
            scenario=sc.name,
            status="error",
            exit_code=exc.exit_code,
            details=details,
            artifacts=artifacts,
        )
        return summary, exc.exit_code
    passed = all(result.checks.values())
    code = EXIT_OK if passed else EXIT_NUMERIC
    summary = RunSummary(
        command=command,
        scenario=sc.name,
        status="ok" if passed else "failed",
        exit_code=code,
        checks=result.checks,
        details=result.details,
        artifacts=result.artifacts,
    )
    return summary, code


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.LOG_LEVEL)
    opts = RunOptions(threads=args.threads)

    if args.command == "suite":
        from nabasin.suite import run_suite

        return run_suite(args.scenario, args, opts)

    try:
        sc = apply_overrides(load_scenario(args.scenario), args)
    except NabasinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    out = output_dir(sc)
    summary, code = run_command(args.command, sc, out, opts)
    try:
        write_summary(out, summary)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if code == EXIT_OK:
        print(f"{args.command}: {sc.name} ok, artifacts in {out}")
    else:
        failed = [name for name, ok in summary.checks.items() if not ok]
        reason = summary.details.get("message") or f"failed checks: {', '.join(failed)}"
        print(f"{args.command}: {sc.name} failed (exit {code}): {reason}", file=sys.stderr)
    return code


__all__ = ["EXIT_IO", "EXIT_NUMERIC", "EXIT_OK", "EXIT_SCHEMA", "build_parser", "main"]
