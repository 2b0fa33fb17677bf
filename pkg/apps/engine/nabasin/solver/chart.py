"""Numerical basin chart phi_n = g(n)^{-1} o h_{n+1} o f(n)."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from nabasin.core.errors import NotInBasin, ParameterError
from nabasin.families.sequence import AutoSequence
from nabasin.solver.conjugation import ConjugationSolution

log = logging.getLogger("chart")


@dataclass(frozen=True)
class ChartEstimate:
    point: np.ndarray
    n: int
    cauchy: float  # ||phi_n(z) - phi_{n+1}(z)||


def _pull_back(sol: ConjugationSolution, w: np.ndarray, n: int) -> np.ndarray:
    """g(n)^{-1}(h_{n+1}(w))."""
    v = sol.h_germ(n + 1).evaluate(w)
    for m in range(n, 0, -1):
        v = sol.g(m).inverse(v)
    return v


def chart_point(f: AutoSequence, sol: ConjugationSolution, z, n: int) -> np.ndarray:
    if not 0 <= n <= sol.window:
        raise ParameterError(f"chart time {n} outside 0..{sol.window}")
    w = np.asarray(z, dtype=complex)
    for m in range(1, n + 1):
        w = f[m].forward(w)
    return _pull_back(sol, w, n)


def basin_chart_estimate(
    f: AutoSequence,
    sol: ConjugationSolution,
    z,
    delta: float,
    maxiter: int,
) -> ChartEstimate:
    """phi_n(z) at the first n with ||f(n)(z)|| < delta, with the Cauchy difference to phi_{n+1}."""
    if delta <= 0:
        raise ParameterError(f"handoff radius must be positive, got {delta}")
    w = np.asarray(z, dtype=complex)
    for n in range(0, maxiter + 1):
        if np.linalg.norm(w) < delta:
            if n + 1 > sol.window:
                raise ParameterError(f"handoff at n={n} lies beyond the solved window {sol.window}")
            phi = _pull_back(sol, w, n)
            nxt = _pull_back(sol, f[n + 1].forward(w), n + 1)
            cauchy = float(np.linalg.norm(phi - nxt))
            log.debug("chart_handoff n=%d cauchy=%.3g", n, cauchy)
            return ChartEstimate(point=phi, n=n, cauchy=cauchy)
        if n < maxiter:
            w = f[n + 1].forward(w)
    raise NotInBasin(f"orbit did not enter B(0, {delta}) within {maxiter} steps")
