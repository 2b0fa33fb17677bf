"""Empirical uniform-attraction constants A ||z|| <= ||f_n(z)|| <= B ||z||."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from nabasin.core.errors import NumericOverflow, ParameterError
from nabasin.families.sequence import AutoSequence, least_k0

log = logging.getLogger("bounds")

SHELLS = 4


@dataclass(frozen=True)
class AttractionEstimate:
    A_est: float
    B_est: float
    k0: int | None
    ok: bool
    reason: str = ""


def ball_samples(k: int, r: float, samples: int, seed: int = 0) -> np.ndarray:
    """Axis points and quasi-uniform sphere points at radii r 2^-j, j = 0..3; shape (k, P)."""
    rng = np.random.default_rng(seed)
    columns = []
    for j in range(SHELLS):
        radius = r * 2.0**-j
        columns.append(radius * np.eye(k, dtype=complex))
        raw = rng.standard_normal((k, samples)) + 1j * rng.standard_normal((k, samples))
        columns.append(radius * raw / np.linalg.norm(raw, axis=0))
    return np.concatenate(columns, axis=1)


def estimate_attraction_bounds(
    seq: AutoSequence,
    r: float,
    samples: int = 64,
    horizon: int = 32,
    seed: int = 0,
) -> AttractionEstimate:
    if r <= 0:
        raise ParameterError(f"sampling radius must be positive, got {r}")
    if samples < 1 or horizon < 1:
        raise ParameterError("samples and horizon must be >= 1")
    Z = ball_samples(seq.k, r, samples, seed)
    norms = np.linalg.norm(Z, axis=0)
    lo, hi = np.inf, 0.0
    for n in range(1, horizon + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            image = seq[n].forward(Z)
        if not np.all(np.isfinite(image)):
            raise NumericOverflow(f"sample image left the numeric range at n={n}")
        ratios = np.linalg.norm(image, axis=0) / norms
        lo = min(lo, float(ratios.min()))
        hi = max(hi, float(ratios.max()))

    if lo <= 0:
        result = AttractionEstimate(lo, hi, None, False, "A_est <= 0: some element is not injective near 0")
    elif hi >= 1:
        result = AttractionEstimate(lo, hi, None, False, f"B_est = {hi:.6g} >= 1: no uniform contraction")
    else:
        # lo == hi: any A below lo works, and B**2 < B
        k0 = least_k0(lo, hi) if lo < hi else 2
        result = AttractionEstimate(lo, hi, k0, True)
    log.info(
        "attraction_bounds A_est=%.6g B_est=%.6g k0=%s ok=%s", result.A_est, result.B_est, result.k0, result.ok
    )
    return result
