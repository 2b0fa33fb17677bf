from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from nabasin.core.config import get_settings
from nabasin.core.errors import HypothesisViolation, ParameterError
from nabasin.dynamics.filtration import FiltrationSpec, in_V_plus
from nabasin.families.bounds import AttractionEstimate, ball_samples, estimate_attraction_bounds
from nabasin.families.sequence import AutoSequence, block_compose

log = logging.getLogger("classify")

Tag = Literal["InBasin", "Escaping", "Undecided"]

IN_BASIN, UNDECIDED, ESCAPING = 0, 1, 2
_TAGS: tuple[Tag, ...] = ("InBasin", "Undecided", "Escaping")


@dataclass(frozen=True)
class Classification:
    tag: Tag
    n: int  # step of entry for InBasin/Escaping, maxiter for Undecided

    def __str__(self) -> str:
        return f"{self.tag}({self.n})"


def classify_batch(
    seq: AutoSequence,
    z,
    spec: FiltrationSpec,
    r_tilde: float,
    maxiter: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Codes (IN_BASIN / UNDECIDED / ESCAPING) and entry steps for points (k, P)."""
    maxiter = get_settings().MAXITER if maxiter is None else maxiter
    if maxiter < 0:
        raise ParameterError(f"maxiter must be >= 0, got {maxiter}")
    guard = get_settings().OVERFLOW
    w = np.array(z, dtype=complex).reshape(np.shape(z)[0], -1)
    P = w.shape[1]
    codes = np.full(P, UNDECIDED, dtype=np.uint8)
    steps = np.full(P, maxiter, dtype=np.int64)
    live = np.arange(P)
    for n in range(0, maxiter + 1):
        cur = w[:, live]
        basin = np.linalg.norm(cur, axis=0) < r_tilde
        codes[live[basin]] = IN_BASIN
        steps[live[basin]] = n
        escaping = ~basin & in_V_plus(cur, spec.R)
        codes[live[escaping]] = ESCAPING
        steps[live[escaping]] = n
        keep = ~(basin | escaping) & np.all(np.abs(cur) <= guard, axis=0)
        live = live[keep]
        if n == maxiter or live.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            w[:, live] = seq[n + 1].forward(w[:, live])
        finite = np.all(np.isfinite(w[:, live]), axis=0)
        live = live[finite]
    return codes, steps


def classify_point(
    seq: AutoSequence,
    z,
    spec: FiltrationSpec,
    r_tilde: float,
    maxiter: int | None = None,
) -> Classification:
    codes, steps = classify_batch(seq, np.asarray(z, dtype=complex)[:, None], spec, r_tilde, maxiter)
    return Classification(_TAGS[int(codes[0])], int(steps[0]))


@dataclass(frozen=True)
class AttractionCertificate:
    r_tilde: float
    block: int
    growth: float  # sampled sup of partial-block growth
    estimate: AttractionEstimate


def certify_attraction_radius(
    seq: AutoSequence,
    r: float,
    block: int = 1,
    samples: int = 64,
    horizon: int = 32,
    seed: int = 0,
) -> AttractionCertificate:
    """Radius r_tilde = r / growth such that any step landing in B(0, r_tilde) stays attracted.

    The l-blocked sequence must contract B(0, r); growth bounds how far partial
    blocks starting at any step can push a point before the next block boundary.
    """
    if r <= 0:
        raise ParameterError(f"attraction radius must be positive, got {r}")
    est = estimate_attraction_bounds(block_compose(seq, block), r, samples=samples, horizon=horizon, seed=seed)
    if not est.ok:
        raise HypothesisViolation(f"blocked sequence (block={block}) is not attracting on B(0, {r}): {est.reason}")

    growth = 1.0
    z = ball_samples(seq.k, r, samples, seed=seed)
    norms = np.linalg.norm(z, axis=0)
    for start in range(1, horizon * block + 1):
        w = z
        for length in range(1, block):
            w = seq[start + length - 1].forward(w)
            growth = max(growth, float(np.max(np.linalg.norm(w, axis=0) / norms)))
    r_tilde = r / growth
    log.info("attraction_certified block=%d r=%.6g growth=%.6g r_tilde=%.6g", block, r, growth, r_tilde)
    return AttractionCertificate(r_tilde=r_tilde, block=block, growth=growth, estimate=est)
