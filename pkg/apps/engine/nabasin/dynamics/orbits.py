from __future__ import annotations

from typing import Literal

import numpy as np

from nabasin.core.errors import EscapedToInfinity, ParameterError
from nabasin.families.sequence import AutoSequence

Direction = Literal["forward", "inverse"]


def sup_norm(z) -> np.ndarray:
    return np.max(np.abs(np.asarray(z)), axis=0)


def _finite(w: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(w)))


def orbit(seq: AutoSequence, z, n: int, direction: Direction = "forward") -> list[np.ndarray]:
    """[S(0) z, S(1) z, ..., S(n) z], or the preimages S(m)^{-1} z for direction="inverse".

    S(m) = S_m o ... o S_1. Overflow raises EscapedToInfinity with the finite prefix.
    """
    if n < 0:
        raise ParameterError(f"orbit length must be >= 0, got {n}")
    z = np.asarray(z, dtype=complex)
    points = [z]
    if direction == "forward":
        w = z
        for m in range(1, n + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                w = seq[m].forward(w)
            if not _finite(w):
                raise EscapedToInfinity(m - 1, points)
            points.append(w)
        return points
    if direction == "inverse":
        for m in range(1, n + 1):
            w = z
            with np.errstate(over="ignore", invalid="ignore"):
                for j in range(m, 0, -1):
                    w = seq[j].inverse(w)
            if not _finite(w):
                raise EscapedToInfinity(m - 1, points)
            points.append(w)
        return points
    raise ParameterError(f"unknown direction {direction!r}")
