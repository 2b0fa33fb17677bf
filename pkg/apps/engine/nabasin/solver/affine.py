"""Bounded orbits of uniformly expanding affine recurrences z_{n+1} = beta_n z_n + gamma_n."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from nabasin.core.errors import ExpansionViolation, ParameterError

Stream = Union[Callable[[int], complex], np.ndarray, complex, float]


@dataclass(frozen=True)
class AffineRecurrence:
    """beta/gamma are callables n -> value, constants, or arrays indexed from n0."""

    beta: Stream
    gamma: Stream
    c: float
    C: float

    def __post_init__(self):
        if not self.c > 1:
            raise ExpansionViolation(f"expansion constant c must exceed 1, got {self.c}")
        if self.C < self.c:
            raise ParameterError(f"C={self.C} below c={self.c}")


def tail_length(c: float, C: float, tol: float) -> int:
    """T with C c^{-T} / (c - 1) <= tol."""
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    return max(1, math.ceil(math.log(C / ((c - 1.0) * tol)) / math.log(c)))


def _materialize(stream: Stream, start: int, stop: int) -> np.ndarray:
    """Values at n = start .. stop - 1."""
    if callable(stream):
        return np.array([stream(n) for n in range(start, stop)], dtype=complex)
    arr = np.asarray(stream, dtype=complex)
    if arr.ndim == 0:
        return np.full(stop - start, arr, dtype=complex)
    if arr.shape[0] < stop - start:
        raise ParameterError(f"stream has {arr.shape[0]} values, need {stop - start}")
    return arr[: stop - start]


def backward_orbit(beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """z_0 .. z_L from z_L = 0 and z_n = (z_{n+1} - gamma_n) / beta_n, L = len(beta).

    Trailing axes are independent recurrences.
    """
    L = beta.shape[0]
    z = np.zeros((L + 1,) + beta.shape[1:], dtype=complex)
    for n in range(L - 1, -1, -1):
        z[n] = (z[n + 1] - gamma[n]) / beta[n]
    return z


def bounded_affine_orbit(rec: AffineRecurrence, start: int, horizon: int, tol: float) -> np.ndarray:
    """z_start .. z_horizon of the bounded orbit.

    The tail past `horizon` is truncated after T steps; the resulting error
    at n <= horizon is at most C c^{-T} / (c - 1) <= tol.
    """
    if horizon < start:
        raise ParameterError(f"horizon {horizon} before start {start}")
    T = tail_length(rec.c, rec.C, tol)
    stop = horizon + T
    beta = _materialize(rec.beta, start, stop)
    gamma = _materialize(rec.gamma, start, stop)

    small = np.flatnonzero(np.abs(beta) <= 1.0)
    if small.size:
        n = start + int(small[0])
        raise ExpansionViolation(f"|beta_{n}| = {abs(beta[small[0]]):.6g} <= 1")
    if np.any(np.abs(beta) < rec.c * (1 - 1e-12)) or np.any(np.abs(beta) > rec.C * (1 + 1e-12)):
        raise ParameterError("beta leaves the declared band [c, C]")
    if np.any(np.abs(gamma) > rec.C * (1 + 1e-12)):
        raise ParameterError("gamma exceeds the declared bound C")

    z = backward_orbit(beta, gamma)
    return z[: horizon - start + 1]
