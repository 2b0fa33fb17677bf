"""Green's function G(z) = lim d^{-n} log+ ||S(n) z||_sup with certified tails.

Orbits are iterated in plain arithmetic until they enter V_R^+; from there on
points are carried as exp(s) * w with ||w||_sup = 1 so the tail can be driven
below any tolerance without overflow.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from nabasin.core.config import get_settings
from nabasin.core.errors import Inconclusive, ParameterError
from nabasin.dynamics.filtration import FiltrationSpec, in_V_plus, sample_V_plus
from nabasin.dynamics.orbits import sup_norm
from nabasin.families.sequence import AutoSequence, periodic_restriction

log = logging.getLogger("green")

Status = Literal["converged", "escaped-early", "hit-iteration-cap"]
_STATUS: tuple[Status, ...] = ("converged", "escaped-early", "hit-iteration-cap")
_PENDING = -1


@dataclass(frozen=True)
class ScaledPoint:
    """z = exp(log_scale) * direction, ||direction||_sup = 1 (or z = 0 with log_scale = -inf)."""

    log_scale: np.ndarray
    direction: np.ndarray

    @classmethod
    def from_point(cls, z) -> "ScaledPoint":
        z = np.asarray(z, dtype=complex)
        a = sup_norm(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(a)
            w = np.where(a > 0, z / np.where(a > 0, a, 1.0), 0.0)
        return cls(np.asarray(s, dtype=float), w)

    def to_point(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.log_scale) * self.direction

    def forward(self, m) -> "ScaledPoint":
        s, w = m.forward_scaled(self.log_scale, self.direction)
        return ScaledPoint(np.asarray(s, dtype=float), w)

    def in_V_plus(self, R: float) -> np.ndarray:
        return in_V_plus(self.direction, 0.0) & (self.log_scale >= math.log(R))


@dataclass(frozen=True)
class GreenEstimate:
    value: float
    iterations: int
    tail_bound: float
    status: Status
    entry: int | None = None


@dataclass(frozen=True)
class GreenBatch:
    values: np.ndarray
    iterations: np.ndarray
    tails: np.ndarray
    status: np.ndarray  # index into _STATUS
    entry: np.ndarray  # -1 when V_R^+ was never entered

    def __getitem__(self, i: int) -> GreenEstimate:
        e = int(self.entry[i])
        return GreenEstimate(
            value=float(self.values[i]),
            iterations=int(self.iterations[i]),
            tail_bound=float(self.tails[i]),
            status=_STATUS[int(self.status[i])],
            entry=None if e < 0 else e,
        )

    @property
    def converged(self) -> np.ndarray:
        return self.status == 0


def certified_steps(spec: FiltrationSpec, tol: float) -> int:
    """Least n >= 0 with spec.tail(n) <= tol."""
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    ratio = spec.Mtilde / ((spec.d - 1) * tol)
    return max(0, math.ceil(math.log(ratio) / math.log(spec.d))) if ratio > 1 else 0


def _as_scaled(z) -> ScaledPoint:
    if isinstance(z, ScaledPoint):
        s = np.atleast_1d(np.asarray(z.log_scale, dtype=float))
        w = np.asarray(z.direction, dtype=complex).reshape(z.direction.shape[0], -1)
        return ScaledPoint(s, w)
    z = np.asarray(z, dtype=complex)
    return ScaledPoint.from_point(z.reshape(z.shape[0], -1))


def _stop(status, values, iterations, s, idx, code: int, n: int, d: int) -> None:
    """Record the partial estimate G_n = log+ ||S(n) z|| / d^n."""
    status[idx] = code
    values[idx] = np.maximum(s[idx], 0.0) / float(d) ** n
    iterations[idx] = n


def green_batch(
    seq: AutoSequence,
    z,
    spec: FiltrationSpec,
    tol: float | None = None,
    maxiter: int | None = None,
    r_tilde: float = 0.0,
) -> GreenBatch:
    """Green estimates for a batch of points (k, P) or a ScaledPoint batch."""
    settings = get_settings()
    tol = settings.TOL if tol is None else tol
    maxiter = settings.MAXITER if maxiter is None else maxiter
    d = spec.d
    n_cert = certified_steps(spec, tol)
    log_guard = math.log(settings.OVERFLOW)

    sp = _as_scaled(z)
    s = sp.log_scale.copy()
    w = sp.direction.copy()
    P = s.shape[0]
    values = np.zeros(P)
    iterations = np.zeros(P, dtype=np.int64)
    status = np.full(P, _PENDING, dtype=np.int64)
    entry = np.full(P, -1, dtype=np.int64)

    # plain phase: until basin, region entry, overflow or the cap
    for n in range(0, maxiter + 1):
        pending = (status == _PENDING) & (entry < 0)
        if not pending.any():
            break
        idx = np.flatnonzero(pending)
        with np.errstate(over="ignore", invalid="ignore"):
            norm = np.exp(s[idx]) * np.linalg.norm(w[:, idx], axis=0)
        basin = (norm < r_tilde) | np.isneginf(s[idx])
        status[idx[basin]] = 0
        iterations[idx[basin]] = n
        idx = idx[~basin]
        region = ScaledPoint(s[idx], w[:, idx]).in_V_plus(spec.R)
        entry[idx[region]] = n
        idx = idx[~region]
        over = s[idx] > log_guard
        _stop(status, values, iterations, s, idx[over], 1, n, d)
        idx = idx[~over]
        if n == maxiter:
            _stop(status, values, iterations, s, idx, 2, n, d)
            continue
        if idx.size == 0:
            continue
        with np.errstate(over="ignore", invalid="ignore"):
            img = seq[n + 1].forward(np.exp(s[idx]) * w[:, idx])
        finite = np.all(np.isfinite(img), axis=0)
        _stop(status, values, iterations, s, idx[~finite], 1, n, d)
        nxt = ScaledPoint.from_point(img[:, finite])
        s[idx[finite]] = nxt.log_scale
        w[:, idx[finite]] = nxt.direction

    # scaled phase: from region entry up to the certified step
    entered = np.flatnonzero(entry >= 0)
    target = np.maximum(entry, n_cert)
    step = entry.copy()
    if entered.size:
        for m in range(int(entry[entered].min()), int(target[entered].max())):
            active = entered[(step[entered] == m) & (target[entered] > m)]
            if active.size == 0:
                continue
            s[active], w[:, active] = seq[m + 1].forward_scaled(s[active], w[:, active])
            step[active] = m + 1
        values[entered] = s[entered] / np.power(float(d), target[entered])
        iterations[entered] = target[entered]
        status[entered] = 0

    tails = np.where(entry >= 0, spec.Mtilde / (np.power(float(d), iterations) * (d - 1)), np.inf)
    tails = np.where((entry < 0) & (status == 0), 0.0, tails)
    return GreenBatch(values=values, iterations=iterations, tails=tails, status=status, entry=entry)


def green_estimate(
    seq: AutoSequence,
    z,
    spec: FiltrationSpec,
    tol: float | None = None,
    maxiter: int | None = None,
    r_tilde: float = 0.0,
) -> GreenEstimate:
    if isinstance(z, ScaledPoint):
        point = z
    else:
        point = np.asarray(z, dtype=complex)[:, None]
    return green_batch(seq, point, spec, tol=tol, maxiter=maxiter, r_tilde=r_tilde)[0]


def _format_norm(s: float) -> str:
    if not math.isfinite(s):
        return "0" if s < 0 else "inf"
    exp10 = s / math.log(10)
    e = math.floor(exp10)
    return f"{10 ** (exp10 - e):.12f}e{e:+d}"


def green_trajectory(
    seq: AutoSequence,
    z,
    spec: FiltrationSpec,
    tol: float | None = None,
    maxiter: int | None = None,
) -> list[dict]:
    """Per-step rows (n, ||S(n)z||_sup, G_n, tail) up to the certified step."""
    settings = get_settings()
    tol = settings.TOL if tol is None else tol
    maxiter = settings.MAXITER if maxiter is None else maxiter
    d = spec.d
    n_cert = certified_steps(spec, tol)
    sp = ScaledPoint.from_point(np.asarray(z, dtype=complex)[:, None])
    rows: list[dict] = []
    entry = None
    n = 0
    while True:
        s = float(sp.log_scale[0])
        if entry is None and bool(sp.in_V_plus(spec.R)[0]):
            entry = n
        rows.append(
            {
                "n": n,
                "norm_sup": _format_norm(s),
                "G": max(s, 0.0) / float(d) ** n if math.isfinite(s) else 0.0,
                "tail": spec.tail(n) if entry is not None else "",
            }
        )
        done = n >= n_cert if entry is not None else n >= maxiter
        if done or not math.isfinite(s):
            return rows
        if entry is None:
            with np.errstate(over="ignore", invalid="ignore"):
                img = seq[n + 1].forward(sp.to_point())
            if not np.all(np.isfinite(img)):
                return rows
            sp = ScaledPoint.from_point(img)
        else:
            sp = sp.forward(seq[n + 1])
        n += 1


def cauchy_rate_check(
    seq: AutoSequence,
    spec: FiltrationSpec,
    samples: int = 1000,
    steps: int = 24,
    seed: int = 0,
) -> tuple[int, int, float]:
    """Count steps along V_R^+ trajectories where |G_n - G_{n+1}| exceeds Mtilde / d^{n+1}.

    Returns (checked, violations, worst ratio of the defect to its bound).
    """
    rng = np.random.default_rng(seed)
    sp = ScaledPoint.from_point(sample_V_plus(spec.k, spec.R, samples, rng))
    s, w = sp.log_scale, sp.direction
    d = float(spec.d)
    checked = bad = 0
    worst = 0.0
    for n in range(steps):
        s_next, w = seq[n + 1].forward_scaled(s, w)
        # |G_n - G_{n+1}| d^{n+1} = |s_{n+1} - d s_n|
        defect = np.abs(s_next - d * s)
        ratio = defect / spec.Mtilde
        checked += samples
        bad += int(np.count_nonzero(ratio > 1 + 1e-9))
        worst = max(worst, float(ratio.max()))
        s = s_next
    log.debug("cauchy_rate checked=%d violations=%d worst=%.4g", checked, bad, worst)
    return checked, bad, worst


def green_functional_check(
    seq: AutoSequence,
    m: int,
    z,
    spec: FiltrationSpec,
    tol: float | None = None,
    maxiter: int | None = None,
    r_tilde: float = 0.0,
) -> float:
    """|G_m(S(m) z) - d^m G_m(z)| / max(1, d^m G_m(z)) for the m-periodic restriction."""
    per = periodic_restriction(seq, m)
    z = np.asarray(z, dtype=complex)
    image = ScaledPoint.from_point(z[:, None])
    for j in range(1, m + 1):
        image = image.forward(per[j])
    left = green_estimate(per, image, spec, tol=tol, maxiter=maxiter, r_tilde=r_tilde)
    right = green_estimate(per, z, spec, tol=tol, maxiter=maxiter, r_tilde=r_tilde)
    for name, est in (("G(S(m) z)", left), ("G(z)", right)):
        if est.status != "converged":
            raise Inconclusive(f"{name} ended with status {est.status}")
    scaled = float(spec.d) ** m * right.value
    return abs(left.value - scaled) / max(1.0, scaled)


