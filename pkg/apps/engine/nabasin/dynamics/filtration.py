"""Filtration regions for perturbed weak-shift sequences and the radius search.

V_R^i   = {|z_i| >= max((k-1)|z_j| for j != i, R)}
V_R^+   = union of V_R^i for i = 2..k
V_R^-   = V_R^1
W_R^-   = {(k-1)|z_1| >= max(|z_2|, ..., |z_k|, R)}

All predicates take points with the coordinate axis first and return boolean
arrays over the trailing axes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from nabasin.core.config import get_settings
from nabasin.core.errors import ParameterError, SearchFailure
from nabasin.families.maps import PerturbedWeakShift
from nabasin.families.sequence import AutoSequence, ShiftFamilyBounds, family_bounds_from_maps

log = logging.getLogger("filtration")

EPS = 1e-3
SLACK = 1e-9


# ---------------------------
# Region predicates
# ---------------------------


def in_V(z, i: int, R: float) -> np.ndarray:
    """Membership in V_R^i (1-based i)."""
    a = np.abs(np.asarray(z))
    k = a.shape[0]
    if not 1 <= i <= k:
        raise ParameterError(f"coordinate {i} outside 1..{k}")
    others = np.delete(a, i - 1, axis=0)
    bound = np.maximum((k - 1) * others.max(axis=0), R) if k > 1 else np.full(a.shape[1:], R)
    return a[i - 1] >= bound


def in_V_plus(z, R: float) -> np.ndarray:
    k = np.asarray(z).shape[0]
    out = in_V(z, 2, R)
    for i in range(3, k + 1):
        out = out | in_V(z, i, R)
    return out


def in_V_minus(z, R: float) -> np.ndarray:
    return in_V(z, 1, R)


def in_W_minus(z, R: float) -> np.ndarray:
    a = np.abs(np.asarray(z))
    k = a.shape[0]
    return (k - 1) * a[0] >= np.maximum(a[1:].max(axis=0), R)


# ---------------------------
# Spec and analytic constants
# ---------------------------


@dataclass(frozen=True)
class FiltrationSpec:
    k: int
    d: int
    R: float
    m_const: float
    M_const: float
    Mtilde: float
    inverse_lower: float
    inverse_upper: float
    family: ShiftFamilyBounds

    def __post_init__(self):
        if not 0 < self.m_const < 1 < self.M_const:
            raise ParameterError(f"need 0 < m < 1 < M, got m={self.m_const}, M={self.M_const}")
        if not self.R > 1:
            raise ParameterError(f"filtration radius must exceed 1, got {self.R}")

    def with_radius(self, R: float) -> "FiltrationSpec":
        return build_spec(self.k, self.d, R, self.family)

    def tail(self, n: int) -> float:
        """sum_{i > n} Mtilde / d^i."""
        return self.Mtilde / (self.d**n * (self.d - 1))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "d": self.d,
            "R": self.R,
            "m": self.m_const,
            "M": self.M_const,
            "Mtilde": self.Mtilde,
            "inverse_lower": self.inverse_lower,
            "inverse_upper": self.inverse_upper,
            "family": {
                "m_tilde": self.family.m_tilde,
                "M_tilde": self.family.M_tilde,
                "d_tilde": self.family.d_tilde,
                "m0": self.family.m0,
            },
        }


def _inverse_constants(k: int, d: int, R: float, fam: ShiftFamilyBounds) -> tuple[float, float]:
    """Bounds on |pi_1 S_n^{-1}(z)| / |z_1|^{d^2-d} over V_R^-, computed in logs."""
    D = d * d - d
    L = math.log(R)
    lead = R ** (2 - d) / (k - 1)
    rest = math.exp(L - D * L) / (k - 1)
    rest += (k - 2) * math.exp(d * L - D * L)
    log_arg = (d - 1) * L + math.log1p(R ** (2 - d))
    rest += fam.M_tilde * fam.m0 * math.exp(fam.d_tilde * log_arg - D * L)
    lower = ((1 - lead) ** d - rest) / fam.M_tilde
    upper = ((1 + lead) ** d + rest) / fam.m_tilde
    return lower, upper


def _conditions(k: int, d: int, R: float, fam: ShiftFamilyBounds, m: float, M: float) -> dict[str, bool]:
    margin = (k - 2) / (k - 1) ** d
    coupling = fam.M_tilde * (fam.m0 + 1) / R**2
    lower, _ = _inverse_constants(k, d, R, fam)
    return {
        "dominance": 1 - margin - coupling >= m,
        "upper": 1 + margin + coupling <= M,
        "inclusion": m * R**d >= (k - 1) * (R + R ** (d - 1)) and m * R**d >= R**2,
        "inverse_growth": lower > 0,
    }


def build_spec(k: int, d: int, R: float, fam: ShiftFamilyBounds) -> FiltrationSpec:
    m = 1.0 / (k - 1) - EPS
    M = (k - 1) + EPS
    lower, upper = _inverse_constants(k, d, R, fam)
    Mtilde = max(abs(math.log(m)), abs(math.log(M)), abs(math.log(fam.M_tilde * (fam.m0 + d))))
    return FiltrationSpec(
        k=k,
        d=d,
        R=R,
        m_const=m,
        M_const=M,
        Mtilde=Mtilde,
        inverse_lower=lower,
        inverse_upper=upper,
        family=fam,
    )


# ---------------------------
# Samplers
# ---------------------------


def _phases(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(shape))


def sample_dominant(k: int, i: int | np.ndarray, R: float, count: int, rng: np.random.Generator, spread: float = 4.0) -> np.ndarray:
    """Points of V_R^i with |z_i| in [R, spread R]; the first k-th of them on the boundary."""
    idx = np.broadcast_to(np.asarray(i), (count,)) - 1
    t = R * np.exp(rng.random(count) * math.log(spread))
    radii = t / (k - 1) * np.sqrt(rng.random((k, count)))
    n_edge = max(1, count // k)
    t[:n_edge] = R
    radii[:, :n_edge] = R / (k - 1)
    z = radii * _phases(rng, (k, count))
    cols = np.arange(count)
    z[idx, cols] = t * _phases(rng, count)
    return z


def sample_V_plus(k: int, R: float, count: int, rng: np.random.Generator) -> np.ndarray:
    return sample_dominant(k, rng.integers(2, k + 1, size=count), R, count, rng)


def sample_V_minus(k: int, R: float, count: int, rng: np.random.Generator) -> np.ndarray:
    return sample_dominant(k, 1, R, count, rng, spread=2.0)


def sample_box(k: int, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    scale = radius * 2.0 ** rng.integers(-2, 3, size=count)
    return scale * (rng.uniform(-1, 1, (k, count)) + 1j * rng.uniform(-1, 1, (k, count)))


# ---------------------------
# Verification and search
# ---------------------------


@dataclass
class FiltrationReport:
    checked: dict[str, int] = field(default_factory=dict)
    violations: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def first_violation(self) -> Optional[str]:
        for name, count in self.violations.items():
            if count:
                return name
        return None

    def add(self, name: str, checked: int, bad: int) -> None:
        self.checked[name] = self.checked.get(name, 0) + int(checked)
        self.violations[name] = self.violations.get(name, 0) + int(bad)


def verify_filtration(
    seq: AutoSequence,
    spec: FiltrationSpec,
    samples: int = 1000,
    horizon: int = 4,
    seed: int = 0,
) -> FiltrationReport:
    """Check sandwich, inclusion, inverse growth and nesting at deterministic samples for n = 1..horizon."""
    rng = np.random.default_rng(seed)
    k, d, R = spec.k, spec.d, spec.R
    report = FiltrationReport()
    plus = sample_V_plus(k, R, samples, rng)
    minus = sample_V_minus(k, R, samples, rng)
    box = sample_box(k, R, samples, rng)
    t_plus = np.max(np.abs(plus), axis=0)
    t_minus = np.abs(minus[0])
    D = d * d - d

    for n in range(1, horizon + 1):
        S = seq[n]
        with np.errstate(over="ignore", invalid="ignore"):
            img = S.forward(plus)
        a = np.abs(img)
        lead = a[-1]
        ratio = lead / t_plus**d
        sandwich_bad = (
            (ratio < spec.m_const * (1 - SLACK))
            | (ratio > spec.M_const * (1 + SLACK))
            | (lead < a[:-1].max(axis=0) * (1 - SLACK))
        )
        report.add("sandwich", samples, np.count_nonzero(sandwich_bad))
        bound = np.maximum((k - 1) * a[:-1].max(axis=0), R * R)
        report.add("inclusion", samples, np.count_nonzero(lead < bound * (1 - SLACK)))

        with np.errstate(over="ignore", invalid="ignore"):
            pre = S.inverse(minus)
            inv_ratio = np.abs(pre[0]) / t_minus**D
        finite = np.isfinite(inv_ratio)
        inv_bad = finite & (
            (inv_ratio < spec.inverse_lower * (1 - SLACK)) | (inv_ratio > spec.inverse_upper * (1 + SLACK))
        )
        report.add("inverse_growth", np.count_nonzero(finite), np.count_nonzero(inv_bad))

    w = box
    inside = in_V(w, k, R)
    for n in range(1, min(horizon, 3) + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            w = seq[n].forward(w)
        finite = np.all(np.isfinite(w), axis=0)
        now = np.zeros(samples, dtype=bool)
        now[finite] = in_V(w[:, finite], k, R)
        checked = inside & finite
        report.add("nesting", np.count_nonzero(checked), np.count_nonzero(checked & ~now))
        inside = now | (inside & ~finite)
    return report


def _family_of(seq: AutoSequence, n_measure: int) -> ShiftFamilyBounds:
    if seq.family is not None:
        return seq.family
    return family_bounds_from_maps([seq[n].base for n in range(1, n_measure + 1)])


def find_filtration_spec(
    seq: AutoSequence,
    r_cap_exp: int | None = None,
    samples: int = 1000,
    horizon: int = 4,
    seed: int = 0,
    n_measure: int = 8,
) -> FiltrationSpec:
    """Least R = 2^j passing the analytic conditions and the sampled checks."""
    first = seq[1]
    if not isinstance(first, PerturbedWeakShift):
        raise ParameterError(f"filtration needs a perturbed weak-shift sequence, got {type(first).__name__}")
    cap = r_cap_exp if r_cap_exp is not None else get_settings().R_CAP_EXP
    k, d = seq.k, first.d
    fam = _family_of(seq, n_measure)

    failed = "dominance"
    for j in range(1, cap + 1):
        R = 2.0**j
        spec = build_spec(k, d, R, fam)
        conds = _conditions(k, d, R, fam, spec.m_const, spec.M_const)
        bad = [name for name, ok in conds.items() if not ok]
        if bad:
            failed = bad[0]
            continue
        report = verify_filtration(seq, spec, samples=samples, horizon=horizon, seed=seed)
        if report.ok:
            log.info("filtration_found R=2^%d m=%.6g M=%.6g Mtilde=%.6g", j, spec.m_const, spec.M_const, spec.Mtilde)
            return spec
        failed = report.first_violation() or failed
        log.debug("filtration_sample_failed R=2^%d check=%s", j, failed)
    raise SearchFailure(f"no filtration radius R <= 2^{cap} satisfies '{failed}'", inequality=failed)
