import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Optional, Protocol

import numpy as np

from nabasin.algebra.germs import GermMap
from nabasin.algebra.indices import degree_exact
from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import ParameterError
from nabasin.core.types import MapSpec, SequenceSpec, TermSpec, to_complex
from nabasin.families.maps import (
    ElementaryMap,
    HenonMap,
    LinearMap,
    PolynomialMap,
    WeakShift,
    conjugate,
)
from nabasin.families.sequence import (
    AttractionBounds,
    AutoSequence,
    SequenceMetadata,
    ShiftFamilyBounds,
    family_bounds_from_maps,
    perturb,
)

log = logging.getLogger("registry")

DEFAULT_A_RANGE = (0.3, 0.7)


# ---------------------------
# Builder protocol (for typing)
# ---------------------------
class FamilyBuilder(Protocol):
    def explicit(self, spec: SequenceSpec, m: MapSpec): ...

    def seeded(self, spec: SequenceSpec, rng: np.random.Generator, n: int): ...


# ---------------------------
# Helpers
# ---------------------------


def _poly(k: int, terms: List[TermSpec]) -> Polynomial:
    for t in terms:
        if len(t.exponents) != k:
            raise ParameterError(f"term exponents {t.exponents} need {k} entries")
    return Polynomial.from_terms(k, ((t.exponents, to_complex(t.coeff)) for t in terms))


def _germ(k: int, comps: List[List[TermSpec]]) -> GermMap:
    if len(comps) != k:
        raise ParameterError(f"custom map needs {k} components, got {len(comps)}")
    polys = [_poly(k, c) for c in comps]
    order = max(1, max(p.degree for p in polys))
    return GermMap(k, order, tuple(p.truncate(order) for p in polys))


def _required(value, name: str, family: str):
    if value is None:
        raise ParameterError(f"{family} map needs '{name}'")
    return to_complex(value)


def _a_range(spec: SequenceSpec) -> tuple[float, float]:
    lo, hi = spec.a_range or DEFAULT_A_RANGE
    if not 0 < lo <= hi:
        raise ParameterError(f"a_range must satisfy 0 < lo <= hi, got {(lo, hi)}")
    return lo, hi


def _phase(rng: np.random.Generator, modulus) -> complex:
    return modulus * np.exp(2j * np.pi * rng.random())


def _disc(rng: np.random.Generator, radius: float, size=None):
    """Uniform in the closed disc of the given radius."""
    rho = radius * np.sqrt(rng.random(size))
    return rho * np.exp(2j * np.pi * rng.random(size))


def _random_poly(rng: np.random.Generator, k: int, lo: int, hi: int, radius: float) -> Polynomial:
    terms = [(m, _disc(rng, radius)) for j in range(lo, hi + 1) for m in degree_exact(k, j)]
    return Polynomial.from_terms(k, terms, max_degree=max(hi, 0))


def _random_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    Z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


# ---------------------------
# Concrete builders
# ---------------------------


class HenonFamily:
    def explicit(self, spec, m):
        if spec.k != 2:
            raise ParameterError("Henon family needs k = 2")
        return HenonMap(_required(m.delta, "delta", "henon"), _poly(1, m.P))

    def seeded(self, spec, rng, n):
        if spec.k != 2:
            raise ParameterError("Henon family needs k = 2")
        deg = max(2, spec.degree)
        lo, hi = _a_range(spec)
        P = _random_poly(rng, 1, 2, deg - 1, spec.coef_bound) + Polynomial.from_terms(1, [((deg,), 1.0)])
        return HenonMap(_phase(rng, rng.uniform(lo, hi)), P)


class ElementaryFamily:
    def explicit(self, spec, m):
        if m.i is None:
            raise ParameterError("elementary map needs 'i'")
        return ElementaryMap.from_full(spec.k, m.i, _required(m.a, "a", "elementary"), _poly(spec.k, m.P))

    def seeded(self, spec, rng, n):
        lo, hi = _a_range(spec)
        i = (n - 1) % spec.k + 1
        P = _random_poly(rng, spec.k - 1, 2, max(2, spec.degree), spec.coef_bound)
        return ElementaryMap(spec.k, i, _phase(rng, rng.uniform(lo, hi)), P)


class WeakShiftFamily:
    def explicit(self, spec, m):
        if spec.k < 2:
            raise ParameterError("weak shifts need k >= 2")
        return WeakShift(_required(m.a, "a", "weakshift"), _poly(spec.k - 1, m.P))

    def seeded(self, spec, rng, n):
        if spec.k < 2:
            raise ParameterError("weak shifts need k >= 2")
        lo, hi = _a_range(spec)
        a = _phase(rng, rng.uniform(lo, hi))
        d_tilde = spec.degree
        if d_tilde < 2:
            return WeakShift(a, Polynomial.zero(spec.k - 1), d_tilde=1)
        p = _random_poly(rng, spec.k - 1, 2, d_tilde, spec.coef_bound)
        # the family degree is attained through z_k^d_tilde
        top = (0,) * (spec.k - 2) + (d_tilde,)
        lead = _phase(rng, spec.coef_bound * rng.uniform(0.5, 1.0))
        p = Polynomial(k=spec.k - 1, max_degree=d_tilde, coeffs={**p.coeffs, top: lead})
        return WeakShift(a, p, d_tilde=d_tilde)

    def family_bounds(self, spec) -> ShiftFamilyBounds:
        lo, hi = _a_range(spec)
        d_tilde = max(1, spec.degree)
        return ShiftFamilyBounds(
            m_tilde=0.99 * lo,
            M_tilde=1.01 * max(hi, spec.coef_bound),
            d_tilde=d_tilde,
            m0=comb(d_tilde + spec.k - 1, spec.k - 1),
        )


class CustomFamily:
    def explicit(self, spec, m):
        if m.matrix is not None:
            matrix = np.array([[to_complex(x) for x in row] for row in m.matrix])
            if matrix.shape != (spec.k, spec.k):
                raise ParameterError(f"custom matrix must be {spec.k}x{spec.k}")
            return LinearMap(matrix)
        if m.components is None:
            raise ParameterError("custom map needs 'matrix' or 'components'")
        inverse = _germ(spec.k, m.inverse) if m.inverse is not None else None
        return PolynomialMap(_germ(spec.k, m.components), inverse)

    def seeded(self, spec, rng, n):
        raise ParameterError("custom family has no seeded provider; give coeffs")


class TriangularFamily:
    """f_n = L_n z + N_n(z), L_n lower triangular with |diag| in [A, B]; optionally unitarily rotated."""

    def explicit(self, spec, m):
        raise ParameterError("triangular family is seeded only; use 'custom' for explicit maps")

    def _triangular(self, spec, rng) -> PolynomialMap:
        k, bounds = spec.k, spec.bounds
        L = np.zeros((k, k), dtype=complex)
        for i in range(k):
            L[i, i] = _phase(rng, rng.uniform(bounds.A, bounds.B))
            L[i, :i] = _disc(rng, spec.coef_bound, i)
        order = max(2, spec.degree)
        comps = []
        for i in range(k):
            linear = Polynomial.from_terms(
                k, [(tuple(1 if p == j else 0 for p in range(k)), L[i, j]) for j in range(k)], max_degree=order
            )
            comps.append(linear + _random_poly(rng, k, 2, order, spec.coef_bound))
        return PolynomialMap(GermMap(k, order, tuple(comps)))

    def seeded(self, spec, rng, n):
        inner = self._triangular(spec, rng)
        if not spec.rotate:
            return inner
        W_n = np.eye(spec.k, dtype=complex) if n == 1 else _random_unitary(_rng(spec, n, 1), spec.k)
        W_next = _random_unitary(_rng(spec, n + 1, 1), spec.k)
        # W_{n+1} o t_n o W_n^{-1}
        return conjugate(inner, W_n.conj().T, W_next.conj().T)


def _rng(spec: SequenceSpec, n: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(spec.seed), n, stream])


REGISTRY: Dict[str, FamilyBuilder] = {
    "henon": HenonFamily(),
    "elementary": ElementaryFamily(),
    "weakshift": WeakShiftFamily(),
    "perturbed": WeakShiftFamily(),
    "custom": CustomFamily(),
    "triangular": TriangularFamily(),
}


@dataclass
class BuiltSequence:
    seq: AutoSequence
    spec: SequenceSpec
    base: Optional[AutoSequence] = None  # unperturbed weak shifts for the perturbed family


def _metadata(spec: SequenceSpec, family: Optional[ShiftFamilyBounds]) -> SequenceMetadata:
    bounds = None
    if spec.bounds is not None:
        bounds = AttractionBounds(spec.bounds.A, spec.bounds.B, spec.bounds.r)
    return SequenceMetadata(bounds=bounds, family=family, label=f"{spec.family}/k{spec.k}")


def build_sequence(spec: SequenceSpec) -> BuiltSequence:
    """Scenario sequence spec -> memoized AutoSequence through the family registry."""
    try:
        builder = REGISTRY[spec.family]
    except KeyError as exc:
        raise ParameterError(f"unknown family {spec.family!r}") from exc

    family_bounds: Optional[ShiftFamilyBounds] = None
    if spec.coeffs:
        maps = [builder.explicit(spec, m) for m in spec.coeffs]
        if spec.family in ("weakshift", "perturbed"):
            family_bounds = family_bounds_from_maps(maps)
        metadata = _metadata(spec, family_bounds)
        if spec.period is not None:
            if spec.period != len(maps):
                raise ParameterError(f"period {spec.period} does not match {len(maps)} explicit maps")
            seq = AutoSequence.periodic(maps, metadata)
        else:
            seq = AutoSequence.explicit(maps, metadata)
    else:
        if spec.family in ("weakshift", "perturbed"):
            family_bounds = builder.family_bounds(spec)
        period = spec.period

        def provider(n: int, period=period):
            index = n if period is None else (n - 1) % period + 1
            return builder.seeded(spec, _rng(spec, index), index)

        seq = AutoSequence(spec.k, provider, _metadata(spec, family_bounds))

    log.info("build_sequence family=%s k=%d explicit=%d seed=%s", spec.family, spec.k, len(spec.coeffs), spec.seed)
    if spec.family == "perturbed":
        return BuiltSequence(perturb(seq, int(spec.d)), spec, base=seq)
    return BuiltSequence(seq, spec)

