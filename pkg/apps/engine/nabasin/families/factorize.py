"""Structural factorizations of the conjugation targets into Henon and shift-like factors."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import DomainError, ParameterError
from nabasin.families.maps import CompositeMap, ElementaryMap, SwappedHenon, WeakShift
from nabasin.families.sequence import AutoSequence, SequenceMetadata

log = logging.getLogger("factorize")

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class HenonParameters:
    """k=2 target data: g(x, y) = (a x + p(y + q(x)/c), c y + q(x)) with q'(0) = b."""

    a: complex
    c: complex
    b: complex
    p: Polynomial
    q: Polynomial

    def g(self) -> CompositeMap:
        """Elementary form: T^2 (y -> c y + q(x)) then T^1 (x -> a x + p(y / c))."""
        second = ElementaryMap(2, 2, self.c, self.q)
        first = ElementaryMap(2, 1, self.a, self.p.substitute_scale([1.0 / self.c]))
        return CompositeMap((second, first))


def _check_monic(name: str, poly: Polynomial, degree: int) -> None:
    lead = poly.coefficient((degree,))
    if poly.degree != degree or abs(lead - 1.0) > _NORM_TOL:
        raise DomainError(f"{name} must be monic of degree {degree}, got leading term {lead} at degree {poly.degree}")


def henon_factorize_k2(
    a: complex,
    c: complex,
    b: complex,
    p: Polynomial,
    q: Polynomial,
    k0: int | None = None,
) -> tuple[SwappedHenon, SwappedHenon]:
    """(H_odd, H_even) with H_odd o H_even = g.

    H_odd = (a y + p(x / c), x), H_even = (c y + q(x), x). Each factor is the
    exchange conjugate of a Henon map (see SwappedHenon.henon).
    """
    a, c, b = complex(a), complex(c), complex(b)
    if a == 0 or c == 0:
        raise DomainError("Henon factorization needs a_n, c_n != 0")
    if p.k != 1 or q.k != 1:
        raise ParameterError("p and q must be univariate")
    if abs(p.coefficient((0,))) > _NORM_TOL or abs(q.coefficient((0,))) > _NORM_TOL:
        raise DomainError("p(0) and q(0) must vanish")
    if abs(p.coefficient((1,))) > _NORM_TOL:
        raise DomainError("p'(0) must vanish")
    if abs(q.coefficient((1,)) - b) > _NORM_TOL * max(1.0, abs(b)):
        raise DomainError(f"q'(0) = {q.coefficient((1,))} does not match b = {b}")

    top = k0 if k0 is not None else max(p.degree, q.degree)
    if top >= 2:
        _check_monic("p", p, top)
        _check_monic("q", q, top)
    elif p.degree > 1 or q.degree > 1:
        raise DomainError("linear factorization got nonlinear polynomials")

    h_odd = SwappedHenon(a, p.substitute_scale([1.0 / c]))
    h_even = SwappedHenon(c, q)
    return h_odd, h_even


def henon_sequence(params: Callable[[int], HenonParameters], k0: int | None = None) -> AutoSequence:
    """Element 2n-1 is H_even of g_n, element 2n is H_odd, so blocks of two recover g_n."""

    def provider(m: int):
        n = (m + 1) // 2
        h_odd, h_even = henon_factorize_k2(**vars(params(n)), k0=k0)
        return h_even if m % 2 else h_odd

    return AutoSequence(2, provider, SequenceMetadata(label="henon-factors"))


# ---------------------------
# k >= 3 shift factorization
# ---------------------------


def elementary_factors(u_diag: Sequence[complex], polys: Sequence[Polynomial]) -> list[ElementaryMap]:
    """T^1, ..., T^k from full k-variable polynomials; DomainError if P^i uses z_i."""
    k = len(u_diag)
    if len(polys) != k:
        raise ParameterError(f"need {k} polynomials, got {len(polys)}")
    return [ElementaryMap.from_full(k, i + 1, u_diag[i], polys[i]) for i in range(k)]


def _factors_of(g) -> list[ElementaryMap]:
    factors = list(g.factors) if isinstance(g, CompositeMap) else list(g)
    k = factors[0].k if factors else 0
    if len(factors) != k:
        raise ParameterError(f"expected {k} elementary factors, got {len(factors)}")
    for pos, factor in enumerate(factors, start=1):
        if not isinstance(factor, ElementaryMap):
            raise ParameterError(f"factor {pos} is {type(factor).__name__}, not an elementary map")
        if factor.i != pos:
            raise ParameterError(f"factor {pos} acts on coordinate {factor.i}")
    return factors


def cyclic_exchange(z, l: int) -> np.ndarray:
    """(z_{l+1}, ..., z_k, z_1, ..., z_l)."""
    return np.roll(np.asarray(z, dtype=complex), -l, axis=0)


def shift_factorize(g) -> list[WeakShift]:
    """Weak shifts S^1, ..., S^k with S^k o ... o S^1 = T^k o ... o T^1.

    The l-th shift carries a = u_ll and the polynomial of T^l with its
    arguments rotated: S^l(v) = (v_2, ..., v_k, u_ll v_1 + P^l(v_{k-l+2..k}, v_2..v_{k-l+1})).
    After l shifts the point equals cyclic_exchange(T^l o ... o T^1 (z), l).
    """
    factors = _factors_of(g)
    k = factors[0].k
    if k < 3:
        raise ParameterError("shift factorization needs k >= 3")
    shifts = []
    for l, factor in enumerate(factors, start=1):
        # P^l variables are z without z_l: (z_1..z_{l-1}, z_{l+1}..z_k); in shift
        # coordinates z_{l+1..k} sit first and z_{1..l-1} follow.
        rotated = factor.P.map_exponents(lambda e, l=l: tuple(e[l - 1 :]) + tuple(e[: l - 1]), k - 1)
        shifts.append(WeakShift(factor.a, rotated))
    return shifts


def shift_sequence(g_seq: AutoSequence) -> AutoSequence:
    """Element (n-1)k + l is the l-th shift of g_n."""
    k = g_seq.k

    def provider(m: int):
        n, l = divmod(m - 1, k)
        return shift_factorize(g_seq[n + 1])[l]

    return AutoSequence(k, provider, SequenceMetadata(label=f"{g_seq.metadata.label}|shifts"))
