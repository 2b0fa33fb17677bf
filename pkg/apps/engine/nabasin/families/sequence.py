"""Indexed sequences n -> automorphism (n = 1, 2, ...) and sequence-level transforms."""
from __future__ import annotations

import threading
from math import comb
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from cachetools import LRUCache

from nabasin.algebra.germs import GermMap
from nabasin.core.errors import ParameterError
from nabasin.families.maps import CompositeMap, PerturbedWeakShift, WeakShift


def least_k0(A: float, B: float) -> int:
    """Least positive integer with B**k0 < A."""
    if not (0 < A < B < 1):
        raise ParameterError(f"need 0 < A < B < 1, got A={A}, B={B}")
    k0, power = 1, B
    while power >= A:
        power *= B
        k0 += 1
    return k0


@dataclass(frozen=True)
class AttractionBounds:
    A: float
    B: float
    r: float

    def __post_init__(self):
        if not (0 < self.A < self.B < 1):
            raise ParameterError(f"attraction bounds need 0 < A < B < 1, got A={self.A}, B={self.B}")
        if self.r <= 0:
            raise ParameterError(f"attraction radius must be positive, got {self.r}")

    @property
    def k0(self) -> int:
        return least_k0(self.A, self.B)


@dataclass(frozen=True)
class ShiftFamilyBounds:
    """Uniform constants of a weak-shift family: m_tilde < |a_n| < M_tilde, |alpha| < M_tilde."""

    m_tilde: float
    M_tilde: float
    d_tilde: int
    m0: int


@dataclass(frozen=True)
class SequenceMetadata:
    bounds: Optional[AttractionBounds] = None
    family: Optional[ShiftFamilyBounds] = None
    label: str = ""


class AutoSequence:
    """n -> automorphism, memoized. Providers must be pure."""

    def __init__(
        self,
        k: int,
        provider: Callable[[int], object],
        metadata: SequenceMetadata | None = None,
        linear_data: Callable[[int], np.ndarray] | None = None,
    ):
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        self.k = k
        self.provider = provider
        self.metadata = metadata or SequenceMetadata()
        self._linear_data = linear_data
        self._cache: LRUCache = LRUCache(maxsize=4096)
        self._germs: LRUCache = LRUCache(maxsize=4096)
        self._lock = threading.Lock()

    # ---- element access ----

    def __getitem__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ParameterError(f"sequence index must be an integer >= 1, got {n!r}")
        n = int(n)
        with self._lock:
            try:
                return self._cache[n]
            except KeyError:
                pass
        value = self.provider(n)
        if value.k != self.k:
            raise ParameterError(f"element {n} has dimension {value.k}, expected {self.k}")
        with self._lock:
            self._cache[n] = value
        return value

    def germ(self, n: int, order: int) -> GermMap:
        key = ("fwd", n, order)
        with self._lock:
            try:
                return self._germs[key]
            except KeyError:
                pass
        g = self[n].germ(order)
        with self._lock:
            self._germs[key] = g
        return g

    def inverse_germ(self, n: int, order: int) -> GermMap:
        key = ("inv", n, order)
        with self._lock:
            try:
                return self._germs[key]
            except KeyError:
                pass
        g = self[n].inverse_germ(order)
        with self._lock:
            self._germs[key] = g
        return g

    def linear_part(self, n: int) -> np.ndarray:
        if self._linear_data is not None:
            return np.asarray(self._linear_data(n), dtype=complex)
        return self.germ(n, 1).linear_part()

    @property
    def bounds(self) -> Optional[AttractionBounds]:
        return self.metadata.bounds

    @property
    def family(self) -> Optional[ShiftFamilyBounds]:
        return self.metadata.family

    def with_metadata(self, **changes) -> "AutoSequence":
        return AutoSequence(self.k, self.provider, replace(self.metadata, **changes), self._linear_data)

    # ---- constructors ----

    @classmethod
    def explicit(cls, maps: Sequence, metadata: SequenceMetadata | None = None) -> "AutoSequence":
        maps = list(maps)
        if not maps:
            raise ParameterError("explicit sequence needs at least one map")

        def provider(n: int):
            if n > len(maps):
                raise ParameterError(f"explicit sequence has {len(maps)} elements, asked for {n}")
            return maps[n - 1]

        return cls(maps[0].k, provider, metadata)

    @classmethod
    def periodic(cls, maps: Sequence, metadata: SequenceMetadata | None = None) -> "AutoSequence":
        maps = list(maps)
        if not maps:
            raise ParameterError("periodic sequence needs at least one map")
        return cls(maps[0].k, lambda n: maps[(n - 1) % len(maps)], metadata)


# ---------------------------
# Sequence transforms
# ---------------------------


def block_compose(seq: AutoSequence, l: int) -> AutoSequence:
    """Element n is f_{nl} o ... o f_{(n-1)l+1}."""
    if l < 1:
        raise ParameterError(f"block size must be >= 1, got {l}")
    if l == 1:
        return AutoSequence(seq.k, lambda n: seq[n], replace(seq.metadata, bounds=None))

    def provider(n: int):
        return CompositeMap(tuple(seq[(n - 1) * l + j] for j in range(1, l + 1)))

    return AutoSequence(seq.k, provider, SequenceMetadata(label=f"{seq.metadata.label}|block{l}"))


def periodic_restriction(seq: AutoSequence, m: int) -> AutoSequence:
    """Element n is element ((n - 1) mod m) + 1, so multiples of m map to m."""
    if m < 1:
        raise ParameterError(f"period must be >= 1, got {m}")
    return AutoSequence(
        seq.k,
        lambda n: seq[(n - 1) % m + 1],
        replace(seq.metadata, label=f"{seq.metadata.label}|period{m}"),
    )


def perturb(seq: AutoSequence, d: int) -> AutoSequence:
    """Degree-d perturbation of a weak-shift sequence."""
    family = seq.family
    d_tilde = family.d_tilde if family is not None else seq[1].d_tilde
    if d < d_tilde + 2:
        raise ParameterError(f"perturbation degree d={d} must be >= d_tilde + 2 = {d_tilde + 2}")

    def provider(n: int):
        base = seq[n]
        if not isinstance(base, WeakShift):
            raise ParameterError(f"element {n} is {type(base).__name__}, not a weak shift")
        return PerturbedWeakShift(base, d)

    return AutoSequence(seq.k, provider, replace(seq.metadata, label=f"{seq.metadata.label}|perturbed{d}"))


def family_bounds_from_maps(maps: Sequence[WeakShift], margin: float = 1.01) -> ShiftFamilyBounds:
    """Uniform constants measured on a finite list of weak shifts."""
    if not maps:
        raise ParameterError("no maps to measure")
    k = maps[0].k
    a_abs = [abs(m.a) for m in maps]
    coef_abs = [abs(c) for m in maps for c in m.p.coeffs.values()]
    d_tilde = max(m.d_tilde for m in maps)
    if max(m.base_degree for m in maps) != d_tilde:
        raise ParameterError(f"no map attains the declared family degree {d_tilde}")
    return ShiftFamilyBounds(
        m_tilde=min(a_abs) / margin,
        M_tilde=max(a_abs + coef_abs) * margin,
        d_tilde=d_tilde,
        m0=comb(d_tilde + k - 1, k - 1),
    )
