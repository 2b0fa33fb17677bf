"""Multi-indices and the ordered index families used by the conjugation solver.

Coordinates in the public API are 1-based (coordinate ``i`` means ``z_i``);
tuples are stored 0-based as usual.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Literal

from cachetools import LRUCache, cached

from nabasin.core.errors import ParameterError

Family = Literal[
    "degree",  # all indices of one exact degree
    "cumulative",  # I_k^m: degrees 1..m
    "coordinate_free",  # I_{k-1}^{m,i}: degrees 1..m with m_i = 0
    "shifted",  # I_{k,i}^{m-1}: j + e_i for 1 <= |j| <= m-1
    "zero_prefix",  # J_{k,i+1}^j: degree j, m_1 = ... = m_i = 0
    "complement",  # degree j, some m_l >= 1 with l <= i
]

FAMILIES: tuple[str, ...] = (
    "degree",
    "cumulative",
    "coordinate_free",
    "shifted",
    "zero_prefix",
    "complement",
)


class MultiIndex(tuple):
    """Exponent tuple with nonnegative entries."""

    def __new__(cls, exponents: Iterable[int]):
        values = tuple(int(e) for e in exponents)
        if any(e < 0 for e in values):
            raise ParameterError(f"negative exponent in {values}")
        return super().__new__(cls, values)

    @property
    def k(self) -> int:
        return len(self)

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def first_nonzero(self) -> int:
        """1-based position of the first nonzero entry (k + 1 for the zero index)."""
        for pos, e in enumerate(self):
            if e:
                return pos + 1
        return len(self) + 1

    def plus(self, other: Iterable[int]) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def __repr__(self) -> str:
        return f"MultiIndex{tuple(self)!r}"


def unit(k: int, i: int) -> MultiIndex:
    """e_i for 1-based coordinate i."""
    return MultiIndex(1 if pos == i - 1 else 0 for pos in range(k))


@cached(LRUCache(maxsize=512))
def degree_exact(k: int, j: int) -> tuple[MultiIndex, ...]:
    """All k-tuples of total degree j, lexicographically ascending."""
    if k == 0:
        return (MultiIndex(()),) if j == 0 else ()
    out: list[MultiIndex] = []
    for first in range(j + 1):
        for rest in degree_exact(k - 1, j - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    return tuple(out)


@dataclass(frozen=True)
class OrderedIndexSet:
    k: int
    family: str
    params: tuple[tuple[str, int], ...]
    ordering: tuple[MultiIndex, ...]

    def __len__(self) -> int:
        return len(self.ordering)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.ordering)

    def __contains__(self, m) -> bool:
        return tuple(m) in self.members

    @property
    def members(self) -> frozenset:
        return frozenset(tuple(m) for m in self.ordering)


def _check_coordinate(k: int, i: int | None, family: str, upper: int) -> int:
    if i is None:
        raise ParameterError(f"family {family!r} needs a coordinate i")
    if not 1 <= i <= upper:
        raise ParameterError(f"coordinate i={i} out of range 1..{upper} for family {family!r}, k={k}")
    return i


def enumerate_indices(
    k: int,
    family: str,
    *,
    max_degree: int | None = None,
    degree: int | None = None,
    i: int | None = None,
) -> OrderedIndexSet:
    """Members of an index family, lexicographically ascending."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if family not in FAMILIES:
        raise ParameterError(f"unknown index family {family!r}")

    if family in ("degree", "zero_prefix", "complement"):
        if degree is None or degree < 0:
            raise ParameterError(f"family {family!r} needs degree >= 0")
    else:
        if max_degree is None or max_degree < 0:
            raise ParameterError(f"family {family!r} needs max_degree >= 0")

    if family == "degree":
        members = list(degree_exact(k, degree))
    elif family == "cumulative":
        members = [m for d in range(1, max_degree + 1) for m in degree_exact(k, d)]
    elif family == "coordinate_free":
        i = _check_coordinate(k, i, family, k)
        members = [
            m for d in range(1, max_degree + 1) for m in degree_exact(k, d) if m[i - 1] == 0
        ]
    elif family == "shifted":
        i = _check_coordinate(k, i, family, k)
        e_i = unit(k, i)
        members = [
            m.plus(e_i) for d in range(1, max_degree) for m in degree_exact(k, d)
        ]
    elif family == "zero_prefix":
        i = _check_coordinate(k, i, family, k - 1)
        members = [m for m in degree_exact(k, degree) if not any(m[:i])]
    else:  # complement
        i = _check_coordinate(k, i, family, k - 1)
        members = [m for m in degree_exact(k, degree) if any(m[:i])]

    members.sort()
    params = tuple(
        (name, value)
        for name, value in (("max_degree", max_degree), ("degree", degree), ("i", i))
        if value is not None
    )
    return OrderedIndexSet(k=k, family=family, params=params, ordering=tuple(members))


def count_indices(
    k: int,
    family: str,
    *,
    max_degree: int | None = None,
    degree: int | None = None,
    i: int | None = None,
) -> int:
    """Closed-form member counts (binomial sums)."""
    if family == "degree":
        return comb(degree + k - 1, k - 1)
    if family == "cumulative":
        return comb(max_degree + k, k) - 1
    if family == "coordinate_free":
        return comb(max_degree + k - 1, k - 1) - 1 if k > 1 else 0
    if family == "shifted":
        return comb(max_degree - 1 + k, k) - 1 if max_degree >= 1 else 0
    if family == "zero_prefix":
        return comb(degree + k - i - 1, k - i - 1)
    if family == "complement":
        return comb(degree + k - 1, k - 1) - comb(degree + k - i - 1, k - i - 1)
    raise ParameterError(f"unknown index family {family!r}")


def _phi(k: int, j: int, i: int) -> tuple[MultiIndex, ...]:
    ordered: list[MultiIndex] = []
    for level in range(1, i + 1):
        # indices whose first nonzero entry sits at `level` go in front
        new = [m for m in degree_exact(k, j) if m.first_nonzero == level]
        ordered = new + ordered
    return tuple(ordered)


def phi_ordering(k: int, j: int, i: int) -> list[MultiIndex]:
    """Inductive ordering of the degree-j indices with a nonzero entry among z_1..z_i.

    Step i puts the indices whose first nonzero entry is z_i in front, in
    lexicographic ascending order, followed by the ordering of step i - 1.
    """
    if j < 2:
        raise ParameterError(f"phi ordering needs degree j >= 2, got {j}")
    if not 1 <= i <= k - 1:
        raise ParameterError(f"phi ordering needs 1 <= i <= k-1, got i={i}, k={k}")
    return list(_phi(k, j, i))


@cached(LRUCache(maxsize=512))
def slot_ordering(k: int, j: int, c: int) -> tuple[MultiIndex, ...]:
    """Traversal order of the degree-j slots of coordinate c in the solver.

    The zero-prefix block (no z_1..z_c) comes first, later-starting indices
    first, then the phi ordering of step c.
    """
    if j < 1 or not 1 <= c <= k:
        raise ParameterError(f"bad slot ordering request k={k} j={j} c={c}")
    head: list[MultiIndex] = []
    for level in range(k, c, -1):
        head.extend(m for m in degree_exact(k, j) if m.first_nonzero == level)
    return tuple(head) + _phi(k, j, c)
