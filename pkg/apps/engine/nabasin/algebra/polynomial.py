from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from nabasin.algebra.indices import MultiIndex
from nabasin.core.config import get_settings
from nabasin.core.errors import DomainError, ParameterError

# NABASIN_ZERO_TOL, read once at import
ZERO_TOL = get_settings().ZERO_TOL


def _grlex_key(m: tuple) -> tuple:
    return (sum(m), tuple(-e for e in m))


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial in k variables: MultiIndex -> complex, zeros elided."""

    k: int
    max_degree: int
    coeffs: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 0:
            raise ParameterError(f"negative variable count {self.k}")
        clean: dict[MultiIndex, complex] = {}
        for exps, c in self.coeffs.items():
            m = exps if isinstance(exps, MultiIndex) else MultiIndex(exps)
            if len(m) != self.k:
                raise ParameterError(f"exponent {tuple(m)} has wrong length for k={self.k}")
            if m.degree > self.max_degree:
                raise ParameterError(
                    f"exponent {tuple(m)} exceeds max_degree {self.max_degree}"
                )
            c = complex(c)
            if abs(c) > ZERO_TOL:
                clean[m] = c
        object.__setattr__(self, "coeffs", clean)

    # ---- constructors ----

    @classmethod
    def from_terms(
        cls,
        k: int,
        terms: Iterable[tuple[Iterable[int], complex]],
        max_degree: int | None = None,
    ) -> "Polynomial":
        acc: dict[MultiIndex, complex] = {}
        for exps, c in terms:
            m = MultiIndex(exps)
            acc[m] = acc.get(m, 0j) + complex(c)
        if max_degree is None:
            max_degree = max((m.degree for m in acc), default=0)
        return cls(k=k, max_degree=max_degree, coeffs=acc)

    @classmethod
    def zero(cls, k: int, max_degree: int = 0) -> "Polynomial":
        return cls(k=k, max_degree=max_degree)

    @classmethod
    def variable(cls, k: int, i: int, coeff: complex = 1.0, max_degree: int = 1) -> "Polynomial":
        """coeff * z_i for 1-based i."""
        exps = [0] * k
        exps[i - 1] = 1
        return cls(k=k, max_degree=max(1, max_degree), coeffs={MultiIndex(exps): coeff})

    # ---- queries ----

    @property
    def degree(self) -> int:
        return max((m.degree for m in self.coeffs), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exps: Iterable[int]) -> complex:
        return self.coeffs.get(MultiIndex(exps), 0j)

    def items(self) -> list[tuple[MultiIndex, complex]]:
        return sorted(self.coeffs.items(), key=lambda kv: _grlex_key(kv[0]))

    def homogeneous_part(self, j: int) -> "Polynomial":
        return Polynomial(
            k=self.k,
            max_degree=self.max_degree,
            coeffs={m: c for m, c in self.coeffs.items() if m.degree == j},
        )

    def evaluate(self, z) -> np.ndarray:
        """Evaluate on a point (shape (k,)) or a batch (shape (k, ...))."""
        z = np.asarray(z, dtype=complex)
        if z.shape[:1] != (self.k,):
            raise ParameterError(f"expected leading axis {self.k}, got shape {z.shape}")
        out = np.zeros(z.shape[1:], dtype=complex)
        for m, c in self.coeffs.items():
            term = np.full(z.shape[1:], c, dtype=complex)
            for pos, e in enumerate(m):
                if e:
                    term = term * z[pos] ** e
            out = out + term
        return out

    # ---- arithmetic ----

    def truncate(self, order: int) -> "Polynomial":
        return Polynomial(
            k=self.k,
            max_degree=order,
            coeffs={m: c for m, c in self.coeffs.items() if m.degree <= order},
        )

    def scale(self, factor: complex) -> "Polynomial":
        return Polynomial(
            k=self.k,
            max_degree=self.max_degree,
            coeffs={m: c * factor for m, c in self.coeffs.items()},
        )

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if other.k != self.k:
            raise ParameterError("adding polynomials in different variable counts")
        acc = dict(self.coeffs)
        for m, c in other.coeffs.items():
            acc[m] = acc.get(m, 0j) + c
        return Polynomial(k=self.k, max_degree=max(self.max_degree, other.max_degree), coeffs=acc)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def map_exponents(self, fn: Callable[[MultiIndex], Iterable[int]], k: int) -> "Polynomial":
        return Polynomial.from_terms(
            k, ((fn(m), c) for m, c in self.coeffs.items()), max_degree=self.max_degree
        )

    def insert_variable(self, pos: int) -> "Polynomial":
        """Embed into k+1 variables with a new variable at 1-based position pos."""
        return self.map_exponents(
            lambda m: tuple(m[: pos - 1]) + (0,) + tuple(m[pos - 1 :]), self.k + 1
        )

    def drop_variable(self, pos: int) -> "Polynomial":
        """Remove the 1-based variable pos; it must not occur."""
        for m in self.coeffs:
            if m[pos - 1]:
                raise DomainError(f"polynomial depends on z_{pos} through {tuple(m)}")
        return self.map_exponents(lambda m: tuple(m[: pos - 1]) + tuple(m[pos:]), self.k - 1)

    def substitute_scale(self, factors: Iterable[complex]) -> "Polynomial":
        """P(f_1 z_1, ..., f_k z_k)."""
        factors = [complex(f) for f in factors]
        out = {}
        for m, c in self.coeffs.items():
            scale = 1.0 + 0j
            for f, e in zip(factors, m):
                scale *= f**e
            out[m] = c * scale
        return Polynomial(k=self.k, max_degree=self.max_degree, coeffs=out)

    # ---- serialization ----

    def to_json(self) -> list[dict[str, Any]]:
        return [
            {"exponents": list(m), "re": c.real, "im": c.imag} for m, c in self.items()
        ]

    @classmethod
    def from_json(cls, k: int, terms: list[Mapping[str, Any]], max_degree: int | None = None):
        try:
            parsed = [
                (t["exponents"], complex(float(t.get("re", 0.0)), float(t.get("im", 0.0))))
                for t in terms
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed polynomial term: {exc}") from exc
        return cls.from_terms(k, parsed, max_degree=max_degree)
