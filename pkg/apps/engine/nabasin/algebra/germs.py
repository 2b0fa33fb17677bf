from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from nabasin.algebra import dense
from nabasin.algebra.indices import MultiIndex
from nabasin.algebra.polynomial import ZERO_TOL, Polynomial
from nabasin.core.errors import DomainError, ParameterError


@dataclass(frozen=True, eq=False)
class GermMap:
    """Self-map of C^k kept through its Taylor coefficients up to `order`."""

    k: int
    order: int
    components: tuple[Polynomial, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.k:
            raise ParameterError(f"germ needs {self.k} components, got {len(comps)}")
        if self.order < 0:
            raise ParameterError(f"negative germ order {self.order}")
        for comp in comps:
            if comp.k != self.k:
                raise ParameterError("germ component has wrong variable count")
        object.__setattr__(self, "components", tuple(c.truncate(self.order) for c in comps))

    @classmethod
    def identity(cls, k: int, order: int) -> "GermMap":
        return cls(k, order, tuple(Polynomial.variable(k, i + 1, max_degree=order) for i in range(k)))

    @classmethod
    def linear(cls, matrix, order: int = 1) -> "GermMap":
        matrix = np.asarray(matrix, dtype=complex)
        k = matrix.shape[0]
        comps = []
        for i in range(k):
            terms = [
                (tuple(1 if p == j else 0 for p in range(k)), matrix[i, j]) for j in range(k)
            ]
            comps.append(Polynomial.from_terms(k, terms, max_degree=max(order, 1)))
        return cls(k, max(order, 1), tuple(comps))

    @classmethod
    def from_dense(cls, F: np.ndarray, B: dense.MonomialBasis, order: int | None = None) -> "GermMap":
        order = B.order if order is None else order
        comps = []
        for i in range(B.k):
            coeffs = {
                B.monomial(col): F[i, col]
                for col in np.flatnonzero(np.abs(F[i]) > ZERO_TOL)
                if B.degrees[col] <= order
            }
            comps.append(Polynomial(k=B.k, max_degree=order, coeffs=coeffs))
        return cls(B.k, order, tuple(comps))

    def to_dense(self, B: dense.MonomialBasis) -> np.ndarray:
        out = np.zeros((self.k, B.size), dtype=complex)
        for i, comp in enumerate(self.components):
            for m, c in comp.coeffs.items():
                col = B.index.get(tuple(m))
                if col is not None:
                    out[i, col] = c
        return out

    def linear_part(self) -> np.ndarray:
        out = np.zeros((self.k, self.k), dtype=complex)
        for i, comp in enumerate(self.components):
            for j in range(self.k):
                out[i, j] = comp.coefficient(tuple(1 if p == j else 0 for p in range(self.k)))
        return out

    def constant_term(self) -> np.ndarray:
        zero = (0,) * self.k
        return np.array([comp.coefficient(zero) for comp in self.components])

    def coefficient(self, i: int, exps: Iterable[int]) -> complex:
        """Coefficient of z^exps in the 1-based component i."""
        return self.components[i - 1].coefficient(exps)

    def evaluate(self, z) -> np.ndarray:
        return np.stack([comp.evaluate(z) for comp in self.components])

    def max_abs_difference(self, other: "GermMap") -> float:
        order = min(self.order, other.order)
        B = dense.basis(self.k, order)
        return float(np.max(np.abs(self.to_dense(B) - other.to_dense(B)), initial=0.0))

    def to_json(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "order": self.order,
            "components": [comp.to_json() for comp in self.components],
        }

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> "GermMap":
        try:
            k = int(payload["k"])
            order = int(payload["order"])
            comps = payload["components"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed germ payload: {exc}") from exc
        if len(comps) != k:
            raise ParameterError(f"germ payload has {len(comps)} components for k={k}")
        return cls(k, order, tuple(Polynomial.from_json(k, terms, max_degree=order) for terms in comps))


def _as_germ(g, order: int) -> GermMap:
    if isinstance(g, GermMap):
        return g
    if hasattr(g, "germ"):
        return g.germ(order)
    raise ParameterError(f"cannot take a germ of {type(g).__name__}")


def truncate(g, order: int) -> GermMap:
    if order < 1:
        raise ParameterError(f"truncation order must be >= 1, got {order}")
    g = _as_germ(g, order)
    return GermMap(g.k, order, g.components)


def compose_truncated(f: GermMap, g: GermMap, order: int) -> GermMap:
    """[f o g] truncated to `order`."""
    if f.k != g.k:
        raise ParameterError("composing germs of different dimension")
    if np.any(np.abs(g.constant_term()) > ZERO_TOL):
        raise DomainError("inner germ has a constant term")
    B = dense.basis(f.k, order)
    return GermMap.from_dense(dense.compose(f.to_dense(B), g.to_dense(B), B), B)


def invert_germ(f: GermMap, order: int) -> GermMap:
    if np.any(np.abs(f.constant_term()) > ZERO_TOL):
        raise DomainError("germ does not fix the origin")
    L = f.linear_part()
    scale = max(1.0, float(np.max(np.abs(L), initial=0.0)))
    if abs(np.linalg.det(L)) < 1e-12 * scale**f.k:
        raise DomainError("singular linear part")
    B = dense.basis(f.k, order)
    return GermMap.from_dense(dense.invert(f.to_dense(B), B), B)


def germ_to_json(g: GermMap) -> dict[str, Any]:
    return g.to_json()


def germ_from_json(payload: Mapping[str, Any]) -> GermMap:
    return GermMap.from_json(payload)


def homogeneous_coefficients(g: GermMap, j: int) -> dict[tuple[int, MultiIndex], complex]:
    """{(1-based coordinate, index): coefficient} for the degree-j terms."""
    return {
        (i + 1, m): c
        for i, comp in enumerate(g.components)
        for m, c in comp.coeffs.items()
        if m.degree == j
    }
