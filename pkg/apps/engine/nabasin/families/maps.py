"""Polynomial automorphism classes with forward/inverse evaluation and germs.

Points are numpy arrays with the coordinate axis first: shape (k,) for one
point, (k, ...) for a batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Protocol

import numpy as np

from nabasin.algebra.germs import GermMap, compose_truncated, invert_germ
from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import DomainError, ParameterError, UnsupportedDirection

Direction = Literal["forward", "inverse"]


class Automorphism(Protocol):
    k: int

    def forward(self, z: np.ndarray) -> np.ndarray: ...

    def inverse(self, z: np.ndarray) -> np.ndarray: ...

    def germ(self, order: int) -> GermMap: ...

    def inverse_germ(self, order: int) -> GermMap: ...


def _points(z, k: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[:1] != (k,):
        raise ParameterError(f"expected points with leading axis {k}, got shape {z.shape}")
    return z


# ---------------------------
# Shared behaviour
# ---------------------------


class PolynomialMapBase:
    """Maps whose components are explicit polynomials."""

    k: int

    def components(self) -> tuple[Polynomial, ...]:
        raise NotImplementedError

    def inverse_components(self) -> tuple[Polynomial, ...] | None:
        return None

    @property
    def degree(self) -> int:
        return max(max(1, c.degree) for c in self.components())

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        return np.stack([c.evaluate(z) for c in self.components()])

    def inverse(self, z) -> np.ndarray:
        comps = self.inverse_components()
        if comps is None:
            raise UnsupportedDirection(f"{type(self).__name__} has no registered inverse")
        z = _points(z, self.k)
        return np.stack([c.evaluate(z) for c in comps])

    def germ(self, order: int) -> GermMap:
        return GermMap(self.k, order, self.components())

    def inverse_germ(self, order: int) -> GermMap:
        comps = self.inverse_components()
        if comps is None:
            return invert_germ(self.germ(order), order)
        return GermMap(self.k, order, comps)

    @cached_property
    def _terms(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for comp in self.components():
            items = comp.items()
            exps = np.array([list(m) for m, _ in items], dtype=np.int64).reshape(len(items), self.k)
            coefs = np.array([c for _, c in items], dtype=complex)
            out.append((exps, coefs))
        return out

    def forward_scaled(self, s: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Image of z = exp(s) * w returned as (s', w') with ||w'||_sup = 1."""
        return scaled_polynomial_step(self._terms, s, w)


def scaled_polynomial_step(terms, s, w):
    """One step of a polynomial map on points kept as z = exp(s) * w.

    Every term is handled through its logarithmic magnitude so that orbits far
    beyond the floating range keep their leading behaviour.
    """
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=complex)
    shape = s.shape
    k = w.shape[0]
    s = s.reshape(-1)
    w = w.reshape(k, -1)
    absw = np.abs(w)
    logw = np.where(absw > 0, np.log(np.where(absw > 0, absw, 1.0)), -1e300)
    angle = np.angle(w)

    logs = []
    for exps, coefs in terms:
        if len(coefs) == 0:
            logs.append(None)
            continue
        deg = exps.sum(axis=1).astype(float)
        with np.errstate(over="ignore", invalid="ignore"):
            lm = np.log(np.abs(coefs))[:, None] + deg[:, None] * s[None, :] + exps @ logw
        logs.append(np.where(np.isnan(lm), -np.inf, lm))

    top = np.full(s.shape, -np.inf)
    for lm in logs:
        if lm is not None:
            top = np.maximum(top, lm.max(axis=0))
    top = np.where(np.isfinite(top), top, 0.0)

    values = []
    for (exps, coefs), lm in zip(terms, logs):
        if lm is None:
            values.append(np.zeros(s.shape, dtype=complex))
            continue
        phase = np.exp(1j * (exps @ angle))
        cphase = (coefs / np.abs(coefs))[:, None]
        values.append(np.sum(cphase * np.exp(lm - top[None, :]) * phase, axis=0))
    v = np.stack(values)
    norm = np.max(np.abs(v), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_new = top + np.log(norm)
        w_new = np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), 0.0)
    return s_new.reshape(shape), w_new.reshape((k,) + shape)


# ---------------------------
# Concrete classes
# ---------------------------


@dataclass(frozen=True, eq=False)
class LinearMap(PolynomialMapBase):
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    def components(self):
        return GermMap.linear(self.matrix).components

    def inverse_components(self):
        return GermMap.linear(np.linalg.inv(self.matrix)).components

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        return np.tensordot(self.matrix, z, axes=(1, 0))

    def inverse(self, z) -> np.ndarray:
        z = _points(z, self.k)
        return np.tensordot(np.linalg.inv(self.matrix), z, axes=(1, 0))

    def forward_scaled(self, s, w):
        v = np.tensordot(self.matrix, w, axes=(1, 0))
        norm = np.max(np.abs(v), axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return s + np.log(norm), np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), 0.0)


@dataclass(frozen=True, eq=False)
class HenonMap(PolynomialMapBase):
    """(x, y) -> (y, delta x + P(y))."""

    delta: complex
    P: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "delta", complex(self.delta))
        if self.delta == 0:
            raise DomainError("Henon map needs delta != 0")
        if self.P.k != 1:
            raise ParameterError("Henon polynomial must be univariate")
        if self.P.degree < 2:
            raise DomainError(f"Henon polynomial needs degree >= 2, got {self.P.degree}")

    k = 2

    def forward(self, z) -> np.ndarray:
        x, y = _points(z, 2)
        return np.stack([y, self.delta * x + self.P.evaluate(y[None, ...])])

    def inverse(self, z) -> np.ndarray:
        x, y = _points(z, 2)
        return np.stack([(y - self.P.evaluate(x[None, ...])) / self.delta, x])

    def components(self):
        first = Polynomial.variable(2, 2)
        second = Polynomial.variable(2, 1, self.delta) + self.P.insert_variable(1)
        return (first, second)

    def inverse_components(self):
        inv_delta = 1.0 / self.delta
        first = (Polynomial.variable(2, 2) - self.P.insert_variable(2)).scale(inv_delta)
        return (first, Polynomial.variable(2, 1))


@dataclass(frozen=True, eq=False)
class SwappedHenon(PolynomialMapBase):
    """(x, y) -> (delta y + P(x), x); the exchange conjugate of a Henon map."""

    delta: complex
    P: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "delta", complex(self.delta))
        if self.delta == 0:
            raise DomainError("swapped Henon factor needs delta != 0")
        if self.P.k != 1:
            raise ParameterError("Henon polynomial must be univariate")

    k = 2

    def forward(self, z) -> np.ndarray:
        x, y = _points(z, 2)
        return np.stack([self.delta * y + self.P.evaluate(x[None, ...]), x])

    def inverse(self, z) -> np.ndarray:
        x, y = _points(z, 2)
        return np.stack([y, (x - self.P.evaluate(y[None, ...])) / self.delta])

    def components(self):
        first = Polynomial.variable(2, 2, self.delta) + self.P.insert_variable(2)
        return (first, Polynomial.variable(2, 1))

    def inverse_components(self):
        second = (Polynomial.variable(2, 1) - self.P.insert_variable(1)).scale(1.0 / self.delta)
        return (Polynomial.variable(2, 2), second)

    def henon(self) -> HenonMap:
        return HenonMap(self.delta, self.P)


@dataclass(frozen=True, eq=False)
class ElementaryMap(PolynomialMapBase):
    """T^i: z_i -> a z_i + P(z without z_i); other coordinates fixed. i is 1-based."""

    k: int
    i: int
    a: complex
    P: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        if not 1 <= self.i <= self.k:
            raise ParameterError(f"coordinate i={self.i} out of range for k={self.k}")
        if self.a == 0:
            raise DomainError("elementary map needs a_i != 0")
        if self.P.k != self.k - 1:
            raise DomainError(
                f"T^{self.i} polynomial must be in the {self.k - 1} variables other than z_{self.i}"
            )

    @classmethod
    def from_full(cls, k: int, i: int, a: complex, P_full: Polynomial) -> "ElementaryMap":
        """Build from a k-variable polynomial; raises DomainError if it uses z_i."""
        return cls(k, i, a, P_full.drop_variable(i))

    @cached_property
    def P_full(self) -> Polynomial:
        return self.P.insert_variable(self.i)

    def _others(self, z):
        return np.delete(z, self.i - 1, axis=0)

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        out = z.copy()
        out[self.i - 1] = self.a * z[self.i - 1] + self.P.evaluate(self._others(z))
        return out

    def inverse(self, z) -> np.ndarray:
        z = _points(z, self.k)
        out = z.copy()
        out[self.i - 1] = (z[self.i - 1] - self.P.evaluate(self._others(z))) / self.a
        return out

    def components(self):
        comps = [Polynomial.variable(self.k, j + 1) for j in range(self.k)]
        comps[self.i - 1] = Polynomial.variable(self.k, self.i, self.a) + self.P_full
        return tuple(comps)

    def inverse_components(self):
        comps = [Polynomial.variable(self.k, j + 1) for j in range(self.k)]
        comps[self.i - 1] = (Polynomial.variable(self.k, self.i) - self.P_full).scale(1.0 / self.a)
        return tuple(comps)


@dataclass(frozen=True, eq=False)
class WeakShift(PolynomialMapBase):
    """(z_1, ..., z_k) -> (z_2, ..., z_k, a z_1 + p(z_2, ..., z_k))."""

    a: complex
    p: Polynomial
    d_tilde: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        if self.a == 0:
            raise DomainError("weak shift needs a_n != 0")
        if self.p.k < 1:
            raise ParameterError("weak shift needs k >= 2")
        if self.d_tilde is None:
            object.__setattr__(self, "d_tilde", self.base_degree)
        elif self.base_degree > self.d_tilde:
            raise ParameterError(
                f"a z_1 + p has degree {self.base_degree} above the family bound {self.d_tilde}"
            )

    @property
    def k(self) -> int:
        return self.p.k + 1

    @property
    def base_degree(self) -> int:
        return max(1, self.p.degree)

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        last = self.a * z[0] + self.p.evaluate(z[1:])
        return np.concatenate([z[1:], last[None, ...]])

    def inverse(self, z) -> np.ndarray:
        z = _points(z, self.k)
        first = (z[-1] - self.p.evaluate(z[:-1])) / self.a
        return np.concatenate([first[None, ...], z[:-1]])

    def components(self):
        k = self.k
        comps = [Polynomial.variable(k, j + 2) for j in range(k - 1)]
        comps.append(Polynomial.variable(k, 1, self.a) + self.p.insert_variable(1))
        return tuple(comps)

    def inverse_components(self):
        k = self.k
        first = (Polynomial.variable(k, k) - self.p.insert_variable(k)).scale(1.0 / self.a)
        return (first,) + tuple(Polynomial.variable(k, j + 1) for j in range(k - 1))


def perturbation_terms(k: int, d: int) -> tuple[Polynomial, Polynomial]:
    """Q_{d-1}(z_2) = z_2^{d-1} and H_d(z_2, ..., z_k) = sum z_j^d as k-variable polynomials."""
    q_exp = [0] * k
    q_exp[1] = d - 1
    Q = Polynomial.from_terms(k, [(q_exp, 1.0)], max_degree=d)
    H_terms = []
    for j in range(1, k):
        e = [0] * k
        e[j] = d
        H_terms.append((e, 1.0))
    H = Polynomial.from_terms(k, H_terms, max_degree=d)
    return Q, H


@dataclass(frozen=True, eq=False)
class PerturbedWeakShift(PolynomialMapBase):
    """Weak shift plus (0, ..., 0, z_2^{d-1}, z_2^d + ... + z_k^d)."""

    base: WeakShift
    d: int

    def __post_init__(self):
        if self.base.k < 3:
            raise ParameterError("perturbed weak shifts need k >= 3")
        if self.d < self.base.d_tilde + 2:
            raise ParameterError(f"perturbation degree d={self.d} below d_tilde+2={self.base.d_tilde + 2}")

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def degree(self) -> int:
        return self.d

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        out = self.base.forward(z)
        out[-2] = out[-2] + z[1] ** (self.d - 1)
        out[-1] = out[-1] + np.sum(z[1:] ** self.d, axis=0)
        return out

    def inverse(self, z) -> np.ndarray:
        z = _points(z, self.k)
        w = np.empty_like(z)
        w[1:-1] = z[:-2]
        w[-1] = z[-2] - z[0] ** (self.d - 1)
        tail = w[1:]
        w[0] = (z[-1] - self.base.p.evaluate(tail) - np.sum(tail**self.d, axis=0)) / self.base.a
        return w

    def components(self):
        Q, H = perturbation_terms(self.k, self.d)
        comps = list(self.base.components())
        comps[-2] = comps[-2] + Q
        comps[-1] = comps[-1] + H
        return tuple(comps)


@dataclass(frozen=True, eq=False)
class PolynomialMap(PolynomialMapBase):
    """Explicit polynomial map with an optional explicit inverse."""

    forward_germ: GermMap
    inverse_map: GermMap | None = None

    @property
    def k(self) -> int:
        return self.forward_germ.k

    def components(self):
        return self.forward_germ.components

    def inverse_components(self):
        return None if self.inverse_map is None else self.inverse_map.components


@dataclass(frozen=True, eq=False)
class CompositeMap:
    """factors[-1] o ... o factors[0] (factors applied first to last)."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ParameterError("composite map needs at least one factor")
        if len({f.k for f in factors}) != 1:
            raise ParameterError("composite factors differ in dimension")
        object.__setattr__(self, "factors", factors)

    @property
    def k(self) -> int:
        return self.factors[0].k

    @property
    def degree(self) -> int:
        out = 1
        for f in self.factors:
            out *= f.degree
        return out

    def forward(self, z) -> np.ndarray:
        z = _points(z, self.k)
        for f in self.factors:
            z = f.forward(z)
        return z

    def inverse(self, z) -> np.ndarray:
        z = _points(z, self.k)
        for f in reversed(self.factors):
            z = f.inverse(z)
        return z

    def germ(self, order: int) -> GermMap:
        g = self.factors[0].germ(order)
        for f in self.factors[1:]:
            g = compose_truncated(f.germ(order), g, order)
        return g

    def inverse_germ(self, order: int) -> GermMap:
        g = self.factors[-1].inverse_germ(order)
        for f in reversed(self.factors[:-1]):
            g = compose_truncated(f.inverse_germ(order), g, order)
        return g

    def forward_scaled(self, s, w):
        for f in self.factors:
            s, w = f.forward_scaled(s, w)
        return s, w


def conjugate(inner, V_in: np.ndarray, V_out: np.ndarray) -> CompositeMap:
    """V_out^{-1} o inner o V_in for unitary V."""
    V_out = np.asarray(V_out, dtype=complex)
    return CompositeMap((LinearMap(V_in), inner, LinearMap(V_out.conj().T)))


def evaluate(m, z, direction: Direction = "forward") -> np.ndarray:
    if direction == "forward":
        return m.forward(z)
    if direction == "inverse":
        return m.inverse(z)
    raise ParameterError(f"unknown direction {direction!r}")
