"""Dense truncated-series kernel.

Coefficient arrays have shape ``(..., M)`` where ``M`` is the number of
monomials of degree <= order in k variables, indexed graded-lexicographically.
Maps are ``(..., k, M)``. Leading axes are batch axes (the solver batches
over time).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from cachetools import LRUCache, cached

from nabasin.algebra.indices import MultiIndex, degree_exact


@dataclass(frozen=True, eq=False)
class MonomialBasis:
    k: int
    order: int
    exponents: np.ndarray  # (M, k)
    degrees: np.ndarray  # (M,)
    index: dict
    pair_left: np.ndarray  # (P,)
    pair_right: np.ndarray  # (P,)
    scatter: np.ndarray  # (P, M) 0/1
    parent: np.ndarray  # (M,) index of m - e_var, -1 for the constant
    parent_var: np.ndarray  # (M,)

    @property
    def size(self) -> int:
        return int(self.degrees.shape[0])

    def degree_indices(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.degrees == j)

    def column(self, exps) -> int:
        return self.index[tuple(int(e) for e in exps)]

    def monomial(self, col: int) -> MultiIndex:
        return MultiIndex(self.exponents[col])


@cached(LRUCache(maxsize=64))
def basis(k: int, order: int) -> MonomialBasis:
    monomials: list[tuple[int, ...]] = []
    for d in range(order + 1):
        monomials.extend(sorted((tuple(m) for m in degree_exact(k, d)), reverse=True))
    exps = np.array(monomials, dtype=np.int64).reshape(len(monomials), k)
    degrees = exps.sum(axis=1)
    index = {m: pos for pos, m in enumerate(monomials)}

    left, right, target = [], [], []
    for a, ma in enumerate(monomials):
        for b, mb in enumerate(monomials):
            if degrees[a] + degrees[b] <= order:
                left.append(a)
                right.append(b)
                target.append(index[tuple(x + y for x, y in zip(ma, mb))])
    scatter = np.zeros((len(target), len(monomials)))
    scatter[np.arange(len(target)), target] = 1.0

    parent = np.full(len(monomials), -1, dtype=np.int64)
    parent_var = np.zeros(len(monomials), dtype=np.int64)
    for pos, m in enumerate(monomials):
        if pos == 0:
            continue
        var = next(v for v, e in enumerate(m) if e)
        prev = list(m)
        prev[var] -= 1
        parent[pos] = index[tuple(prev)]
        parent_var[pos] = var

    return MonomialBasis(
        k=k,
        order=order,
        exponents=exps,
        degrees=degrees,
        index=index,
        pair_left=np.array(left, dtype=np.int64),
        pair_right=np.array(right, dtype=np.int64),
        scatter=scatter,
        parent=parent,
        parent_var=parent_var,
    )


def multiply(a: np.ndarray, b: np.ndarray, B: MonomialBasis) -> np.ndarray:
    """Truncated product of two series sharing leading batch axes."""
    prod = a[..., B.pair_left] * b[..., B.pair_right]
    return prod @ B.scatter


def powers(Y: np.ndarray, B: MonomialBasis) -> np.ndarray:
    """All monomials evaluated on the map Y: out[..., m, :] = Y^m truncated.

    Y must have a vanishing constant term.
    """
    batch = Y.shape[:-2]
    out = np.zeros(batch + (B.size, B.size), dtype=complex)
    out[..., 0, 0] = 1.0
    for pos in range(1, B.size):
        var = B.parent_var[pos]
        if B.degrees[pos] == 1:
            out[..., pos, :] = Y[..., var, :]
        else:
            out[..., pos, :] = multiply(out[..., B.parent[pos], :], Y[..., var, :], B)
    return out


def compose(F: np.ndarray, Y: np.ndarray, B: MonomialBasis) -> np.ndarray:
    """Truncated F o Y."""
    return F @ powers(Y, B)


def identity(B: MonomialBasis, batch: tuple = ()) -> np.ndarray:
    out = np.zeros(batch + (B.k, B.size), dtype=complex)
    for i in range(B.k):
        out[..., i, B.column(_unit(B.k, i))] = 1.0
    return out


def linear(matrix: np.ndarray, B: MonomialBasis) -> np.ndarray:
    """Embed matrices (..., k, k) as linear maps (..., k, M)."""
    matrix = np.asarray(matrix, dtype=complex)
    out = np.zeros(matrix.shape[:-1] + (B.size,), dtype=complex)
    for j in range(B.k):
        out[..., B.column(_unit(B.k, j))] = matrix[..., j]
    return out


def linear_part(F: np.ndarray, B: MonomialBasis) -> np.ndarray:
    cols = [B.column(_unit(B.k, j)) for j in range(B.k)]
    return F[..., cols]


def truncate(F: np.ndarray, B: MonomialBasis, order: int) -> np.ndarray:
    out = F.copy()
    out[..., B.degrees > order] = 0.0
    return out


def homogeneous(F: np.ndarray, B: MonomialBasis, j: int) -> np.ndarray:
    out = np.zeros_like(F)
    mask = B.degrees == j
    out[..., mask] = F[..., mask]
    return out


def invert(F: np.ndarray, B: MonomialBasis) -> np.ndarray:
    """Truncated inverse of an origin-fixing map, degree by degree."""
    Linv = np.linalg.inv(linear_part(F, B))
    G = linear(Linv, B)
    ident = identity(B, F.shape[:-2])
    for j in range(2, B.order + 1):
        defect = homogeneous(compose(F, G, B) - ident, B, j)
        G = G - Linv @ defect
    return G


@cached(LRUCache(maxsize=256))
def _restriction(src: MonomialBasis, dst: MonomialBasis) -> tuple[np.ndarray, np.ndarray]:
    src_cols, dst_cols = [], []
    for m, pos in dst.index.items():
        if m in src.index:
            src_cols.append(src.index[m])
            dst_cols.append(pos)
    return np.array(src_cols, dtype=np.int64), np.array(dst_cols, dtype=np.int64)


def restrict(F: np.ndarray, src: MonomialBasis, dst: MonomialBasis) -> np.ndarray:
    """Re-index coefficients from one basis to another (dropping or padding)."""
    src_cols, dst_cols = _restriction(src, dst)
    out = np.zeros(F.shape[:-1] + (dst.size,), dtype=complex)
    out[..., dst_cols] = F[..., src_cols]
    return out


def substitution(A: np.ndarray, B: MonomialBasis, j: int) -> np.ndarray:
    """S[..., m, m'] = coefficient of z^m' in (A z)^m over degree-j monomials."""
    cols = B.degree_indices(j)
    P = powers(linear(A, B), B)
    return P[..., cols[:, None], cols[None, :]]


def _unit(k: int, i: int) -> tuple[int, ...]:
    return tuple(1 if pos == i else 0 for pos in range(k))
