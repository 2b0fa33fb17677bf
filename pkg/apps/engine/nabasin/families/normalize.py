"""Unitary conjugation of a sequence to lower-triangular linear parts."""
from __future__ import annotations

import logging
import threading

import numpy as np

from nabasin.core.errors import DomainError
from nabasin.families.maps import conjugate
from nabasin.families.sequence import AutoSequence

log = logging.getLogger("normalize")


def _exchange(k: int) -> np.ndarray:
    return np.eye(k)[::-1]


def ql_factor(M: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray, bool]:
    """M = V Lt with V unitary and Lt lower triangular.

    QR of the exchange-conjugated matrix, conjugated back. Phases are fixed so
    that diag(Lt) carries the phases of diag(M). Returns (V, Lt, unchanged)
    where `unchanged` means M was already lower triangular and V = I.
    """
    M = np.asarray(M, dtype=complex)
    k = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if np.all(np.abs(np.triu(M, 1)) <= tol * scale):
        if np.min(np.abs(np.diag(M))) <= tol * scale:
            raise DomainError("numerically singular linear part")
        return np.eye(k, dtype=complex), np.tril(M), True

    J = _exchange(k)
    Q, R = np.linalg.qr(J @ M @ J)
    d = np.diag(R)
    if np.min(np.abs(d)) <= tol * scale:
        raise DomainError("numerically singular linear part")
    target = np.diag(J @ M @ J)
    target_phase = np.where(np.abs(target) > tol * scale, target / np.where(target == 0, 1, np.abs(target)), 1.0)
    D = target_phase / (d / np.abs(d))
    R = D[:, None] * R
    Q = Q * np.conj(D)[None, :]
    return J @ Q @ J, np.tril(J @ R @ J), False


class NormalizedSequence(AutoSequence):
    """f~_n = V_{n+1}^{-1} o f_n o V_n with V_1 = I and lower-triangular Df~_n(0)."""

    def __init__(self, source: AutoSequence):
        self.source = source
        self._V: list[np.ndarray] = [np.eye(source.k, dtype=complex)]
        self._identity: list[bool] = [True]
        self._L: list[np.ndarray] = []
        self._advance_lock = threading.Lock()
        super().__init__(source.k, self._element, source.metadata, linear_data=self._linear)

    def _advance(self, n: int) -> None:
        """Make V_1 .. V_{n+1} available."""
        with self._advance_lock:
            while len(self._V) <= n:
                m = len(self._V)  # V_m known, computing V_{m+1}
                M = self.source.linear_part(m) @ self._V[m - 1]
                V_next, L, unchanged = ql_factor(M)
                self._V.append(V_next)
                self._identity.append(unchanged and self._identity[m - 1])
                self._L.append(L)

    def unitary(self, n: int) -> np.ndarray:
        self._advance(max(1, n - 1))
        return self._V[n - 1]

    def _linear(self, n: int) -> np.ndarray:
        self._advance(n)
        return self._L[n - 1]

    def _element(self, n: int):
        self._advance(n)
        if self._identity[n - 1] and self._identity[n]:
            return self.source[n]
        return conjugate(self.source[n], self._V[n - 1], self._V[n])


def lower_triangular_normalize(seq: AutoSequence) -> NormalizedSequence:
    if isinstance(seq, NormalizedSequence):
        return seq
    log.info("normalize_sequence k=%d label=%s", seq.k, seq.metadata.label)
    return NormalizedSequence(seq)
