"""Degree-by-degree solution of h_{n+1} = [g_n o h_n o f_n^{-1}]_{k0}.

The targets g_n are products of elementary maps. For k >= 3 the factors are
T^1, ..., T^k (applied in that order); for k = 2 the factors are
T^2: y -> c y + q(x) and then T^1: x -> a x + p(y / c), which is the
Henon-product form.

Unknowns of one degree enter the degree-j defect affinely. The solver
recomposes once per degree with every unknown of that degree set to zero and
then walks the slots in processing order, adding the closed-form linear
response of each solved unknown to the running defect.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Literal, Optional

import numpy as np

from nabasin.algebra import dense
from nabasin.algebra.germs import GermMap, compose_truncated
from nabasin.algebra.indices import MultiIndex, slot_ordering
from nabasin.algebra.polynomial import ZERO_TOL, Polynomial
from nabasin.core.config import get_settings
from nabasin.core.errors import ConvergenceError, DomainError, HypothesisViolation, ParameterError
from nabasin.families.bounds import ball_samples
from nabasin.families.factorize import HenonParameters
from nabasin.families.maps import CompositeMap, ElementaryMap
from nabasin.families.sequence import AutoSequence, SequenceMetadata
from nabasin.solver.affine import backward_orbit, tail_length

log = logging.getLogger("solver")

SlotKind = Literal["alpha", "rho", "monic", "linear"]

MAX_TAIL = 4000
_TRIANGULAR_TOL = 1e-10
_CLOSED_FORM_TOL = 1e-8


@dataclass(frozen=True)
class SlotRecord:
    coordinate: int  # 1-based
    index: MultiIndex
    kind: SlotKind
    alpha: np.ndarray  # alpha_n, n = 1..H
    rho: np.ndarray  # rho_n, n = 1..H+1
    beta_min: Optional[float] = None


@dataclass
class CoefficientTable:
    """(coordinate, index, time) -> (alpha, rho), plus the triangular linear data."""

    k: int
    k0: int
    linear: np.ndarray  # (H, k, k)
    slots: dict = field(default_factory=dict)  # (coordinate, MultiIndex) -> SlotRecord
    order: list = field(default_factory=list)

    def add(self, record: SlotRecord) -> None:
        key = (record.coordinate, record.index)
        self.slots[key] = record
        self.order.append(key)

    def _record(self, i: int, m) -> SlotRecord:
        try:
            return self.slots[(i, MultiIndex(m))]
        except KeyError as exc:
            raise ParameterError(f"no slot for coordinate {i} index {tuple(m)}") from exc

    def kind(self, i: int, m) -> SlotKind:
        if sum(m) == 1:
            return "linear"
        return self._record(i, m).kind

    def alpha(self, i: int, m, n: int) -> complex:
        return complex(self._record(i, m).alpha[n - 1])

    def rho(self, i: int, m, n: int) -> complex:
        return complex(self._record(i, m).rho[n - 1])

    def linear_data(self, n: int) -> np.ndarray:
        return self.linear[n - 1]


@dataclass(frozen=True, eq=False)
class ConjugationSolution:
    k: int
    k0: int
    horizon: int
    window: int  # H = horizon + tail
    tail: int
    tol: float
    basis: dense.MonomialBasis
    table: CoefficientTable
    factor_coords: tuple[int, ...]  # 0-based coordinate of each factor, in application order
    factor_diag: np.ndarray  # (k, H)
    factor_poly: np.ndarray  # (k, H, M)
    X: np.ndarray  # (H+1, k, M)
    metadata: SequenceMetadata
    residual: float = 0.0
    residual_by_degree: dict = field(default_factory=dict)
    bound_constant: float = 0.0
    h_bound: float = 1.0
    top_degree_zero: tuple[int, ...] = ()

    def _check_time(self, n: int, last: int) -> int:
        if not 1 <= n <= last:
            raise ParameterError(f"time {n} outside the solved window 1..{last}")
        return n - 1

    def _poly(self, s: int, t: int) -> Polynomial:
        row = self.factor_poly[s, t]
        B = self.basis
        coeffs = {B.monomial(col): row[col] for col in np.flatnonzero(row != 0)}
        return Polynomial(k=self.k, max_degree=self.k0, coeffs=coeffs)

    def g(self, n: int) -> CompositeMap:
        t = self._check_time(n, self.window)
        factors = [
            ElementaryMap.from_full(self.k, c + 1, self.factor_diag[s, t], self._poly(s, t))
            for s, c in enumerate(self.factor_coords)
        ]
        return CompositeMap(tuple(factors))

    def h_germ(self, n: int) -> GermMap:
        t = self._check_time(n, self.window + 1)
        return GermMap.from_dense(self.X[t], self.basis)

    @property
    def g_seq(self) -> AutoSequence:
        return AutoSequence(self.k, self.g, replace(self.metadata, label=f"{self.metadata.label}|g"))

    def henon_parameters(self, n: int) -> HenonParameters:
        if self.k != 2:
            raise ParameterError("Henon parameters exist only for k = 2")
        t = self._check_time(n, self.window)
        B = self.basis
        c = complex(self.factor_diag[0, t])
        q_terms = [((j,), self.factor_poly[0, t, B.column((j, 0))]) for j in range(1, self.k0 + 1)]
        p_terms = [((j,), self.factor_poly[1, t, B.column((0, j))] * c**j) for j in range(2, self.k0 + 1)]
        return HenonParameters(
            a=complex(self.factor_diag[1, t]),
            c=c,
            b=complex(self.factor_poly[0, t, B.column((1, 0))]),
            p=Polynomial.from_terms(1, p_terms, max_degree=self.k0),
            q=Polynomial.from_terms(1, q_terms, max_degree=self.k0),
        )

    def with_h_coefficient(self, n: int, i: int, m, delta: complex) -> "ConjugationSolution":
        """Copy with coefficient (i, m) of h_n shifted by delta."""
        t = self._check_time(n, self.window + 1)
        X = self.X.copy()
        X[t, i - 1, self.basis.column(m)] += delta
        return replace(self, X=X)


# ---------------------------
# Setup helpers
# ---------------------------


def _lower_triangular(L: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.max(np.abs(L), axis=(-2, -1)))
    upper = np.max(np.abs(np.triu(L, 1)), axis=(-2, -1))
    bad = np.flatnonzero(upper > _TRIANGULAR_TOL * scale)
    if bad.size:
        raise DomainError(
            f"linear part of f_{int(bad[0]) + 1} is not lower triangular; run lower_triangular_normalize first"
        )
    return np.tril(L)


def _triangular_inverse(L: np.ndarray) -> np.ndarray:
    return np.tril(np.linalg.inv(L))


def _chain(mats: list[np.ndarray], k: int, H: int) -> np.ndarray:
    """mats[-1] @ ... @ mats[0]; identity for an empty list."""
    out = np.broadcast_to(np.eye(k, dtype=complex), (H, k, k)).copy()
    for M in mats:
        out = M @ out
    return out


@dataclass
class _Factors:
    coords: tuple[int, ...]
    diag: np.ndarray  # (k, H)
    poly: np.ndarray  # (k, H, M)
    lin: list[np.ndarray]  # per factor (H, k, k)


def _factor_layout(L: np.ndarray, B: dense.MonomialBasis) -> _Factors:
    H, k, _ = L.shape
    poly = np.zeros((k, H, B.size), dtype=complex)
    lin = []
    if k == 2:
        coords = (1, 0)
        diag = np.stack([L[:, 1, 1], L[:, 0, 0]])
        poly[0][:, B.column((1, 0))] = L[:, 1, 0]
        T2 = np.broadcast_to(np.eye(2, dtype=complex), (H, 2, 2)).copy()
        T2[:, 1, :] = L[:, 1, :]
        T1 = np.broadcast_to(np.eye(2, dtype=complex), (H, 2, 2)).copy()
        T1[:, 0, 0] = L[:, 0, 0]
        lin = [T2, T1]
    else:
        coords = tuple(range(k))
        diag = np.stack([L[:, i, i] for i in range(k)])
        for s in range(k):
            U = np.broadcast_to(np.eye(k, dtype=complex), (H, k, k)).copy()
            U[:, :s, :] = L[:, :s, :]
            row = np.einsum("tj,tjl->tl", L[:, s, :], _triangular_inverse(U))
            row[:, s + 1 :] = 0.0
            T = np.broadcast_to(np.eye(k, dtype=complex), (H, k, k)).copy()
            T[:, s, :] = row
            T[:, s, s] = L[:, s, s]
            lin.append(T)
            for l in range(s):
                unit = tuple(1 if p == l else 0 for p in range(k))
                poly[s][:, B.column(unit)] = row[:, l]
    return _Factors(coords, diag, poly, lin)


def _apply_factors(Y: np.ndarray, fac: _Factors, Bj: dense.MonomialBasis, B: dense.MonomialBasis) -> np.ndarray:
    Y = Y.copy()
    for s, c in enumerate(fac.coords):
        P = dense.restrict(fac.poly[s], B, Bj)
        powers = dense.powers(Y, Bj)
        Y[:, c, :] = fac.diag[s][:, None] * Y[:, c, :] + np.einsum("tm,tmj->tj", P, powers)
    return Y


# ---------------------------
# Solve
# ---------------------------


def _resolve_bounds(f: AutoSequence, L: np.ndarray) -> tuple[float, float]:
    if f.bounds is not None:
        return f.bounds.A, f.bounds.B
    moduli = np.abs(np.diagonal(L, axis1=1, axis2=2))
    A, B = float(moduli.min()), float(moduli.max())
    log.warning("solve_without_bounds using diagonal moduli A=%.6g B=%.6g", A, B)
    return A, B


def _solve_window(f: AutoSequence, k0: int, N: int, T: int):
    k = f.k
    H = N + T
    B = dense.basis(k, k0)
    L = _lower_triangular(np.stack([f.linear_part(n) for n in range(1, H + 1)]))
    Linv = _triangular_inverse(L)

    forward = np.stack([f.germ(n, k0).to_dense(B) for n in range(1, H + 1)])
    cols1 = [B.column(tuple(1 if p == j else 0 for p in range(k))) for j in range(k)]
    forward[:, :, cols1] = L
    F = dense.invert(forward, B)

    fac = _factor_layout(L, B)
    X = np.broadcast_to(dense.identity(B), (H + 1, k, B.size)).copy()
    table = CoefficientTable(k=k, k0=k0, linear=L)
    beta_min, coef_max = np.inf, 0.0

    A_before = [_chain(fac.lin[:s], k, H) for s in range(len(fac.coords))]
    A_after = [_chain(fac.lin[s + 1 :], k, H) for s in range(len(fac.coords))]
    factor_of = {c: s for s, c in enumerate(fac.coords)}

    for j in range(2, k0 + 1):
        t0 = time.perf_counter()
        Bj = dense.basis(k, j)
        cols = Bj.degree_indices(j)
        pos = {tuple(int(e) for e in Bj.exponents[col]): p for p, col in enumerate(cols)}

        Y = dense.compose(dense.restrict(X[:H], B, Bj), dense.restrict(F, B, Bj), Bj)
        D = _apply_factors(Y, fac, Bj, B)[:, :, cols]

        SX = dense.substitution(Linv, Bj, j)
        S_fac = [dense.substitution(np.tril(A_before[s] @ Linv), Bj, j) for s in range(len(fac.coords))]
        diag_X = np.diagonal(Linv, axis1=1, axis2=2)

        def sigma(s: int, mu: tuple) -> np.ndarray:
            # k = 2 first-coordinate factor stores p(y / c)
            if k == 2 and fac.coords[s] == 0:
                return L[:, 1, 1] ** (-sum(mu))
            return np.ones(H, dtype=complex)

        def alpha_response(s: int, mu: tuple):
            c = fac.coords[s]
            scale = sigma(s, mu)[:, None, None]
            R = scale * A_after[s][:, :, c][:, :, None] * S_fac[s][:, pos[mu], :][:, None, :]
            diag = np.diagonal(np.tril(A_before[s] @ Linv), axis1=1, axis2=2)
            closed = A_after[s][:, c, c] * sigma(s, mu) * np.prod(diag ** np.array(mu), axis=1)
            return R, closed

        def rho_response(c: int, mu: tuple):
            R = L[:, :, c][:, :, None] * SX[:, pos[mu], :][:, None, :]
            closed = L[:, c, c] * np.prod(diag_X ** np.array(mu), axis=1)
            return R, closed

        done = np.zeros((k, len(cols)), dtype=bool)

        def check_triangular(R: np.ndarray, c: int, mu: tuple) -> None:
            scale = max(1.0, float(np.max(np.abs(R))))
            leak = float(np.max(np.abs(R[:, done]), initial=0.0))
            if leak > _TRIANGULAR_TOL * scale:
                raise HypothesisViolation(
                    f"slot ({c + 1}, {mu}) feeds an earlier slot (|response| = {leak:.3g}); processing order is not triangular"
                )

        def check_closed(value: np.ndarray, closed: np.ndarray, what: str, c: int, mu: tuple) -> None:
            err = np.max(np.abs(value - closed) / np.maximum(1.0, np.abs(closed)))
            if err > _CLOSED_FORM_TOL:
                raise HypothesisViolation(f"{what} of slot ({c + 1}, {mu}) differs from its closed form by {err:.3g}")

        if k == 2 and j == k0:
            # monic top degree: alpha^1_{0,k0} = alpha^2_{k0,0} = 1
            for s, c in enumerate(fac.coords):
                mu = (0, k0) if c == 0 else (k0, 0)
                R, _ = alpha_response(s, mu)
                D = D + R
                fac.poly[s][:, B.column(mu)] = sigma(s, mu)

        for c in range(k):
            for m in slot_ordering(k, j, c + 1):
                mu = tuple(m)
                p = pos[mu]
                gamma = D[:, c, p]
                alpha = np.zeros(H, dtype=complex)
                rho = np.zeros(H + 1, dtype=complex)
                monic = k == 2 and j == k0 and mu[c] == 0
                if mu[c] == 0 and not monic:
                    s = factor_of[c]
                    R, closed = alpha_response(s, mu)
                    kappa = R[:, c, p]
                    check_closed(kappa, closed, "alpha response", c, mu)
                    if np.any(np.abs(kappa) == 0):
                        raise HypothesisViolation(f"alpha slot ({c + 1}, {mu}) has a vanishing response")
                    check_triangular(R, c, mu)
                    alpha = -gamma / kappa
                    fac.poly[s][:, B.column(mu)] = sigma(s, mu) * alpha
                    D = D + alpha[:, None, None] * R
                    kind: SlotKind = "alpha"
                    slot_beta = None
                else:
                    R, closed = rho_response(c, mu)
                    beta = R[:, c, p]
                    check_closed(beta, closed, "expanding factor", c, mu)
                    weak = np.flatnonzero(np.abs(beta) <= 1.0)
                    if weak.size:
                        t = int(weak[0])
                        raise HypothesisViolation(
                            f"rho slot ({c + 1}, {mu}) at n={t + 1} has |beta| = {abs(beta[t]):.6g} <= 1"
                        )
                    check_triangular(R, c, mu)
                    rho = backward_orbit(beta, gamma)
                    X[:, c, B.column(mu)] = rho
                    D = D + rho[:H, None, None] * R
                    kind = "monic" if monic else "rho"
                    slot_beta = float(np.min(np.abs(beta)))
                    beta_min = min(beta_min, slot_beta)
                    coef_max = max(coef_max, float(np.max(np.abs(beta))), float(np.max(np.abs(gamma))))
                done[c, p] = True
                table.add(SlotRecord(c + 1, MultiIndex(mu), kind, alpha, rho, slot_beta))

        log.info("solve_degree_done degree=%d slots=%d secs=%.3f", j, int(done.sum()), time.perf_counter() - t0)

    return B, L, fac, X, table, beta_min, coef_max


def solve_conjugation(
    f: AutoSequence,
    k0: Optional[int] = None,
    horizon: Optional[int] = None,
    tol: Optional[float] = None,
) -> ConjugationSolution:
    settings = get_settings()
    N = horizon if horizon is not None else settings.HORIZON
    tol = tol if tol is not None else settings.TOL
    if N < 1:
        raise ParameterError(f"horizon must be >= 1, got {N}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if k0 is None:
        if f.bounds is None:
            raise ParameterError("k0 is required when the sequence carries no attraction bounds")
        k0 = f.bounds.k0
    if k0 < 2:
        raise ParameterError(f"k0 must be >= 2, got {k0}")
    k = f.k
    if k < 2:
        raise ParameterError("conjugation needs k >= 2")

    L_window = _lower_triangular(np.stack([f.linear_part(n) for n in range(1, N + 1)]))
    A, Bc = _resolve_bounds(f, L_window)
    if Bc**k0 >= A:
        raise HypothesisViolation(f"B^k0 = {Bc**k0:.6g} >= A = {A:.6g} for k0={k0}")

    c_guess = 1.0 / Bc if k > 2 else min(1.0 / Bc, A / Bc**k0)
    T = tail_length(c_guess, max(2.0, 1.0 / A**k0), tol)
    started = time.perf_counter()
    for _ in range(4):
        if T > MAX_TAIL:
            raise ConvergenceError(f"tail length {T} exceeds {MAX_TAIL}")
        B, L, fac, X, table, beta_min, coef_max = _solve_window(f, k0, N, T)
        if not np.isfinite(beta_min):
            break
        needed = tail_length(beta_min, max(beta_min, coef_max), tol)
        if needed <= T:
            break
        log.info("solve_extend_tail from=%d to=%d", T, needed)
        T = needed

    sol = ConjugationSolution(
        k=k,
        k0=k0,
        horizon=N,
        window=N + T,
        tail=T,
        tol=tol,
        basis=B,
        table=table,
        factor_coords=fac.coords,
        factor_diag=fac.diag,
        factor_poly=fac.poly,
        X=X,
        metadata=f.metadata,
    )

    by_degree = residual_by_degree(sol, f, range(1, N + 1))
    res = max(by_degree.values(), default=0.0)
    sol = replace(
        sol,
        residual=res,
        residual_by_degree=by_degree,
        bound_constant=_bound_constant(table, N),
        h_bound=_h_bound(sol, f),
        top_degree_zero=_top_degree_zero(sol) if k >= 3 else (),
    )
    log.info(
        "solve_done k=%d k0=%d horizon=%d tail=%d residual=%.3g secs=%.3f",
        k, k0, N, T, res, time.perf_counter() - started,
    )
    if not res <= tol:
        rows = [{"degree": j, "max_defect": v} for j, v in sorted(by_degree.items())]
        raise ConvergenceError(f"germ relation residual {res:.3g} exceeds tol {tol:.3g}", rows)
    return sol


# ---------------------------
# Residual and extras
# ---------------------------


def residual_by_degree(sol: ConjugationSolution, f: AutoSequence, n_range) -> dict[int, float]:
    """Max |coeff([g_n o h_n o f_n^{-1}]_{k0}) - coeff(h_{n+1})| per degree, by independent composition."""
    B = sol.basis
    out = {j: 0.0 for j in range(1, sol.k0 + 1)}
    for n in n_range:
        inner = compose_truncated(sol.h_germ(n), f.inverse_germ(n, sol.k0), sol.k0)
        lhs = compose_truncated(sol.g(n).germ(sol.k0), inner, sol.k0).to_dense(B)
        diff = np.abs(lhs - sol.h_germ(n + 1).to_dense(B))
        for j in out:
            cols = B.degree_indices(j)
            out[j] = max(out[j], float(np.max(diff[:, cols], initial=0.0)))
    return out


def residual(sol: ConjugationSolution, f: AutoSequence, n_range=None) -> float:
    n_range = range(1, sol.horizon + 1) if n_range is None else n_range
    return max(residual_by_degree(sol, f, n_range).values(), default=0.0)


def _bound_constant(table: CoefficientTable, N: int) -> float:
    out = 0.0
    for record in table.slots.values():
        out = max(out, float(np.max(np.abs(record.alpha[:N]), initial=0.0)))
        out = max(out, float(np.max(np.abs(record.rho[: N + 1]), initial=0.0)))
    return out


def _h_bound(sol: ConjugationSolution, f: AutoSequence) -> float:
    r = f.bounds.r if f.bounds is not None else 1e-2
    Z = ball_samples(sol.k, r, 16)
    norms = np.linalg.norm(Z, axis=0)
    best = 0.0
    for n in range(1, sol.horizon + 1):
        image = sol.h_germ(n).evaluate(Z)
        best = max(best, float(np.max(np.linalg.norm(image, axis=0) / norms)))
    return best


def _top_degree_zero(sol: ConjugationSolution) -> tuple[int, ...]:
    cols = sol.basis.degree_indices(sol.k0)
    flagged = []
    for s, c in enumerate(sol.factor_coords):
        if np.all(np.abs(sol.factor_poly[s, : sol.horizon][:, cols]) <= ZERO_TOL):
            flagged.append(c + 1)
    return tuple(sorted(flagged))


# ---------------------------
# Artifacts
# ---------------------------


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def solution_to_json(sol: ConjugationSolution) -> dict[str, Any]:
    g_rows = []
    for n in range(1, sol.horizon + 1):
        factors = [
            {"coordinate": e.i, "a": _pair(e.a), "P": e.P_full.to_json()} for e in sol.g(n).factors
        ]
        g_rows.append({"n": n, "factors": factors})
    return {
        "k": sol.k,
        "k0": sol.k0,
        "horizon": sol.horizon,
        "window": sol.window,
        "tail_length": sol.tail,
        "tol": sol.tol,
        "residual": sol.residual,
        "residual_by_degree": {str(j): v for j, v in sorted(sol.residual_by_degree.items())},
        "bound_constant": sol.bound_constant,
        "h_bound": sol.h_bound,
        "top_degree_zero": list(sol.top_degree_zero),
        "slots": [
            {"coordinate": i, "index": list(m), "kind": sol.table.slots[(i, m)].kind}
            for i, m in sol.table.order
        ],
        "g": g_rows,
        "h": [sol.h_germ(n).to_json() for n in range(1, sol.horizon + 2)],
    }


def residual_rows(sol: ConjugationSolution) -> list[dict[str, Any]]:
    return [{"degree": j, "max_defect": v} for j, v in sorted(sol.residual_by_degree.items())]
