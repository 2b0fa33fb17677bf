import numpy as np
import pytest

from nabasin.algebra import dense
from nabasin.algebra.germs import GermMap, compose_truncated, homogeneous_coefficients, invert_germ, truncate
from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import DomainError, ParameterError


def poly2(*terms, order=3):
    return Polynomial.from_terms(2, terms, max_degree=order)


def germ2(first, second, order=3):
    return GermMap(2, order, (first, second))


X = ((1, 0), 1.0)
Y = ((0, 1), 1.0)


def test_truncate_identity():
    ident = GermMap.identity(3, 4)
    assert truncate(ident, 2).max_abs_difference(GermMap.identity(3, 2)) == 0.0


def test_truncate_drops_cubic_term():
    g = germ2(poly2(X, ((0, 3), 1.0)), poly2(Y))
    assert truncate(g, 2).max_abs_difference(GermMap.identity(2, 2)) == 0.0


def test_truncate_keeps_quadratic_term():
    g = germ2(poly2(X, ((1, 1), 1.0), ((2, 1), 1.0)), poly2(Y))
    out = truncate(g, 2)
    assert out.coefficient(1, (1, 1)) == 1.0
    assert out.coefficient(1, (2, 1)) == 0.0
    assert out.order == 2


def test_compose_with_identity_truncates():
    g = germ2(poly2(X, ((0, 2), 2.0), ((1, 2), 1.0)), poly2(Y, ((2, 0), -1.0)))
    out = compose_truncated(GermMap.identity(2, 3), g, 2)
    assert out.max_abs_difference(truncate(g, 2)) == 0.0


def test_compose_drops_degree_three_cross_term():
    f = germ2(poly2(X, ((0, 2), 1.0)), poly2(Y))
    g = germ2(poly2(X), poly2(Y, ((2, 0), 1.0)))
    out = compose_truncated(f, g, 2)
    expected = germ2(poly2(X, ((0, 2), 1.0), order=2), poly2(Y, ((2, 0), 1.0), order=2), order=2)
    assert out.max_abs_difference(expected) == pytest.approx(0.0, abs=1e-15)


def test_compose_linear_is_matrix_product():
    A = np.array([[1.0, 2.0], [0.5, -1.0]])
    B = np.array([[0.0, 1.0], [3.0, 1.0j]])
    out = compose_truncated(GermMap.linear(A, 3), GermMap.linear(B, 3), 3)
    np.testing.assert_allclose(out.linear_part(), A @ B, atol=1e-15)


def test_compose_rejects_constant_term():
    g = germ2(poly2(((0, 0), 1.0), X), poly2(Y))
    with pytest.raises(DomainError):
        compose_truncated(GermMap.identity(2, 2), g, 2)


def test_invert_shear():
    f = germ2(poly2(X, ((0, 2), 1.0), order=2), poly2(Y, order=2), order=2)
    expected = germ2(poly2(X, ((0, 2), -1.0), order=2), poly2(Y, order=2), order=2)
    assert invert_germ(f, 2).max_abs_difference(expected) == pytest.approx(0.0, abs=1e-15)


def test_invert_identity_and_linear():
    assert invert_germ(GermMap.identity(3, 3), 3).max_abs_difference(GermMap.identity(3, 3)) == 0.0
    M = np.array([[2.0, 0.0], [1.0, 0.5]])
    np.testing.assert_allclose(invert_germ(GermMap.linear(M, 2), 2).linear_part(), np.linalg.inv(M), atol=1e-14)


def test_inverse_composes_to_identity():
    f = germ2(poly2(((1, 0), 0.5), ((0, 2), 0.3), ((1, 1), -0.2)), poly2(((1, 0), 0.1), ((0, 1), 0.7), ((2, 0), 1.0)))
    inv = invert_germ(f, 3)
    assert compose_truncated(f, inv, 3).max_abs_difference(GermMap.identity(2, 3)) < 1e-12
    assert compose_truncated(inv, f, 3).max_abs_difference(GermMap.identity(2, 3)) < 1e-12


def test_invert_singular():
    with pytest.raises(DomainError):
        invert_germ(GermMap.linear(np.array([[1.0, 2.0], [2.0, 4.0]]), 2), 2)


def test_germ_component_count_checked():
    with pytest.raises(ParameterError):
        GermMap(2, 2, (poly2(X),))


def test_homogeneous_coefficients_are_one_based():
    g = germ2(poly2(X, ((0, 2), 3.0)), poly2(Y))
    assert homogeneous_coefficients(g, 2) == {(1, (0, 2)): 3.0}


def test_dense_roundtrip_preserves_coefficients():
    g = germ2(poly2(X, ((1, 1), 1j)), poly2(Y, ((0, 3), -2.0)))
    B = dense.basis(2, 3)
    assert GermMap.from_dense(g.to_dense(B), B).max_abs_difference(g) == 0.0


def test_polynomial_elides_tiny_coefficients_and_evaluates_batches():
    p = Polynomial.from_terms(2, [((1, 0), 2.0), ((0, 2), 1e-17), ((1, 1), 1.0)])
    assert set(p.coeffs) == {(1, 0), (1, 1)}
    z = np.array([[1.0, 2.0], [3.0, -1.0]])
    np.testing.assert_allclose(p.evaluate(z), [2.0 + 3.0, 4.0 - 2.0])


def test_polynomial_drop_variable_checks_dependence():
    p = Polynomial.from_terms(3, [((0, 1, 1), 1.0)])
    assert p.drop_variable(1).coeffs == {(1, 1): 1.0}
    with pytest.raises(DomainError):
        p.drop_variable(2)


def random_germ(rng, k, order, scale=0.3):
    B = dense.basis(k, order)
    F = scale * (rng.standard_normal((k, B.size)) + 1j * rng.standard_normal((k, B.size)))
    F[:, B.column((0,) * k)] = 0.0
    return GermMap.from_dense(F, B)


@pytest.mark.parametrize("k,order", [(1, 6), (2, 6), (3, 5), (4, 4)])
def test_truncated_composition_is_associative(k, order):
    rng = np.random.default_rng(100 * k + order)
    for _ in range(3):
        f, g, h = (random_germ(rng, k, order) for _ in range(3))
        left = compose_truncated(compose_truncated(f, g, order), h, order)
        right = compose_truncated(f, compose_truncated(g, h, order), order)
        scale = max(1.0, float(np.max(np.abs(left.to_dense(dense.basis(k, order))))))
        assert left.max_abs_difference(right) <= 1e-12 * scale


@pytest.mark.parametrize("k,order", [(2, 6), (3, 5), (4, 4)])
def test_truncate_is_idempotent(k, order):
    g = random_germ(np.random.default_rng(k), k, order)
    for m in range(1, order + 1):
        once = truncate(g, m)
        assert truncate(once, m).max_abs_difference(once) == 0.0
        assert truncate(once, m).order == m
        for lower in range(1, m + 1):
            assert truncate(once, lower).max_abs_difference(truncate(g, lower)) == 0.0


def test_zero_tolerance_comes_from_settings(monkeypatch):
    from nabasin.algebra import polynomial
    from nabasin.core.config import get_settings

    assert polynomial.ZERO_TOL == get_settings().ZERO_TOL
    monkeypatch.setattr(polynomial, "ZERO_TOL", 1e-6)
    p = Polynomial.from_terms(2, [((1, 0), 1.0), ((0, 1), 1e-8)])
    assert set(p.coeffs) == {(1, 0)}
