import numpy as np
import pytest

from nabasin.algebra.germs import GermMap
from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import DomainError, ParameterError, UnsupportedDirection
from nabasin.families.maps import (
    CompositeMap,
    ElementaryMap,
    HenonMap,
    LinearMap,
    PerturbedWeakShift,
    PolynomialMap,
    SwappedHenon,
    WeakShift,
    conjugate,
    evaluate,
)


def henon_square() -> HenonMap:
    return HenonMap(1.0, Polynomial.from_terms(1, [((2,), 1.0)]))


def weak_shift() -> WeakShift:
    p = Polynomial.from_terms(2, [((0, 2), 0.1), ((1, 1), -0.05j)])
    return WeakShift(0.5, p)


def test_henon_hand_evaluation():
    h = henon_square()
    z1 = h.forward(np.array([1.0, 1.0]))
    np.testing.assert_allclose(z1, [1.0, 2.0])
    np.testing.assert_allclose(h.forward(z1), [2.0, 5.0])


def test_henon_inverse_undoes_forward():
    h = HenonMap(0.3 + 0.1j, Polynomial.from_terms(1, [((2,), 1.0), ((3,), 0.2)]))
    z = np.array([[0.4, -1.0], [0.2j, 0.5]])
    np.testing.assert_allclose(h.inverse(h.forward(z)), z, atol=1e-14)


def test_henon_needs_nonzero_delta_and_degree_two():
    with pytest.raises(DomainError):
        HenonMap(0.0, Polynomial.from_terms(1, [((2,), 1.0)]))
    with pytest.raises(DomainError):
        HenonMap(1.0, Polynomial.from_terms(1, [((1,), 1.0)]))


def test_origin_is_fixed():
    for m in (henon_square(), weak_shift(), PerturbedWeakShift(weak_shift(), 4)):
        np.testing.assert_array_equal(m.forward(np.zeros(m.k)), np.zeros(m.k))


def test_elementary_substitution():
    T1 = ElementaryMap.from_full(3, 1, 2.0, Polynomial.from_terms(3, [((0, 1, 1), 1.0)]))
    np.testing.assert_allclose(T1.forward(np.array([1.0, 1.0, 1.0])), [3.0, 1.0, 1.0])
    np.testing.assert_allclose(T1.inverse(np.array([3.0, 1.0, 1.0])), [1.0, 1.0, 1.0])


def test_elementary_polynomial_must_avoid_own_coordinate():
    with pytest.raises(DomainError):
        ElementaryMap.from_full(3, 2, 2.0, Polynomial.from_terms(3, [((0, 2, 0), 1.0)]))


def test_weak_shift_roundtrip_and_layout():
    s = weak_shift()
    z = np.array([0.3, -0.2 + 0.1j, 0.7])
    out = s.forward(z)
    np.testing.assert_allclose(out[:2], z[1:])
    np.testing.assert_allclose(s.inverse(out), z, atol=1e-14)


def test_perturbation_vanishes_when_tail_is_zero():
    base = weak_shift()
    pert = PerturbedWeakShift(base, 4)
    z = np.array([0.7, 0.0, 0.0])
    np.testing.assert_allclose(pert.forward(z), base.forward(z))


def test_perturbed_inverse_undoes_forward():
    pert = PerturbedWeakShift(weak_shift(), 5)
    z = np.array([[0.3, 1.2], [0.5j, -0.4], [-0.2, 0.9]])
    np.testing.assert_allclose(pert.inverse(pert.forward(z)), z, atol=1e-12)


def test_perturbation_degree_bound():
    with pytest.raises(ParameterError):
        PerturbedWeakShift(weak_shift(), 3)


def test_germ_agrees_with_forward_for_polynomial_maps():
    pert = PerturbedWeakShift(weak_shift(), 4)
    z = np.array([0.2, 0.1j, -0.3])
    np.testing.assert_allclose(pert.germ(4).evaluate(z), pert.forward(z), atol=1e-14)


def test_polynomial_map_without_inverse():
    m = PolynomialMap(GermMap.identity(2, 2))
    with pytest.raises(UnsupportedDirection):
        evaluate(m, np.zeros(2), "inverse")
    with pytest.raises(ParameterError):
        evaluate(m, np.zeros(2), "sideways")


def test_swapped_henon_is_exchange_conjugate():
    P = Polynomial.from_terms(1, [((2,), 1.0)])
    sw = SwappedHenon(0.5, P)
    z = np.array([0.3, -0.7])
    swap = lambda v: v[::-1]
    np.testing.assert_allclose(sw.forward(z), swap(sw.henon().forward(swap(z))))
    np.testing.assert_allclose(sw.inverse(sw.forward(z)), z, atol=1e-14)


def test_composite_applies_first_to_last():
    h = henon_square()
    lin = LinearMap(np.diag([2.0, 3.0]))
    comp = CompositeMap((lin, h))
    z = np.array([1.0, 1.0])
    np.testing.assert_allclose(comp.forward(z), h.forward(lin.forward(z)))
    np.testing.assert_allclose(comp.inverse(comp.forward(z)), z, atol=1e-14)
    assert comp.degree == 2
    assert comp.germ(2).max_abs_difference(GermMap.linear(np.diag([2.0, 3.0]), 2)) > 0


def test_conjugate_by_unitaries():
    theta = 0.3
    V = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    inner = LinearMap(np.diag([0.5, 0.25]))
    conj = conjugate(inner, V, V)
    z = np.array([1.0, -2.0])
    np.testing.assert_allclose(conj.forward(z), V.T @ np.diag([0.5, 0.25]) @ V @ z, atol=1e-14)


def test_scaled_step_matches_plain_step():
    h = henon_square()
    z = np.array([[1.0, 3.0], [1.0, -2.0j]])
    a = np.max(np.abs(z), axis=0)
    s, w = h.forward_scaled(np.log(a), z / a)
    np.testing.assert_allclose(np.exp(s) * w, h.forward(z), rtol=1e-12)
    np.testing.assert_allclose(np.max(np.abs(w), axis=0), 1.0)
