import numpy as np
import pytest

from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import DomainError, ParameterError
from nabasin.families.factorize import (
    HenonParameters,
    cyclic_exchange,
    elementary_factors,
    henon_factorize_k2,
    henon_sequence,
    shift_factorize,
    shift_sequence,
)
from nabasin.families.maps import CompositeMap, ElementaryMap
from nabasin.families.sequence import AutoSequence, block_compose


def uni(*terms):
    return Polynomial.from_terms(1, terms)


def henon_params(a=0.5, c=0.4 + 0.1j, b=0.2) -> HenonParameters:
    p = uni(((2,), 0.3), ((3,), 1.0))
    q = uni(((1,), b), ((2,), -0.1j), ((3,), 1.0))
    return HenonParameters(a=a, c=c, b=b, p=p, q=q)


def test_linear_henon_factorization():
    h_odd, h_even = henon_factorize_k2(0.5, 0.4, 0.2, Polynomial.zero(1), uni(((1,), 0.2)))
    z = np.array([1.5, -0.5])
    np.testing.assert_allclose(h_odd.forward(h_even.forward(z)), [0.5 * 1.5, 0.4 * -0.5 + 0.2 * 1.5])


def test_henon_factors_compose_to_target():
    params = henon_params()
    h_odd, h_even = henon_factorize_k2(**vars(params), k0=3)
    z = np.array([[0.3, -0.1j], [0.2, 0.4]])
    np.testing.assert_allclose(h_odd.forward(h_even.forward(z)), params.g().forward(z), rtol=1e-13)
    np.testing.assert_array_equal(h_odd.forward(h_even.forward(np.zeros(2))), np.zeros(2))


def test_henon_factors_are_henon_maps_after_exchange():
    h_odd, h_even = henon_factorize_k2(**vars(henon_params()), k0=3)
    assert h_even.henon().P.degree == 3
    assert h_odd.henon().delta == 0.5


def test_non_monic_is_rejected():
    params = henon_params()
    with pytest.raises(DomainError):
        henon_factorize_k2(params.a, params.c, params.b, uni(((3,), 2.0)), params.q, k0=3)


def test_derivative_mismatch_is_rejected():
    params = henon_params()
    with pytest.raises(DomainError):
        henon_factorize_k2(params.a, params.c, 0.7, params.p, params.q, k0=3)


def test_henon_sequence_blocks_recover_targets():
    params = [henon_params(a=0.5), henon_params(a=0.6j)]
    seq = henon_sequence(lambda n: params[n - 1], k0=3)
    blocked = block_compose(seq, 2)
    z = np.array([0.1, 0.2])
    for n in (1, 2):
        np.testing.assert_allclose(blocked[n].forward(z), params[n - 1].g().forward(z), rtol=1e-13)


def t_form(rng) -> CompositeMap:
    factors = []
    for i in range(1, 4):
        terms = [((a, b), 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())) for a, b in ((1, 0), (2, 0), (1, 1), (0, 2))]
        factors.append(ElementaryMap(3, i, 0.4 + 0.1 * i, Polynomial.from_terms(2, terms)))
    return CompositeMap(tuple(factors))


def test_shift_factorization_composes_to_g():
    g = t_form(np.random.default_rng(1))
    shifts = shift_factorize(g)
    assert [s.a for s in shifts] == [f.a for f in g.factors]
    z = np.array([[0.3, 1.0], [-0.2j, 0.5], [0.1, -0.7]])
    w = z
    for s in shifts:
        w = s.forward(w)
    np.testing.assert_allclose(w, g.forward(z), rtol=1e-12)


def test_partial_shift_products_are_cyclic_exchanges():
    g = t_form(np.random.default_rng(2))
    shifts = shift_factorize(g)
    z = np.array([0.4, 0.3, -0.2])
    w, t = z, z
    for l, (s, f) in enumerate(zip(shifts, g.factors), start=1):
        w, t = s.forward(w), f.forward(t)
        np.testing.assert_allclose(w, cyclic_exchange(t, l), atol=1e-14)


def test_shift_sequence_blocks_recover_g():
    rng = np.random.default_rng(3)
    gs = [t_form(rng) for _ in range(2)]
    g_seq = AutoSequence.explicit(gs)
    blocked = block_compose(shift_sequence(g_seq), 3)
    z = np.array([0.2, -0.1, 0.3j])
    for n in (1, 2):
        np.testing.assert_allclose(blocked[n].forward(z), gs[n - 1].forward(z), rtol=1e-12)


def test_factor_order_is_checked():
    g = t_form(np.random.default_rng(4))
    swapped = CompositeMap((g.factors[1], g.factors[0], g.factors[2]))
    with pytest.raises(ParameterError):
        shift_factorize(swapped)


def test_elementary_factors_reject_own_coordinate():
    polys = [Polynomial.from_terms(3, [((2, 0, 0), 1.0)])] + [Polynomial.zero(3)] * 2
    with pytest.raises(DomainError):
        elementary_factors([0.5, 0.5, 0.5], polys)
