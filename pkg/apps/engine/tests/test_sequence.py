import numpy as np
import pytest

from nabasin.algebra.polynomial import Polynomial
from nabasin.core.errors import ParameterError
from nabasin.families.maps import LinearMap, WeakShift
from nabasin.families.sequence import (
    AutoSequence,
    block_compose,
    family_bounds_from_maps,
    least_k0,
    periodic_restriction,
    perturb,
)


@pytest.mark.parametrize("A, B, k0", [(0.3, 0.6, 3), (0.5, 0.6, 2), (0.1, 0.9, 22)])
def test_least_k0(A, B, k0):
    assert least_k0(A, B) == k0
    assert B**k0 < A <= B ** (k0 - 1)


def test_least_k0_rejects_bad_bounds():
    with pytest.raises(ParameterError):
        least_k0(0.6, 0.3)


def test_provider_is_memoized():
    calls = []

    def provider(n):
        calls.append(n)
        return LinearMap(np.eye(2) * 0.5)

    seq = AutoSequence(2, provider)
    assert seq[3] is seq[3]
    assert calls == [3]


def test_index_must_be_positive():
    seq = AutoSequence.periodic([LinearMap(np.eye(2))])
    with pytest.raises(ParameterError):
        seq[0]


def test_explicit_sequence_is_finite():
    seq = AutoSequence.explicit([LinearMap(np.eye(2))])
    with pytest.raises(ParameterError):
        seq[2]


def test_periodic_restriction_maps_multiples_to_period():
    maps = [LinearMap(np.eye(2) * (j + 1)) for j in range(6)]
    seq = AutoSequence.explicit(maps)
    per = periodic_restriction(seq, 3)
    assert per[6] is seq[3]
    assert per[4] is seq[1]
    assert periodic_restriction(seq, 1)[5] is seq[1]


def test_block_compose_trivial_block():
    seq = AutoSequence.periodic([LinearMap(np.diag([0.5, 0.25]))])
    assert block_compose(seq, 1)[2] is seq[2]


def test_block_compose_multiplies_diagonals():
    seq = AutoSequence.periodic([LinearMap(np.diag([0.5, 0.2])), LinearMap(np.diag([0.4, 0.3]))])
    blocked = block_compose(seq, 2)
    np.testing.assert_allclose(blocked.linear_part(1), np.diag([0.2, 0.06]), atol=1e-15)


def test_perturb_requires_degree_gap():
    p = Polynomial.from_terms(2, [((0, 2), 0.1)])
    seq = AutoSequence.periodic([WeakShift(0.5, p)])
    with pytest.raises(ParameterError):
        perturb(seq, 3)
    assert perturb(seq, 4)[1].d == 4


def test_family_bounds_from_maps():
    maps = [
        WeakShift(0.5, Polynomial.from_terms(2, [((0, 2), 0.1)])),
        WeakShift(0.3j, Polynomial.from_terms(2, [((1, 1), 0.2)])),
    ]
    fam = family_bounds_from_maps(maps, margin=1.0)
    assert fam.m_tilde == pytest.approx(0.3)
    assert fam.M_tilde == pytest.approx(0.5)
    assert fam.d_tilde == 2
    assert fam.m0 == 6
