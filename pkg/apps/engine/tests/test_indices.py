import pytest

from nabasin.algebra.indices import (
    MultiIndex,
    count_indices,
    degree_exact,
    enumerate_indices,
    phi_ordering,
    slot_ordering,
)
from nabasin.core.errors import ParameterError


def test_degree_one_basis():
    family = enumerate_indices(2, "cumulative", max_degree=1)
    assert family.members == {(1, 0), (0, 1)}
    assert len(family) == 2


@pytest.mark.parametrize("max_degree, expected", [(2, 9), (3, 19), (4, 34), (5, 55)])
def test_cumulative_counts_k3(max_degree, expected):
    assert len(enumerate_indices(3, "cumulative", max_degree=max_degree)) == expected
    assert count_indices(3, "cumulative", max_degree=max_degree) == expected


@pytest.mark.parametrize(
    "family, params",
    [
        ("degree", {"degree": 3}),
        ("cumulative", {"max_degree": 3}),
        ("coordinate_free", {"max_degree": 3, "i": 2}),
        ("shifted", {"max_degree": 3, "i": 1}),
        ("zero_prefix", {"degree": 3, "i": 1}),
        ("complement", {"degree": 3, "i": 2}),
    ],
)
def test_closed_form_counts_match_enumeration(family, params):
    assert count_indices(3, family, **params) == len(enumerate_indices(3, family, **params))


def test_enumeration_is_lexicographic():
    members = list(enumerate_indices(3, "degree", degree=2))
    assert members == sorted(members)


def test_phi_ordering_k3_degree2_step2():
    assert phi_ordering(3, 2, 2) == [(0, 1, 1), (0, 2, 0), (1, 0, 1), (1, 1, 0), (2, 0, 0)]


def test_phi_ordering_k3_degree2_step1():
    assert phi_ordering(3, 2, 1) == [(1, 0, 1), (1, 1, 0), (2, 0, 0)]


def test_phi_ordering_k3_degree4_prefix():
    assert phi_ordering(3, 4, 1)[:5] == [(1, 0, 3), (1, 1, 2), (1, 2, 1), (1, 3, 0), (2, 0, 2)]


def test_phi_ordering_covers_indices_touching_leading_coordinates():
    ordering = phi_ordering(3, 3, 2)
    expected = {m for m in degree_exact(3, 3) if m[0] or m[1]}
    assert set(ordering) == expected
    assert len(ordering) == len(expected)


@pytest.mark.parametrize("j, i", [(1, 1), (3, 0), (3, 3)])
def test_phi_ordering_rejects_bad_arguments(j, i):
    with pytest.raises(ParameterError):
        phi_ordering(3, j, i)


def test_slot_ordering_puts_zero_prefix_block_first():
    assert list(slot_ordering(3, 2, 1)) == [
        (0, 0, 2),
        (0, 1, 1),
        (0, 2, 0),
        (1, 0, 1),
        (1, 1, 0),
        (2, 0, 0),
    ]


def test_slot_ordering_last_coordinate_uses_all_indices():
    assert set(slot_ordering(3, 3, 3)) == set(degree_exact(3, 3))


def test_multi_index_rejects_negative_exponent():
    with pytest.raises(ParameterError):
        MultiIndex((1, -1))


def test_multi_index_first_nonzero():
    assert MultiIndex((0, 2, 1)).first_nonzero == 2
    assert MultiIndex((0, 0)).first_nonzero == 3


def test_unknown_family_and_bad_coordinate():
    with pytest.raises(ParameterError):
        enumerate_indices(3, "bogus", degree=2)
    with pytest.raises(ParameterError):
        enumerate_indices(3, "zero_prefix", degree=2, i=3)
    with pytest.raises(ParameterError):
        enumerate_indices(3, "shifted", max_degree=2)
