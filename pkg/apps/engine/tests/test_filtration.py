import math

import numpy as np
import pytest

from nabasin.core.errors import ParameterError, SearchFailure
from nabasin.dynamics.filtration import (
    find_filtration_spec,
    in_V,
    in_V_minus,
    in_V_plus,
    in_W_minus,
    sample_V_minus,
    sample_V_plus,
    verify_filtration,
)
from nabasin.families.registry import build_sequence

from conftest import diagonal_spec


def test_region_predicates():
    z = np.array([[0, 4, 1], [0, 1, 0], [4, 1, 2]], dtype=complex)
    assert in_V(z, 3, 2.0).tolist() == [True, False, True]
    assert in_V_plus(z, 2.0).tolist() == [True, False, True]
    assert in_V_minus(z, 2.0).tolist() == [False, True, False]
    assert in_W_minus(z, 2.0).tolist() == [False, True, True]
    with pytest.raises(ParameterError):
        in_V(z, 4, 2.0)


def test_samplers_land_in_their_regions():
    rng = np.random.default_rng(3)
    R = 8.0
    plus = sample_V_plus(3, R, 200, rng)
    minus = sample_V_minus(3, R, 200, rng)
    assert np.all(np.max(np.abs(plus[1:]), axis=0) >= R * (1 - 1e-12))
    assert np.all(np.abs(minus[0]) >= R * (1 - 1e-12))
    assert np.mean(in_V_plus(plus, R)) > 0.5
    assert np.mean(in_V_minus(minus, R)) > 0.5


def test_found_radius_is_a_power_of_two(filtration):
    exp = math.log2(filtration.R)
    assert exp == int(exp)
    assert 0 < filtration.m_const < 1 < filtration.M_const
    assert filtration.inverse_lower > 0


def test_found_spec_verifies(perturbed, filtration):
    report = verify_filtration(perturbed.seq, filtration, samples=200, seed=0)
    assert report.ok
    assert set(report.checked) == {"sandwich", "inclusion", "inverse_growth", "nesting"}
    assert report.first_violation() is None


def test_radius_cap_too_small(perturbed):
    with pytest.raises(SearchFailure) as info:
        find_filtration_spec(perturbed.seq, r_cap_exp=1, samples=50)
    assert info.value.inequality in {"dominance", "upper", "inclusion", "inverse_growth"}


def test_needs_perturbed_shift():
    seq = build_sequence(diagonal_spec()).seq
    with pytest.raises(ParameterError):
        find_filtration_spec(seq)


def test_tail_and_radius_change(filtration):
    d, Mt = filtration.d, filtration.Mtilde
    assert filtration.tail(0) - filtration.tail(1) == pytest.approx(Mt / d)
    assert filtration.tail(3) == pytest.approx(Mt / (d**3 * (d - 1)))
    wider = filtration.with_radius(2 * filtration.R)
    assert wider.R == 2 * filtration.R
    assert wider.Mtilde == filtration.Mtilde
    assert filtration.to_json()["R"] == filtration.R
