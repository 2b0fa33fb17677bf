import numpy as np
import pytest

from nabasin.core.errors import EscapedToInfinity, ParameterError
from nabasin.dynamics.orbits import orbit, sup_norm
from nabasin.families.maps import LinearMap
from nabasin.families.sequence import AutoSequence


def scaling():
    return AutoSequence.periodic([LinearMap(np.diag([2.0, 3.0]))])


def test_forward_orbit():
    pts = orbit(scaling(), [1.0, 1.0], 3)
    assert len(pts) == 4
    np.testing.assert_allclose(pts[3], [8.0, 27.0])


def test_inverse_orbit():
    pts = orbit(scaling(), [1.0, 1.0], 2, direction="inverse")
    np.testing.assert_allclose(pts[1], [0.5, 1 / 3])
    np.testing.assert_allclose(pts[2], [0.25, 1 / 9])


def test_zero_length_and_fixed_point():
    assert len(orbit(scaling(), [1.0, 2.0], 0)) == 1
    for p in orbit(scaling(), [0.0, 0.0], 5):
        np.testing.assert_array_equal(p, 0.0)


def test_perturbed_orbit_matches_steps(perturbed):
    seq = perturbed.seq
    z = np.array([0.1, -0.2j, 0.05])
    pts = orbit(seq, z, 3)
    np.testing.assert_allclose(pts[2], seq[2].forward(seq[1].forward(z)))


def test_overflow_keeps_finite_prefix():
    seq = AutoSequence.periodic([LinearMap(np.diag([1e200, 1e200]))])
    with pytest.raises(EscapedToInfinity) as info:
        orbit(seq, [1e200, 1e200], 4)
    assert info.value.last_index == 0
    assert len(info.value.points) == 1


def test_bad_arguments():
    with pytest.raises(ParameterError):
        orbit(scaling(), [1.0, 1.0], -1)
    with pytest.raises(ParameterError):
        orbit(scaling(), [1.0, 1.0], 1, direction="sideways")


def test_sup_norm_over_batches():
    z = np.array([[1.0, -3.0], [2j, 0.5]])
    np.testing.assert_allclose(sup_norm(z), [2.0, 3.0])
