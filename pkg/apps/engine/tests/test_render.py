import numpy as np
import pytest

from nabasin.core.errors import ParameterError
from nabasin.core.types import RenderSpec
from nabasin.dynamics.render import render_basin, slice_points


def window(base, res=(8, 8), half=1e-3):
    return RenderSpec(
        base=base,
        u=[1, 0, 0],
        v=[0, 1, 0],
        x_range=(-half, half),
        y_range=(-half, half),
        resolution=res,
    )


def test_tiny_window_is_basin(perturbed, filtration):
    result = render_basin(perturbed.seq, window([0, 0, 0]), filtration, r_tilde=0.01, maxiter=5)
    assert result.counts() == {"in_basin": 64, "escaping": 0, "undecided": 0}
    assert np.all(result.classification_image() == 0)


def test_window_inside_escape_region(perturbed, filtration):
    w = window([0, 0, 4 * filtration.R], half=0.1)
    result = render_basin(perturbed.seq, w, filtration, r_tilde=0.01, maxiter=5)
    assert result.counts()["escaping"] == 64
    assert np.all(result.classification_image() == 255)
    assert np.all(result.escape_time_image() == 255)


def test_threads_do_not_change_the_image(perturbed, filtration):
    w = RenderSpec(
        base=[0, 0, 0],
        u=[1, 0, 0],
        v=[0, 0, 1],
        x_range=(-2 * filtration.R, 2 * filtration.R),
        y_range=(-2 * filtration.R, 2 * filtration.R),
        resolution=(20, 19),
    )
    one = render_basin(perturbed.seq, w, filtration, r_tilde=0.01, maxiter=20, threads=1)
    many = render_basin(perturbed.seq, w, filtration, r_tilde=0.01, maxiter=20, threads=3)
    assert one.classes.shape == (19, 20)
    np.testing.assert_array_equal(one.classes, many.classes)
    np.testing.assert_array_equal(one.steps, many.steps)
    assert set(np.unique(one.classification_image())) <= {0, 128, 255}


def test_slice_orientation():
    w = RenderSpec(base=[1, 0], u=[1, 0], v=[0, [0, 1]], x_range=(0, 2), y_range=(-1, 1), resolution=(3, 2))
    grid = slice_points(w, 2)
    assert grid.shape == (2, 2, 3)
    np.testing.assert_allclose(grid[:, 0, 0], [1, 1j])
    np.testing.assert_allclose(grid[:, 1, 2], [3, -1j])


def test_bad_windows():
    with pytest.raises(ParameterError):
        slice_points(window([0, 0, 0], res=(0, 4)), 3)
    with pytest.raises(ParameterError):
        slice_points(window([0, 0]), 3)
