import numpy as np
import pytest

from nabasin.core.errors import Inconclusive
from nabasin.dynamics.filtration import sample_V_plus
from nabasin.dynamics.green import (
    cauchy_rate_check,
    certified_steps,
    green_batch,
    green_estimate,
    green_functional_check,
    green_trajectory,
)


def test_origin_has_zero_green(perturbed, filtration):
    est = green_estimate(perturbed.seq, np.zeros(3), filtration)
    assert est.value == 0.0
    assert est.status == "converged"
    assert est.tail_bound == 0.0
    assert est.entry is None


def test_escaping_points_converge(perturbed, filtration):
    z = sample_V_plus(3, filtration.R, 16, np.random.default_rng(1))
    batch = green_batch(perturbed.seq, z, filtration, tol=1e-9)
    assert batch.converged.all()
    assert np.all(batch.tails <= 1e-9)
    assert np.all(batch.values > 0)
    n_cert = certified_steps(filtration, 1e-9)
    np.testing.assert_array_equal(batch.iterations, np.maximum(batch.entry, n_cert))


def test_certified_steps_is_least(filtration):
    for tol in (1e-3, 1e-9, 1e-12):
        n = certified_steps(filtration, tol)
        assert filtration.tail(n) <= tol
        assert n == 0 or filtration.tail(n - 1) > tol


def test_cap_reported_for_undecided_points(perturbed, filtration):
    est = green_estimate(perturbed.seq, np.full(3, 0.5), filtration, maxiter=0)
    assert est.status == "hit-iteration-cap"
    assert est.iterations == 0


def test_functional_equation_for_period_one(perturbed, filtration):
    z = np.array([0.0, 0.0, 4 * filtration.R])
    assert green_functional_check(perturbed.seq, 1, z, filtration, tol=1e-12) <= 1e-6


def test_functional_equation_at_origin(perturbed, filtration):
    assert green_functional_check(perturbed.seq, 2, np.zeros(3), filtration) == 0.0


def test_functional_equation_needs_convergence(perturbed, filtration):
    with pytest.raises(Inconclusive):
        green_functional_check(perturbed.seq, 1, np.full(3, 0.5), filtration, maxiter=0)


def test_cauchy_rate_holds(perturbed, filtration):
    checked, bad, worst = cauchy_rate_check(perturbed.seq, filtration, samples=100, steps=10, seed=1)
    assert checked == 1000
    assert bad == 0
    assert worst <= 1 + 1e-9


def test_trajectory_rows(perturbed, filtration):
    z = np.array([0.0, 0.0, 4 * filtration.R])
    rows = green_trajectory(perturbed.seq, z, filtration, tol=1e-6)
    assert [r["n"] for r in rows] == list(range(len(rows)))
    assert rows[-1]["n"] == certified_steps(filtration, 1e-6)
    tails = [r["tail"] for r in rows]
    assert tails == sorted(tails, reverse=True)


def test_trajectory_of_origin(perturbed, filtration):
    rows = green_trajectory(perturbed.seq, np.zeros(3), filtration)
    assert len(rows) == 1
    assert rows[0]["norm_sup"] == "0"
    assert rows[0]["G"] == 0.0
