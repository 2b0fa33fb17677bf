import numpy as np
import pytest

from nabasin.commands import trivial_exactness
from nabasin.core.errors import HypothesisViolation, ParameterError
from nabasin.core.types import BoundsSpec, SequenceSpec
from nabasin.families.normalize import lower_triangular_normalize
from nabasin.families.registry import build_sequence
from nabasin.families.sequence import AutoSequence
from nabasin.families.maps import LinearMap
from nabasin.solver.conjugation import residual, residual_by_degree, residual_rows, solution_to_json, solve_conjugation

from conftest import SCENARIOS, diagonal_spec


@pytest.fixture(scope="module")
def diagonal():
    f = lower_triangular_normalize(build_sequence(diagonal_spec()).seq)
    return f, solve_conjugation(f, horizon=6, tol=1e-9)


def test_diagonal_sequence_is_its_own_normal_form(diagonal):
    f, sol = diagonal
    assert sol.k0 == 2
    assert sol.residual <= 1e-9
    values = trivial_exactness(sol, f)
    assert values["h_nonlinear"] == 0.0
    assert values["g_nonlinear"] == 0.0
    assert values["g_minus_f"] <= 1e-15


def test_g_factors_are_elementary_in_order(diagonal):
    _, sol = diagonal
    assert [factor.i for factor in sol.g(3).factors] == [1, 2, 3]


def test_residual_sees_a_single_perturbed_coefficient(diagonal):
    f, sol = diagonal
    assert residual(sol, f) == pytest.approx(0.0, abs=1e-15)
    bumped = sol.with_h_coefficient(2, 1, (2, 0, 0), 1e-3)
    assert residual(bumped, f) >= 1e-3 * (1 - 1e-9)


def test_solution_artifacts(diagonal):
    _, sol = diagonal
    payload = solution_to_json(sol)
    assert payload["k0"] == 2
    assert len(payload["g"]) == sol.horizon
    assert len(payload["h"]) == sol.horizon + 1
    assert [row["degree"] for row in residual_rows(sol)] == [1, 2]


def test_bounds_must_allow_k0():
    f = lower_triangular_normalize(build_sequence(diagonal_spec(A=0.3, B=0.6)).seq)
    with pytest.raises(HypothesisViolation):
        solve_conjugation(f, k0=2, horizon=4)


def test_k0_needs_bounds_or_argument():
    seq = AutoSequence.periodic([LinearMap(np.diag([0.5, 0.5, 0.5]))])
    with pytest.raises(ParameterError):
        solve_conjugation(seq, horizon=4)


def test_upper_triangular_input_is_rejected():
    from nabasin.core.errors import DomainError

    seq = AutoSequence.periodic([LinearMap(np.array([[0.5, 0.1], [0.0, 0.5]]))])
    with pytest.raises(DomainError):
        solve_conjugation(seq, k0=2, horizon=4)


def test_seeded_k2_triangular_solution():
    spec = SequenceSpec(family="triangular", k=2, seed=11, bounds=BoundsSpec(A=0.3, B=0.6), degree=2)
    f = lower_triangular_normalize(build_sequence(spec).seq)
    sol = solve_conjugation(f, horizon=8, tol=1e-9)
    assert sol.k0 == 3
    assert sol.residual <= 1e-9
    for n in range(1, 9):
        np.testing.assert_allclose(sol.g(n).germ(1).linear_part(), f.linear_part(n), atol=1e-12)
        params = sol.henon_parameters(n)
        assert params.p.coefficient((3,)) == pytest.approx(1.0)
        assert params.q.coefficient((3,)) == pytest.approx(1.0)


def test_k2_constant_diagonal_top_degree_closed_form():
    a, c = 0.5, 0.6
    seq = AutoSequence.periodic([LinearMap(np.diag([a, c]))])
    sol = solve_conjugation(seq, k0=2, horizon=8, tol=1e-9)
    assert sol.table.kind(1, (0, 2)) == "monic"
    for n in range(1, 9):
        # fixed point of rho_{n+1} = a c^-2 rho_n + c^-2
        assert sol.table.rho(1, (0, 2), n) == pytest.approx(c**-2 / (1 - a * c**-2), abs=1e-8)
        assert sol.table.rho(2, (2, 0), n) == pytest.approx(a**-2 / (1 - c * a**-2), abs=1e-8)
        params = sol.henon_parameters(n)
        assert params.p.coefficient((2,)) == pytest.approx(1.0)
        assert params.q.coefficient((2,)) == pytest.approx(1.0)


def test_k3_golden_scenario_solves_over_twenty_steps():
    from nabasin.cli import load_scenario
    from nabasin.commands import solve_scenario

    sc = load_scenario(SCENARIOS / "k3_golden.json")
    f, sol = solve_scenario(sc)
    assert (sol.k, sol.k0, sol.horizon) == (3, 5, 20)
    assert sol.residual <= 1e-9
    by_degree = residual_by_degree(sol, f, range(1, 21))
    assert set(by_degree) == {1, 2, 3, 4, 5}
    assert max(by_degree.values()) <= 1e-9
    for n in (1, 10, 20):
        assert [factor.i for factor in sol.g(n).factors] == [1, 2, 3]
        np.testing.assert_allclose(sol.g(n).germ(1).linear_part(), f.linear_part(n), atol=1e-12)
