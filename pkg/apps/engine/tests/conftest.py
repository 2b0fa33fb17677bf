import os
from pathlib import Path

import numpy as np
import pytest

from nabasin.core.types import BoundsSpec, MapSpec, SequenceSpec
from nabasin.dynamics.filtration import find_filtration_spec
from nabasin.families.registry import build_sequence

REPO_ROOT = Path(__file__).resolve().parents[3]
SCENARIOS = REPO_ROOT / "packages" / "scenarios"


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("NABASIN_"):
            monkeypatch.delenv(name)
    monkeypatch.setenv("NABASIN_THREADS", "2")


def diagonal_spec(k: int = 3, A: float = 0.45, B: float = 0.65) -> SequenceSpec:
    diagonals = [[0.5, 0.55, 0.6], [0.6, 0.5, 0.55], [0.55, 0.6, 0.5]]
    coeffs = []
    for diag in diagonals:
        matrix = np.diag(diag[:k]).tolist()
        coeffs.append(MapSpec(matrix=matrix))
    return SequenceSpec(family="custom", k=k, period=3, coeffs=coeffs, bounds=BoundsSpec(A=A, B=B, r=0.05))


PERTURBED_D4 = SequenceSpec(
    family="perturbed", k=3, seed=7, degree=2, d=4, coef_bound=0.1, a_range=(0.3, 0.7)
)


@pytest.fixture(scope="session")
def perturbed():
    return build_sequence(PERTURBED_D4)


@pytest.fixture(scope="session")
def filtration(perturbed):
    return find_filtration_spec(perturbed.seq, samples=200, seed=0)
