from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing import Literal, Optional, Any, Dict, List, Tuple, Union

from nabasin.core.errors import ScenarioError

Family = Literal["henon", "elementary", "weakshift", "perturbed", "custom", "triangular"]

Command = Literal["normalize", "solve", "factorize", "filtration", "green", "classify", "render", "suite"]

CheckName = Literal[
    "conjugation_k2",
    "conjugation_k3",
    "golden_orderings",
    "affine_orbit",
    "filtration",
    "green_cauchy",
    "periodic_functional",
    "factorizations",
    "trivial_exactness",
    "classification",
]

# JSON carries complex numbers as [re, im] or a plain real
ComplexLike = Union[float, Tuple[float, float]]


def to_complex(value: ComplexLike) -> complex:
    if isinstance(value, (tuple, list)):
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


class TermSpec(BaseModel):
    exponents: List[int]
    coeff: ComplexLike = 1.0

    @field_validator("exponents")
    @classmethod
    def _non_negative(cls, v: List[int]) -> List[int]:
        if any(e < 0 for e in v):
            raise ValueError("exponents must be non-negative")
        return v


class MapSpec(BaseModel):
    """One explicit map. Which fields apply depends on the family."""

    delta: Optional[ComplexLike] = None  # henon
    a: Optional[ComplexLike] = None  # elementary, weakshift, perturbed
    i: Optional[int] = None  # elementary target coordinate (1-based)
    P: List[TermSpec] = Field(default_factory=list)
    matrix: Optional[List[List[ComplexLike]]] = None  # custom linear
    components: Optional[List[List[TermSpec]]] = None  # custom forward germ
    inverse: Optional[List[List[TermSpec]]] = None  # custom inverse germ


class BoundsSpec(BaseModel):
    A: float
    B: float
    r: float = 0.05

    @model_validator(mode="after")
    def _ordered(self):
        if not (0 < self.A < self.B < 1):
            raise ValueError("need 0 < A < B < 1")
        if self.r <= 0:
            raise ValueError("r must be positive")
        return self


class SequenceSpec(BaseModel):
    family: Family
    k: int = Field(ge=1)
    coeffs: List[MapSpec] = Field(default_factory=list)
    period: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    bounds: Optional[BoundsSpec] = None
    degree: int = Field(default=2, ge=1)  # d_tilde / nonlinear degree of seeded maps
    d: Optional[int] = None  # perturbation degree
    coef_bound: float = Field(default=0.1, ge=0)
    a_range: Optional[Tuple[float, float]] = None
    rotate: bool = False  # seeded triangular: conjugate linear parts by random unitaries

    @model_validator(mode="after")
    def _source(self):
        if not self.coeffs and self.seed is None:
            raise ValueError("give explicit coeffs or a seed")
        if self.family == "perturbed" and self.d is None:
            raise ValueError("perturbed family needs d")
        if self.family == "triangular" and self.bounds is None:
            raise ValueError("triangular family needs bounds")
        return self


class SolverParams(BaseModel):
    k0: Optional[int] = Field(default=None, ge=1)
    horizon: Optional[int] = Field(default=None, ge=1)
    tol: Optional[float] = Field(default=None, gt=0)


class DynamicsParams(BaseModel):
    r_cap_exp: Optional[int] = Field(default=None, ge=1)
    r_tilde: Optional[float] = Field(default=None, gt=0)
    maxiter: Optional[int] = Field(default=None, ge=0)
    samples: int = Field(default=1000, ge=1)
    period: Optional[int] = Field(default=None, ge=1)
    block: Optional[int] = Field(default=None, ge=1)


class RenderSpec(BaseModel):
    base: List[ComplexLike]
    u: List[ComplexLike]
    v: List[ComplexLike]
    x_range: Tuple[float, float] = (-1.0, 1.0)
    y_range: Tuple[float, float] = (-1.0, 1.0)
    resolution: Tuple[int, int] = (64, 64)


class Scenario(BaseModel):
    schema_version: Literal[1] = 1
    name: str = "scenario"
    command: Optional[Command] = None
    sequence: SequenceSpec
    solver: SolverParams = Field(default_factory=SolverParams)
    dynamics: DynamicsParams = Field(default_factory=DynamicsParams)
    render: Optional[RenderSpec] = None
    points: List[List[ComplexLike]] = Field(default_factory=list)
    checks: List[CheckName] = Field(default_factory=list)
    out: Optional[str] = None
    seed: int = 0  # sampling seed for checks, not the sequence seed


class RunSummary(BaseModel):
    command: Command
    scenario: str
    status: Literal["ok", "failed", "error"] = "ok"
    exit_code: int = 0
    checks: Dict[str, bool] = Field(default_factory=dict)
    details: Dict[str, Any] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)
    generated_at_iso: Optional[str] = None


def parse_scenario(payload: Dict[str, Any]) -> Scenario:
    """Validate a scenario dict; errors name the dotted path of the first bad field."""
    try:
        return Scenario.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first.get("loc", ()))
        raise ScenarioError(first.get("msg", "invalid"), path or "<root>") from exc
