from nabasin.families.maps import (
    CompositeMap,
    ElementaryMap,
    HenonMap,
    LinearMap,
    PerturbedWeakShift,
    PolynomialMap,
    SwappedHenon,
    WeakShift,
    conjugate,
    evaluate,
)
from nabasin.families.sequence import (
    AttractionBounds,
    AutoSequence,
    SequenceMetadata,
    ShiftFamilyBounds,
    block_compose,
    least_k0,
    periodic_restriction,
    perturb,
)
from nabasin.families.normalize import lower_triangular_normalize
from nabasin.families.factorize import (
    HenonParameters,
    henon_factorize_k2,
    henon_sequence,
    shift_factorize,
    shift_sequence,
)
from nabasin.families.bounds import estimate_attraction_bounds

__all__ = [
    "AttractionBounds",
    "AutoSequence",
    "CompositeMap",
    "ElementaryMap",
    "HenonMap",
    "HenonParameters",
    "LinearMap",
    "PerturbedWeakShift",
    "PolynomialMap",
    "SequenceMetadata",
    "ShiftFamilyBounds",
    "SwappedHenon",
    "WeakShift",
    "block_compose",
    "conjugate",
    "estimate_attraction_bounds",
    "evaluate",
    "henon_factorize_k2",
    "henon_sequence",
    "least_k0",
    "lower_triangular_normalize",
    "periodic_restriction",
    "perturb",
    "shift_factorize",
    "shift_sequence",
]
