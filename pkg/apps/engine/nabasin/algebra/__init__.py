from nabasin.algebra.indices import (
    MultiIndex,
    OrderedIndexSet,
    count_indices,
    enumerate_indices,
    phi_ordering,
    slot_ordering,
)
from nabasin.algebra.polynomial import Polynomial
from nabasin.algebra.germs import GermMap, compose_truncated, invert_germ, truncate

__all__ = [
    "MultiIndex",
    "OrderedIndexSet",
    "count_indices",
    "enumerate_indices",
    "phi_ordering",
    "slot_ordering",
    "Polynomial",
    "GermMap",
    "compose_truncated",
    "invert_germ",
    "truncate",
]
