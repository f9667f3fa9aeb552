"""Coherent configurations, Weisfeiler-Leman closures, depth-1 stabilization
and the sesquiclosure, with projective-plane test families."""

from .core import (
    CapExceeded,
    GroundSet,
    PairColoring,
    canonical_renumber,
    join_partitions,
    validate_rainbow,
)
from .cc2 import (
    CoherentConfiguration,
    intersect_cc,
    intersection_numbers,
    parabolic_report,
    point_extension,
    restrict,
    tensor_square,
    two_closure,
    two_extension,
    validate_cc,
    wl_closure,
)

__all__ = [
    "CapExceeded",
    "GroundSet",
    "PairColoring",
    "canonical_renumber",
    "join_partitions",
    "validate_rainbow",
    "CoherentConfiguration",
    "intersect_cc",
    "intersection_numbers",
    "parabolic_report",
    "point_extension",
    "restrict",
    "tensor_square",
    "two_closure",
    "two_extension",
    "validate_cc",
    "wl_closure",
]

__version__ = "0.1.0"
