"""Exact integer lattice algebra, unimodular cones and folded templates."""
from .cone import (
    UnimodularCone,
    cone_contains,
    dual_basis,
    extend_to_basis,
    is_primitive,
    is_unimodular_basis,
)
from .snf import SmithForm, det, gcd_of_maximal_minors, kernel_basis, rank, smith_normal_form

__all__ = [
    "SmithForm", "UnimodularCone", "cone_contains", "det", "dual_basis",
    "extend_to_basis", "gcd_of_maximal_minors", "is_primitive",
    "is_unimodular_basis", "kernel_basis", "rank", "smith_normal_form",
]
