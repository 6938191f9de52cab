"""Growth-function calculus and finite-dimensional CKS-space checks."""

from .growth import GrowthFunction, catalog_lookup, parse_growth_spec
from .transforms import dual_legendre, l_function, legendre, weight_sequence
from .chaos import ChaosVector, KernelTensor, SpaceModel

__all__ = [
    "GrowthFunction",
    "catalog_lookup",
    "parse_growth_spec",
    "legendre",
    "dual_legendre",
    "l_function",
    "weight_sequence",
    "SpaceModel",
    "KernelTensor",
    "ChaosVector",
]
