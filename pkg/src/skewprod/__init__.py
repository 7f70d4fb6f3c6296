"""Skew morphisms and skew product groups of small finite groups.

Groups are multiplication tables over dense integer IDs with 0 as the
identity. The modules build on each other in this order: group,
structure, skew, classifier, theorems, cayley_maps, cache and cli.
"""
from ._accel import backend
from .errors import SkewError
from .group import (FiniteGroup, build_cyclic, build_dihedral, build_quaternion,
                    build_semidihedral, find_isomorphism, from_cayley_table, parse_descriptor)
from .skew import (EnumerationResult, SkewMorphism, SkewProductGroup, brute_force_skew_morphisms,
                   derive_power_function, enumerate_skew_morphisms, extract_skew, from_certificate,
                   skew_product, validate_skew)

__version__ = "0.1.0"

__all__ = [
    "EnumerationResult", "FiniteGroup", "SkewError", "SkewMorphism", "SkewProductGroup", "backend",
    "brute_force_skew_morphisms", "build_cyclic", "build_dihedral", "build_quaternion",
    "build_semidihedral", "derive_power_function", "enumerate_skew_morphisms", "extract_skew",
    "find_isomorphism", "from_cayley_table", "from_certificate", "parse_descriptor", "skew_product",
    "validate_skew",
]
