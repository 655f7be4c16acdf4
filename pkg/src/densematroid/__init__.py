"""Exact computation with matroids of bounded line length and dense point sets.

The package builds GF(q)-linear and abstract matroids, checks extremal
density bounds exactly, searches for restrictions and minors, and works
with stack certificates and weak roundness.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import (DensityReport, kung_bound, kung_check, kungrel_check, projection_bound,
                     verify_projection_instance)
from .core import (BasesMatroid, LinearMatroid, Matroid, MatroidError, MinorView, direct_sum,
                   uniform)
from .geometry import GeometryTag, ag, pg
from .gf import FieldElement, FieldSpec, field_of_order, make_field
from .search import (DeskScaleExceeded, MinorWitness, RestrictionWitness, SearchBudgetExceeded,
                     find_pg_minor, find_restriction, has_u2_minor, is_representable,
                     verify_restriction)
from .structure import (DensityThreshold, RoundnessWitness, StackCertificate,
                        build_stack_greedy, dense_point_above, is_weakly_round, majority_flat,
                        max_stack_height, probe, stack_flat_search, verify_stack,
                        weakly_round_restriction)

__all__ = [
    "BasesMatroid", "DensityReport", "DensityThreshold", "DeskScaleExceeded", "FieldElement",
    "FieldSpec", "GeometryTag", "LinearMatroid", "Matroid", "MatroidError", "MinorView",
    "MinorWitness", "RestrictionWitness", "RoundnessWitness", "SearchBudgetExceeded",
    "StackCertificate", "ag", "build_stack_greedy", "dense_point_above", "direct_sum",
    "field_of_order", "find_pg_minor", "find_restriction", "has_u2_minor", "is_representable",
    "is_weakly_round", "kung_bound", "kung_check", "kungrel_check", "majority_flat",
    "make_field", "max_stack_height", "pg", "probe", "projection_bound", "stack_flat_search",
    "uniform", "verify_projection_instance", "verify_restriction", "verify_stack",
    "weakly_round_restriction",
]
