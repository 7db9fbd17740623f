"""Exact verification and search toolkit for EFX counterexamples with chores."""

from .numeric import INFINITY, ExactValue, ev, ev_compare, ev_mul, ev_pow, ev_ratio
from .setfn import (
    Bundle,
    ClassReport,
    GroundSet,
    Profile,
    check_monotone,
    check_normalized,
    check_subadditive,
    check_submodular,
    check_superadditive,
    distinct_values,
    evaluate,
    to_dense,
)
from .instances import (
    NamedInstance,
    build_coverage_20_19,
    build_cs24,
    build_four_level_compressed,
    build_four_level_ordinal,
    build_warmup_compressed,
    extend_with_dummies,
)
from .transform import coverage_from_atoms, rank_compress, separation_factor
from .efx import (
    Allocation,
    check_no_efx,
    critical_alpha_chores,
    enumerate_allocations,
    instance_threshold,
    is_alpha_efx,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "ExactValue",
    "ev",
    "ev_compare",
    "ev_mul",
    "ev_pow",
    "ev_ratio",
    "Bundle",
    "ClassReport",
    "GroundSet",
    "Profile",
    "check_monotone",
    "check_normalized",
    "check_subadditive",
    "check_submodular",
    "check_superadditive",
    "distinct_values",
    "evaluate",
    "to_dense",
    "NamedInstance",
    "build_coverage_20_19",
    "build_cs24",
    "build_four_level_compressed",
    "build_four_level_ordinal",
    "build_warmup_compressed",
    "extend_with_dummies",
    "coverage_from_atoms",
    "rank_compress",
    "separation_factor",
    "Allocation",
    "check_no_efx",
    "critical_alpha_chores",
    "enumerate_allocations",
    "instance_threshold",
    "is_alpha_efx",
]
