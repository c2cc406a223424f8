"""Multiverse analysis of benchmark rankings and ordinal unfolding."""

from ._core import (
    DataError,
    DegenerateInput,
    StructuralError,
    impute_cell,
    midranks,
    monotone_regress,
    permutation_test,
    run_cli,
    sample_prefix_groups,
    unfold,
)

__all__ = [
    "DataError",
    "DegenerateInput",
    "StructuralError",
    "impute_cell",
    "midranks",
    "monotone_regress",
    "permutation_test",
    "run_cli",
    "sample_prefix_groups",
    "unfold",
]
