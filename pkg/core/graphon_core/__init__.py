"""Step graphons: embedding, aggregation, stepping and relabeling."""

from .graphons import (
    aggregate,
    apply_function,
    approximant,
    color_densities,
    constant_graphon,
    embed_graph,
    from_real_graphon,
    inverse_permutation,
    is_constant,
    lift,
    overlap_matrix,
    regrid,
    relabel,
    step,
    total_measure,
    validate_permutation,
    with_zero_diagonal,
)

__all__ = [
    "aggregate",
    "apply_function",
    "approximant",
    "color_densities",
    "constant_graphon",
    "embed_graph",
    "from_real_graphon",
    "inverse_permutation",
    "is_constant",
    "lift",
    "overlap_matrix",
    "regrid",
    "relabel",
    "step",
    "total_measure",
    "validate_permutation",
    "with_zero_diagonal",
]
