"""Graphon relative entropy and its dual representation."""

from .entropy import (
    graphon_entropy,
    optimal_kernel,
    per_cell_entropy,
    random_kernel,
    variational_value,
)

__all__ = [
    "graphon_entropy",
    "optimal_kernel",
    "per_cell_entropy",
    "random_kernel",
    "variational_value",
]
