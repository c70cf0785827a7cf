"""Cut semi-distance, unlabeled cut distance and overlay functionals."""

from .annealing import PermutationAnnealer
from .calculator import CutDistanceCalculator, d_cut, d_cut_colored, delta_cut, overlay

__all__ = [
    "CutDistanceCalculator",
    "PermutationAnnealer",
    "d_cut",
    "d_cut_colored",
    "delta_cut",
    "overlay",
]
