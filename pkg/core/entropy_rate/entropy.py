"""Relative entropy of step graphons and its variational (dual) representation."""

import logging
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from core.measure_core import check_same_space, kl_rows
from core.utils.errors import NumericalFailure, SupportError, ValidationFailure
from core.utils.models import DualKernel, FiniteMeasure, StepGraphon

log = logging.getLogger(__name__)


def _reference(W: StepGraphon, nu: FiniteMeasure) -> np.ndarray:
    check_same_space(W.space, nu.space)
    if not nu.is_probability:
        raise ValidationFailure("reference measure must be a probability measure")
    return nu.weights


def per_cell_entropy(W: StepGraphon, nu: FiniteMeasure) -> np.ndarray:
    """n x n matrix of H(cells[i][j] | nu), +inf where absolute continuity fails."""
    return kl_rows(W.cells, _reference(W, nu))


def graphon_entropy(W: StepGraphon, nu: FiniteMeasure) -> float:
    """Average over the unit square of the cell-wise relative entropy."""
    per_cell = per_cell_entropy(W, nu)
    if np.any(np.isinf(per_cell)):
        return float("inf")
    return float(per_cell.sum() / W.n ** 2)


def _kernel_values(W: StepGraphon, A: DualKernel) -> np.ndarray:
    if A.values.shape != W.cells.shape:
        raise ValidationFailure(f"kernel shape {A.values.shape} does not match graphon cells {W.cells.shape}")
    return A.values


def variational_value(W: StepGraphon, nu: FiniteMeasure, A: DualKernel) -> float:
    """
    J_A(W) = (1/n^2) sum_ij [<A_ij, W_ij> - log sum_z exp(A_ij(z)) nu(z)].

    Never exceeds graphon_entropy(W, nu).
    """
    weights = _reference(W, nu)
    values = _kernel_values(W, A)
    paired = np.sum(values * W.cells, axis=-1)
    normalizers = logsumexp(values, b=np.broadcast_to(weights, values.shape), axis=-1)
    result = float(np.sum(paired - normalizers) / W.n ** 2)
    if np.isnan(result):
        raise NumericalFailure("variational value evaluated to NaN")
    return result


def optimal_kernel(W: StepGraphon, nu: FiniteMeasure) -> DualKernel:
    """
    Dual kernel attaining the entropy: log(dW_ij/dnu)(z) - log(dW_ij/dnu)(0).

    Args:
        W: Graphon whose cells charge every point
        nu: Reference measure charging every point

    Returns:
        DualKernel with zero entries at the distinguished point

    Raises:
        SupportError: naming the first cell or point without full support
    """
    weights = _reference(W, nu)
    empty = np.flatnonzero(weights <= 0)
    if empty.size:
        raise SupportError(f"reference measure vanishes at point {int(empty[0])}", point=int(empty[0]))
    holes = np.argwhere(W.cells <= 0)
    if holes.size:
        i, j, z = (int(v) for v in holes[0])
        raise SupportError(f"cell ({i}, {j}) vanishes at point {z}", cell=(i, j), point=z)
    log_density = np.log(W.cells) - np.log(weights)
    zero = W.space.zero_index
    values = log_density - log_density[:, :, zero:zero + 1]
    return DualKernel(n=W.n, values=values)


def random_kernel(n: int, k: int, scale: float = 1.0, rng: Optional[np.random.Generator] = None) -> DualKernel:
    """Kernel with independent uniform entries in [-scale, scale]."""
    rng = rng or np.random.default_rng()
    return DualKernel(n=n, values=rng.uniform(-scale, scale, size=(n, n, k)))
