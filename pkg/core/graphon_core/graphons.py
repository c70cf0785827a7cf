"""Block-constant probability graphons and the operations on them."""

import logging
import math
from typing import List, Sequence

import numpy as np

from core.measure_core import BINARY_SPACE, as_function
from core.utils.errors import DivisibilityError, ValidationFailure
from core.utils.models import FiniteMeasure, MeasureKind, StepGraphon, WeightedGraph, WeightSpace

log = logging.getLogger(__name__)


def embed_graph(graph: WeightedGraph) -> StepGraphon:
    """Graphon whose cell (i, j) is the point mass at the weight of edge ij."""
    cells = np.eye(graph.space.size)[graph.weights]
    return StepGraphon(n=graph.n, space=graph.space, cells=cells)


def constant_graphon(mu: FiniteMeasure, n: int = 1) -> StepGraphon:
    """Graphon with every cell equal to mu."""
    cells = np.broadcast_to(mu.weights, (n, n, mu.space.size))
    return StepGraphon(n=n, space=mu.space, cells=cells)


def from_real_graphon(w: np.ndarray, space: WeightSpace = BINARY_SPACE) -> StepGraphon:
    """Probability graphon of a real graphon with values in [0, 1]: cell (i, j) is Bernoulli(w_ij)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationFailure("real graphon must be a square matrix")
    if space.size != 2:
        raise ValidationFailure("real graphons embed into a two-point space")
    if np.any(w < 0) or np.any(w > 1):
        raise ValidationFailure("real graphon values must lie in [0, 1]")
    cells = np.stack([1.0 - w, w], axis=-1)
    return StepGraphon(n=w.shape[0], space=space, cells=cells, symmetric=bool(np.array_equal(w, w.T)))


def _fractions(values: Sequence[float], n: int, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.shape != (n,):
        raise ValidationFailure(f"{name} needs {n} block fractions, got shape {array.shape}")
    if np.any(array < 0) or np.any(array > 1) or not np.all(np.isfinite(array)):
        raise ValidationFailure(f"{name} fractions must lie in [0, 1]")
    return array


def aggregate(W: StepGraphon, s: Sequence[float], t: Sequence[float]) -> FiniteMeasure:
    """W(S x T; .) for the set taking fraction s_i of block i and t_j of block j."""
    s = _fractions(s, W.n, "s")
    t = _fractions(t, W.n, "t")
    weights = np.einsum("i,j,ijk->k", s, t, W.cells) / W.n ** 2
    return FiniteMeasure(space=W.space, weights=weights, kind=MeasureKind.SUBPROBABILITY)


def total_measure(W: StepGraphon) -> FiniteMeasure:
    """M_W: the average of all cells."""
    weights = W.cells.sum(axis=(0, 1)) / W.n ** 2
    return FiniteMeasure(space=W.space, weights=weights / weights.sum())


def apply_function(W: StepGraphon, f: Sequence[float]) -> np.ndarray:
    """Real matrix W[f]: entry (i, j) is <f, cells[i][j]>."""
    return W.cells @ as_function(f, W.space)


def color_densities(W: StepGraphon) -> np.ndarray:
    """(|Z|, n, n) stack of real graphons w_k(i, j) = cells[i][j]_k."""
    return np.ascontiguousarray(W.cells.transpose(2, 0, 1))


def is_constant(W: StepGraphon) -> bool:
    return bool(np.all(W.cells == W.cells[0, 0]))


def with_zero_diagonal(W: StepGraphon) -> StepGraphon:
    """Replace every diagonal cell by the point mass at 0."""
    cells = np.array(W.cells)
    cells[np.arange(W.n), np.arange(W.n)] = np.eye(W.space.size)[W.space.zero_index]
    return StepGraphon(n=W.n, space=W.space, cells=cells, symmetric=W.symmetric)


def validate_permutation(sigma: Sequence[int], n: int) -> np.ndarray:
    perm = np.asarray(sigma, dtype=np.int64)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValidationFailure(f"not a permutation of {n} blocks: {list(sigma)}")
    return perm


def inverse_permutation(sigma: Sequence[int]) -> np.ndarray:
    perm = np.asarray(sigma, dtype=np.int64)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.size)
    return inverse


def relabel(W: StepGraphon, sigma: Sequence[int]) -> StepGraphon:
    """W^sigma with cells'[i][j] = cells[sigma(i)][sigma(j)]."""
    perm = validate_permutation(sigma, W.n)
    return StepGraphon(n=W.n, space=W.space, cells=W.cells[np.ix_(perm, perm)], symmetric=W.symmetric)


def _average_blocks(cells: np.ndarray, left: np.ndarray, right: np.ndarray, symmetric: bool) -> np.ndarray:
    """Weighted block averages sum_ij left[a, i] right[b, j] cells[i, j].

    Rows of left/right are averaging weights. Blocks whose inputs are all equal
    return that value exactly and symmetric inputs give exactly symmetric output.
    """
    averaged = np.einsum("ai,bj,ijk->abk", left, right, cells)
    used_left, used_right = left > 0, right > 0
    for a in range(averaged.shape[0]):
        rows = np.flatnonzero(used_left[a])
        for b in range(averaged.shape[1]):
            block = cells[np.ix_(rows, np.flatnonzero(used_right[b]))]
            first = block[0, 0]
            if np.all(block == first):
                averaged[a, b] = first
    if symmetric:
        upper = np.triu(np.ones(averaged.shape[:2], dtype=bool))
        averaged = np.where(upper[:, :, None], averaged, averaged.transpose(1, 0, 2))
    return averaged


def _validate_groups(groups: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    parts = [list(group) for group in groups]
    if not parts or any(len(group) == 0 for group in parts):
        raise ValidationFailure("partition groups must be nonempty")
    flat = sorted(index for group in parts for index in group)
    if flat != list(range(n)):
        raise ValidationFailure(f"groups must be disjoint and cover all {n} blocks")
    return parts


def step(W: StepGraphon, groups: Sequence[Sequence[int]], keep_grid: bool = False) -> StepGraphon:
    """Stepping operator: average W over the rectangles of a partition of the blocks.

    Args:
        W: Graphon to average
        groups: Partition of range(n)
        keep_grid: Return the averaged graphon on the original n-grid instead of one
            block per group (needed when groups have unequal sizes)

    Returns:
        Stepped graphon
    """
    parts = _validate_groups(groups, W.n)
    sizes = {len(group) for group in parts}
    if not keep_grid and len(sizes) != 1:
        raise ValidationFailure("groups of unequal size cannot become equal blocks; pass keep_grid=True")
    weights = np.zeros((len(parts), W.n))
    for index, group in enumerate(parts):
        weights[index, group] = 1.0 / len(group)
    averaged = _average_blocks(W.cells, weights, weights, W.symmetric)
    if keep_grid:
        labels = np.empty(W.n, dtype=np.int64)
        for index, group in enumerate(parts):
            labels[group] = index
        averaged = averaged[np.ix_(labels, labels)]
    return StepGraphon(n=averaged.shape[0], space=W.space, cells=averaged, symmetric=W.symmetric)


def approximant(W: StepGraphon, k: int) -> StepGraphon:
    """k-th level approximant: step over k contiguous groups of n/k blocks."""
    if k <= 0 or W.n % k:
        raise DivisibilityError(f"approximant level {k} must divide the block count {W.n}")
    width = W.n // k
    return step(W, [range(g * width, (g + 1) * width) for g in range(k)])


def overlap_matrix(source: int, target: int) -> np.ndarray:
    """(target, source) matrix: share of target block a covered by source block i."""
    common = math.lcm(source, target)
    fine_target = np.arange(common) // (common // target)
    fine_source = np.arange(common) // (common // source)
    counts = np.zeros((target, source))
    np.add.at(counts, (fine_target, fine_source), 1.0)
    return counts / (common // target)


def regrid(W: StepGraphon, m: int) -> StepGraphon:
    """Step W onto the equal m-grid (refinement replicates cells exactly)."""
    if m <= 0:
        raise ValidationFailure(f"block count must be positive, got {m}")
    if m == W.n:
        return W
    overlap = overlap_matrix(W.n, m)
    cells = _average_blocks(W.cells, overlap, overlap, W.symmetric)
    return StepGraphon(n=m, space=W.space, cells=cells, symmetric=W.symmetric)


def lift(W: StepGraphon, r: int) -> StepGraphon:
    """Refine every block into r equal blocks."""
    return regrid(W, r * W.n)
