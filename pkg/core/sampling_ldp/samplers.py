"""Samplers for weighted random graphs: i.i.d. edges, graphon-driven and conditioned."""

import logging
from typing import Optional

import numpy as np

from core.graphon_core import regrid, with_zero_diagonal
from core.measure_core import as_function
from core.sampling_ldp.exact import event_range, prefix_tables, sum_distribution
from core.utils.errors import LatticeError, ValidationFailure, ZeroProbabilityEventError
from core.utils.models import EventKind, EventSpec, FiniteMeasure, GraphonConfig, StepGraphon, WeightedGraph
from core.utils.seeding import derive_seed, edge_uniforms, generator

log = logging.getLogger(__name__)

REJECTION_MAX_EDGES = 45


def draw_indices(probabilities: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of one point index per row; never lands on a zero-weight point."""
    probabilities = np.atleast_2d(probabilities)
    cumulative = np.cumsum(probabilities, axis=1)
    index = (uniforms[:, None] >= cumulative).sum(axis=1)
    k = probabilities.shape[1]
    last_positive = k - 1 - np.argmax(probabilities[:, ::-1] > 0, axis=1)
    return np.minimum(index, last_positive)


def graph_from_edges(n: int, space, edge_values: np.ndarray) -> WeightedGraph:
    """Symmetric weight matrix from values listed in np.triu_indices(n, 1) order."""
    weights = np.full((n, n), space.zero_index, dtype=np.int64)
    rows, cols = np.triu_indices(n, 1)
    weights[rows, cols] = edge_values
    weights[cols, rows] = edge_values
    return WeightedGraph(n=n, space=space, weights=weights)


def sample_graph(n: int, nu: FiniteMeasure, seed: int) -> WeightedGraph:
    """Graph with i.i.d. nu edge weights; edge k consumes the k-th uniform of the seed's stream."""
    if n < 1:
        raise ValidationFailure(f"graph size must be positive, got {n}")
    if not nu.is_probability:
        raise ValidationFailure("edge law must be a probability measure")
    uniforms = edge_uniforms(seed, n)
    values = draw_indices(np.broadcast_to(nu.weights, (uniforms.size, nu.space.size)), uniforms)
    return graph_from_edges(n, nu.space, values)


def sample_from_graphon(W: StepGraphon, seed: int) -> WeightedGraph:
    """One vertex per block; edge ij drawn from cells[i][j] with the same uniforms as sample_graph."""
    uniforms = edge_uniforms(seed, W.n)
    rows, cols = np.triu_indices(W.n, 1)
    values = draw_indices(W.cells[rows, cols], uniforms)
    return graph_from_edges(W.n, W.space, values)


def sample_sized(W: StepGraphon, n: int, seed: int) -> WeightedGraph:
    """h_{n,M}: step W onto n blocks, put the point mass at 0 on the diagonal, then sample."""
    return sample_from_graphon(with_zero_diagonal(regrid(W, n)), seed)


def _points_within_class(rng: np.random.Generator, nu: np.ndarray, classes: np.ndarray,
                         edge_classes: np.ndarray) -> np.ndarray:
    """For each edge, a point of its lattice class drawn proportionally to nu."""
    probabilities = np.where(classes[None, :] == edge_classes[:, None], nu[None, :], 0.0)
    probabilities /= probabilities.sum(axis=1, keepdims=True)
    return draw_indices(probabilities, rng.random(edge_classes.size))


def conditional_sample(n: int, nu: FiniteMeasure, event: EventSpec, seed: int,
                       config: Optional[GraphonConfig] = None) -> WeightedGraph:
    """
    Exact draw from the i.i.d. law conditioned on a mean-functional event.

    The lattice sum is drawn from its conditioned exact law, the per-edge classes
    are placed uniformly among arrangements with that sum (a uniform edge subset
    for two classes, backward sampling through prefix tables otherwise), and each
    edge then takes a point of its class proportionally to nu. Non-lattice
    functionals fall back to rejection sampling on small graphs.

    Raises:
        ZeroProbabilityEventError: when the event has probability zero
    """
    config = config or GraphonConfig()
    if event.kind is not EventKind.MEAN_FUNCTIONAL:
        raise ValidationFailure("conditional sampling needs a mean-functional event")
    f = as_function(event.f, nu.space)
    edges = n * (n - 1) // 2
    try:
        table = sum_distribution(n, nu, f, config)
    except LatticeError:
        if edges > REJECTION_MAX_EDGES:
            raise
        return _rejection_sample(n, nu, event, f, seed, config)

    low, high = event_range(table, event)
    if low > high or not np.isfinite(table.log_pmf[low:high + 1]).any():
        raise ZeroProbabilityEventError("conditioning event has probability zero")
    rng = generator(seed)
    window = table.log_pmf[low:high + 1]
    probabilities = np.exp(window - window.max())
    total = int(low + rng.choice(window.size, p=probabilities / probabilities.sum()))

    classes = table.point_classes
    levels = table.steps
    if levels.size <= 2 and edges:
        # two lattice classes {0, 1}: the sum is the number of class-1 edges
        edge_classes = np.full(edges, levels[0])
        if levels.size == 2:
            edge_classes[rng.choice(edges, size=total, replace=False)] = levels[1]
    else:
        edge_classes = _backward_classes(rng, table, total, edges)
    values = _points_within_class(rng, nu.weights, classes, edge_classes) if edges else np.zeros(0, dtype=np.int64)
    log.debug("conditional sample n=%d with lattice sum %d", n, total)
    return graph_from_edges(n, nu.space, values)


def _backward_classes(rng: np.random.Generator, table, total: int, edges: int) -> np.ndarray:
    """Walk the prefix tables from the last edge to the first, drawing each class given the remaining sum."""
    log_q = table.step_log_probs
    steps = table.steps
    prefixes = prefix_tables(table)
    chosen = np.empty(edges, dtype=np.int64)
    remaining = total
    for edge in range(edges - 1, -1, -1):
        prefix = prefixes[edge]
        before = remaining - steps
        valid = (before >= 0) & (before < prefix.size)
        scores = np.full(steps.size, -np.inf)
        scores[valid] = log_q[valid] + prefix[before[valid]]
        weights = np.exp(scores - scores.max())
        pick = int(rng.choice(steps.size, p=weights / weights.sum()))
        chosen[edge] = steps[pick]
        remaining -= int(steps[pick])
    return chosen


def _rejection_sample(n: int, nu: FiniteMeasure, event: EventSpec, f: np.ndarray, seed: int,
                      config: GraphonConfig) -> WeightedGraph:
    rows, cols = np.triu_indices(n, 1)
    target = event.threshold * rows.size
    for attempt in range(config.rejection_max_tries):
        graph = sample_graph(n, nu, derive_seed(seed, attempt))
        total = float(f[graph.weights[rows, cols]].sum())
        if event.direction.sign * (total - target) >= -1e-9:
            log.debug("rejection sampler accepted after %d tries", attempt + 1)
            return graph
    raise ZeroProbabilityEventError(f"no sample met the event in {config.rejection_max_tries} tries")
