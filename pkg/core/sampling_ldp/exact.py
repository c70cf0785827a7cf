"""Exact small-instance oracles: factorized divergence and lattice sum laws."""

import itertools
import logging
import math
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from core.entropy_rate import graphon_entropy, per_cell_entropy
from core.measure_core import as_function, check_same_space
from core.utils.errors import LatticeError, NumericalFailure, ValidationFailure
from core.utils.models import (
    Direction,
    EventKind,
    EventSpec,
    FiniteMeasure,
    GraphonConfig,
    KlProductReport,
    StepGraphon,
    SumDistribution,
)

log = logging.getLogger(__name__)

LATTICE_TOL = 1e-12
THRESHOLD_SLACK = 1e-9


def kl_product(W: StepGraphon, nu: FiniteMeasure) -> KlProductReport:
    """
    Divergence of the graphon-driven graph law from the i.i.d. law, edge by edge.

    Args:
        W: Graphon with one vertex per block
        nu: Edge law of the i.i.d. model

    Returns:
        KlProductReport; total is +inf with the first offending cell named when a
        cell is not absolutely continuous with respect to nu
    """
    per_cell = per_cell_entropy(W, nu)
    rows, cols = np.triu_indices(W.n, 1)
    off_diagonal = per_cell[rows, cols]
    offending = None
    blocked = np.flatnonzero(np.isinf(off_diagonal))
    if blocked.size:
        offending = (int(rows[blocked[0]]), int(cols[blocked[0]]))
        total = float("inf")
    else:
        total = float(off_diagonal.sum())
    diagonal = np.diag(per_cell)
    correction = float("inf") if np.any(np.isinf(diagonal)) else float(diagonal.sum() / W.n ** 2)
    return KlProductReport(
        n=W.n,
        total=total,
        scaled=2.0 * total / W.n ** 2,
        full_entropy=graphon_entropy(W, nu),
        diagonal_correction=correction,
        offending_cell=offending,
    )


def kl_product_bruteforce(W: StepGraphon, nu: FiniteMeasure, config: Optional[GraphonConfig] = None) -> float:
    """Sum over every weighted graph V of P(V) log(P(V) / mu(V)) (enumeration oracle)."""
    config = config or GraphonConfig()
    check_same_space(W.space, nu.space)
    rows, cols = np.triu_indices(W.n, 1)
    k = W.space.size
    count = k ** rows.size
    if count > config.max_enumeration:
        raise ValidationFailure(f"{count} graphs exceed the enumeration limit {config.max_enumeration}")
    graphs = np.array(list(itertools.product(range(k), repeat=rows.size)), dtype=np.int64).reshape(count, rows.size)
    with np.errstate(divide="ignore"):
        log_cells = np.log(W.cells[rows, cols])
        log_nu = np.log(nu.weights)
    edge_index = np.arange(rows.size)
    log_p = log_cells[edge_index[None, :], graphs].sum(axis=1)
    log_mu = log_nu[graphs].sum(axis=1)
    charged = np.isfinite(log_p)
    if np.any(charged & ~np.isfinite(log_mu)):
        return float("inf")
    return float(np.sum(np.exp(log_p[charged]) * (log_p[charged] - log_mu[charged])))


def lattice(values: Sequence[float], max_denominator: int) -> Tuple[int, np.ndarray]:
    """
    Common denominator D and integer numerators of values on a rational lattice.

    Raises:
        LatticeError: when some value is not within 1e-12 of a fraction with
            denominator at most max_denominator
    """
    fractions = []
    for value in values:
        fraction = Fraction(float(value)).limit_denominator(max_denominator)
        if abs(float(fraction) - value) > LATTICE_TOL * max(1.0, abs(value)):
            raise LatticeError(
                f"value {value!r} is not on a rational lattice with denominator <= {max_denominator}; "
                "rescale f to rational values"
            )
        fractions.append(fraction)
    denominator = reduce(math.lcm, (fr.denominator for fr in fractions), 1)
    numerators = np.array([int(fr * denominator) for fr in fractions], dtype=np.int64)
    return denominator, numerators


def _binomial_log_pmf(edges: int, log_p: float, log_q: float) -> np.ndarray:
    j = np.arange(edges + 1)
    return gammaln(edges + 1) - gammaln(j + 1) - gammaln(edges - j + 1) + j * log_p + (edges - j) * log_q


def _add_edge(current: np.ndarray, steps: np.ndarray, step_log_probs: np.ndarray) -> np.ndarray:
    """Log-domain convolution of a sum law with one more edge."""
    shifted = np.full((steps.size, current.size + int(steps.max())), -np.inf)
    for row, (step, weight) in enumerate(zip(steps, step_log_probs)):
        shifted[row, step:step + current.size] = current + weight
    return logsumexp(shifted, axis=0)


def sum_distribution(n: int, nu: FiniteMeasure, f: Sequence[float],
                     config: Optional[GraphonConfig] = None) -> SumDistribution:
    """
    Exact law of the sum of f over the n(n-1)/2 i.i.d. edges.

    Two lattice classes give a binomial law; more classes are convolved edge by
    edge in the log domain.

    Args:
        n: Vertex count
        nu: Edge law
        f: Real function on the points, rational up to 1e-12
        config: Lattice and size limits

    Returns:
        SumDistribution over j, the sum being (base + step * j) / denominator
    """
    config = config or GraphonConfig()
    values = as_function(f, nu.space)
    edges = n * (n - 1) // 2
    if edges > config.max_exact_edges:
        raise ValidationFailure(f"{edges} edges exceed the exact limit {config.max_exact_edges}")
    support = np.flatnonzero(nu.weights > 0)
    denominator, numerators = lattice(values[support], config.lattice_max_denominator)
    lowest = int(numerators.min())
    shifted = numerators - lowest
    step = reduce(math.gcd, shifted.tolist(), 0) or 1
    point_classes = np.full(nu.space.size, -1, dtype=np.int64)
    point_classes[support] = shifted // step
    steps = np.unique(point_classes[support])
    step_log_probs = np.log(np.array([nu.weights[point_classes == c].sum() for c in steps]))

    if steps.size == 1:
        log_pmf = np.zeros(1)
    elif steps.size == 2:
        log_pmf = _binomial_log_pmf(edges, step_log_probs[1], step_log_probs[0])
    else:
        log_pmf = np.zeros(1)
        for _ in range(edges):
            log_pmf = _add_edge(log_pmf, steps, step_log_probs)
    if np.any(np.isnan(log_pmf)):
        raise NumericalFailure("lattice sum law evaluated to NaN")
    return SumDistribution(
        edges=edges,
        denominator=denominator,
        base=edges * lowest,
        step=step,
        log_pmf=log_pmf,
        point_classes=point_classes,
        steps=steps,
        step_log_probs=step_log_probs,
    )


def prefix_tables(table: SumDistribution) -> List[np.ndarray]:
    """Log laws of the lattice sum over the first e edges, e = 0..edges-1."""
    prefixes = [np.zeros(1)]
    for _ in range(table.edges - 1):
        prefixes.append(_add_edge(prefixes[-1], table.steps, table.step_log_probs))
    return prefixes[:max(table.edges, 0)]


def event_range(table: SumDistribution, event: EventSpec) -> Tuple[int, int]:
    """Inclusive range of lattice indices j meeting the event (low > high when empty)."""
    if event.kind is not EventKind.MEAN_FUNCTIONAL:
        raise ValidationFailure("lattice tables answer mean-functional events only")
    position = (event.threshold * table.edges * table.denominator - table.base) / table.step
    last = table.log_pmf.size - 1
    if event.direction is Direction.GE:
        return max(math.ceil(position - THRESHOLD_SLACK), 0), last
    return 0, min(math.floor(position + THRESHOLD_SLACK), last)


def event_log_prob_exact(n: int, nu: FiniteMeasure, event: EventSpec,
                         config: Optional[GraphonConfig] = None) -> float:
    """
    log P(sum over edges of f >= t * N) (or <=) for i.i.d. nu edges, exactly.

    Returns -inf for impossible events.
    """
    table = sum_distribution(n, nu, event.f, config)
    low, high = event_range(table, event)
    if low > high:
        return float("-inf")
    value = float(logsumexp(table.log_pmf[low:high + 1]))
    log.debug("exact log probability n=%d: %.12g", n, value)
    return value
