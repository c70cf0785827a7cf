"""Step definitions for the acceptance scenarios in features/acceptance.feature."""

import math
from typing import List

import mpmath
import numpy as np
import pytest
from pytest_bdd import given, parsers, scenarios, then, when

from core.discretization import DyadicProjector
from core.entropy_rate import graphon_entropy, optimal_kernel, random_kernel, variational_value
from core.graphon_core import approximant, relabel, step
from core.measure_core import bernoulli, discrete_space, kl_rows, lp_distance, lp_distance_bruteforce, real_line_space
from core.cut_metric import delta_cut
from core.rate_minimizer import legendre_value, minimize_rate
from core.sampling_ldp import concentration_experiment, event_constraints, kl_product, kl_product_bruteforce, verify_ldp
from core.utils.models import (
    DensityMeasure,
    Direction,
    EventKind,
    EventSpec,
    FiniteMeasure,
    NestedPartitionScheme,
    StepGraphon,
)

scenarios("acceptance.feature")


def random_measure(rng: np.random.Generator, space) -> FiniteMeasure:
    return FiniteMeasure(space=space, weights=rng.dirichlet(np.ones(space.size)))


def random_graphon(rng: np.random.Generator, n: int, k: int) -> StepGraphon:
    cells = rng.dirichlet(np.ones(k), size=(n, n))
    cells = np.where(np.triu(np.ones((n, n), dtype=bool))[:, :, None], cells, cells.transpose(1, 0, 2))
    return StepGraphon(n=n, space=discrete_space(range(k)), cells=cells)


def random_partition(rng: np.random.Generator, n: int) -> List[List[int]]:
    labels = rng.integers(0, rng.integers(1, n + 1), size=n)
    return [np.flatnonzero(labels == label).tolist() for label in np.unique(labels)]


def random_density(rng: np.random.Generator) -> DensityMeasure:
    pieces = int(rng.integers(1, 6))
    inner = np.sort(rng.uniform(0.05, 0.95, size=pieces - 1))
    breakpoints = np.concatenate(([0.0], inner, [1.0]))
    values = rng.uniform(0.1, 2.0, size=pieces)
    values = values / float(np.dot(values, np.diff(breakpoints)))
    return DensityMeasure(breakpoints=breakpoints, values=values)


def sizes_from(text: str) -> List[int]:
    return [int(part) for part in text.split(",")]


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


# ===== Given Steps =====


@given(parsers.parse("{count:d} random graphons on {n:d} blocks with {k:d} weight values"), target_fixture="pairs")
def graphon_law_pairs(rng, count, n, k):
    return [(random_graphon(rng, n, k), random_measure(rng, discrete_space(range(k)))) for _ in range(count)]


@given(parsers.parse("the edge law Bernoulli({p:g})"), target_fixture="nu")
def edge_law(p):
    return bernoulli(p)


@given(parsers.parse("the event that the edge density is at least {threshold:g}"), target_fixture="event")
def edge_density_event(threshold):
    return EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=[0.0, 1.0], direction=Direction.GE, threshold=threshold)


@given(
    parsers.parse("{count:d} random measure pairs on euclidean spaces of each size from {low:d} to {high:d}"),
    target_fixture="measure_pairs",
)
def measure_pairs(rng, count, low, high):
    pairs = []
    for k in range(low, high + 1):
        for _ in range(count):
            space = real_line_space(np.concatenate(([0.0], np.sort(rng.uniform(0.01, 1.0, size=k - 1)))), 0)
            pairs.append((random_measure(rng, space), random_measure(rng, space)))
    return pairs


@given(
    parsers.parse("{count:d} random full-support graphons with at most {n_max:d} blocks and {k_max:d} weight values"),
    target_fixture="pairs",
)
def full_support_pairs(rng, count, n_max, k_max):
    pairs = []
    for _ in range(count):
        n, k = int(rng.integers(1, n_max + 1)), int(rng.integers(2, k_max + 1))
        pairs.append((random_graphon(rng, n, k), random_measure(rng, discrete_space(range(k)))))
    return pairs


@given(parsers.parse("{count:d} random graphons with random block partitions"), target_fixture="partitioned")
def partitioned_graphons(rng, count):
    cases = []
    for _ in range(count):
        n = int(rng.integers(2, 7))
        cases.append((random_graphon(rng, n, 3), random_measure(rng, discrete_space(range(3))),
                      random_partition(rng, n)))
    return cases


@given(parsers.parse("the dyadic scheme on the unit interval with depth {depth:d}"), target_fixture="projector")
def dyadic_projector(depth):
    return DyadicProjector(NestedPartitionScheme(interval=(0.0, 1.0), depth_max=depth))


@given(
    parsers.parse("{count:d} random graphons for each block count from {low:d} to {high:d}"),
    target_fixture="graphons",
)
def graphons_by_size(rng, count, low, high):
    return [random_graphon(rng, n, 2) for n in range(low, high + 1) for _ in range(count)]


@given(parsers.parse("{count:d} random edge laws with functionals and thresholds"), target_fixture="triples")
def rate_triples(rng, count):
    triples = []
    for _ in range(count):
        nu = random_measure(rng, discrete_space(range(3)))
        f = rng.normal(size=3)
        mean = float(nu.weights @ f)
        triples.append((nu, f, mean + rng.uniform(0.2, 0.6) * (f.max() - mean)))
    return triples


# ===== When Steps =====


@when(parsers.parse("the exact large-deviation table is computed for n in {sizes}"), target_fixture="report")
def exact_table(nu, event, sizes):
    return verify_ldp(nu, event, sizes_from(sizes))


@when(
    parsers.parse("{reps:d} conditioned samples are compared with the rate minimizer for n in {sizes}"),
    target_fixture="concentration",
)
def conditioned_distances(nu, event, reps, sizes):
    return concentration_experiment(nu, event, sizes_from(sizes), reps=reps, seed=2024)


# ===== Then Steps =====


@then(parsers.parse("the enumerated divergence equals the edge-factorized sum within {tol:g}"))
def divergence_factorizes(pairs, tol):
    for W, nu in pairs:
        assert abs(kl_product(W, nu).total - kl_product_bruteforce(W, nu)) <= tol


@then(parsers.parse(
    "the rate target is the relative entropy of Bernoulli({p:g}) to Bernoulli({q:g}) within {tol:g}"
))
def rate_target_is_edge_entropy(report, p, q, tol):
    mpmath.mp.dps = 40
    p, q = mpmath.mpf(str(p)), mpmath.mpf(str(q))
    expected = float(p * mpmath.log(p / q) + (1 - p) * mpmath.log((1 - p) / (1 - q)))
    assert expected == pytest.approx(0.0871767, abs=1e-7)
    assert all(abs(row.rate_target - expected) <= tol for row in report.rows)


@then(parsers.parse("the absolute gap at n={large:d} is smaller than at n={small:d}"))
def gap_shrinks(report, large, small):
    gaps = {row.n: abs(row.gap) for row in report.rows}
    assert gaps[large] < gaps[small]


@then(parsers.parse("the absolute gap at n={n:d} is at most {bound:g}"))
def gap_bounded(report, n, bound):
    assert next(abs(row.gap) for row in report.rows if row.n == n) <= bound


@then(parsers.parse("the transport distance equals the subset oracle within {tol:g}"))
def transport_matches_oracle(measure_pairs, tol):
    for first, second in measure_pairs:
        assert abs(lp_distance(first, second) - lp_distance_bruteforce(first, second)) <= tol


@then(parsers.parse("the metric axioms hold within {tol:g}"))
def metric_axioms(measure_pairs, tol):
    for (a, b), (c, _) in zip(measure_pairs, measure_pairs[1:]):
        if a.space != c.space:
            continue
        ab = lp_distance(a, b)
        assert lp_distance(a, a) == 0.0
        assert abs(ab - lp_distance(b, a)) <= tol
        assert lp_distance(a, c) <= ab + lp_distance(b, c) + tol


@then(parsers.parse("the optimal kernel attains the entropy within {tol:g}"))
def optimal_kernel_attains(pairs, tol):
    for W, nu in pairs:
        assert abs(variational_value(W, nu, optimal_kernel(W, nu)) - graphon_entropy(W, nu)) <= tol


@then(parsers.parse("{count:d} random kernels never exceed the entropy by more than {tol:g}"))
def kernels_below_entropy(rng, pairs, count, tol):
    per_pair = count // len(pairs)
    for W, nu in pairs:
        entropy = graphon_entropy(W, nu)
        for _ in range(per_pair):
            A = random_kernel(W.n, W.space.size, scale=float(rng.uniform(0.1, 5.0)), rng=rng)
            assert variational_value(W, nu, A) <= entropy + tol


@then(parsers.parse("stepping never raises the entropy by more than {tol:g}"))
def stepping_monotone(partitioned, tol):
    for W, nu, groups in partitioned:
        assert graphon_entropy(step(W, groups, keep_grid=True), nu) <= graphon_entropy(W, nu) + tol


@then("dyadic approximants have nondecreasing entropy up to the full grid")
def approximants_monotone(rng):
    for _ in range(20):
        W = random_graphon(rng, 8, 3)
        nu = random_measure(rng, discrete_space(range(3)))
        entropies = [graphon_entropy(approximant(W, k), nu) for k in (1, 2, 4, 8)]
        assert all(later >= earlier - 1e-12 for earlier, later in zip(entropies, entropies[1:]))
        assert entropies[-1] == pytest.approx(graphon_entropy(W, nu), abs=1e-12)


@then("projections of a random density compose exactly")
def projections_compose(rng, projector):
    density = random_density(rng)
    depth = projector.scheme.depth_max
    for n in range(depth + 1):
        fine = projector.project_measure(density, n)
        for m in range(n + 1):
            assert np.array_equal(projector.project_between(fine, m).weights,
                                  projector.project_measure(density, m).weights)


@then(parsers.parse("projected rates are nondecreasing within {tol:g} on {count:d} random density pairs"))
def projected_rates_monotone(rng, projector, tol, count):
    for _ in range(count):
        rates = projector.rate_by_projections(random_density(rng), random_density(rng))
        assert all(later >= earlier - tol for earlier, later in zip(rates, rates[1:]))


@then(parsers.parse(
    "the projected rate of density 2x against the uniform density is within {tol:g} of ln 2 - 1/2"
))
def linear_density_rate(projector, tol):
    linear = DensityMeasure(breakpoints=[0.0, 1.0], values=[0.0], slopes=[2.0])
    uniform = DensityMeasure(breakpoints=[0.0, 1.0], values=[1.0])
    rates = projector.rate_by_projections(linear, uniform)
    assert abs(rates[-1] - (math.log(2.0) - 0.5)) <= tol


@then("every relabeling is at unlabeled cut distance 0 in exact mode")
def relabeling_is_free(rng, graphons):
    for W in graphons:
        assert delta_cut(W, relabel(W, rng.permutation(W.n))).value == 0.0


@then(parsers.parse(
    "the unlabeled cut distance satisfies the triangle inequality within {tol:g} on {count:d} random triples"
))
def delta_triangle(rng, tol, count):
    for _ in range(count):
        U, V, W = (random_graphon(rng, 3, 2) for _ in range(3))
        assert delta_cut(U, W).value <= delta_cut(U, V).value + delta_cut(V, W).value + tol


@then("the median unlabeled cut distance strictly decreases")
def medians_decrease(concentration):
    medians = [row.median for row in concentration.rows]
    assert all(later < earlier for earlier, later in zip(medians, medians[1:]))


@then(parsers.parse("the minimal rate matches the Legendre value within {tol:g}"))
def legendre_duality(triples, tol):
    for nu, f, t in triples:
        event = EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=f, direction=Direction.GE, threshold=t)
        assert abs(minimize_rate(nu, event_constraints(event)).value - legendre_value(nu, f, t)) <= tol


@then(parsers.parse("the minimal rate matches a constant-graphon grid search with step {step:g} within {tol:g}"))
def grid_duality(triples, step, tol):
    steps = int(round(1.0 / step))
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    grid = np.stack([i[keep] / steps, j[keep] / steps, (steps - i[keep] - j[keep]) / steps], axis=1)
    for nu, f, t in triples:
        event = EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=f, direction=Direction.GE, threshold=t)
        value = minimize_rate(nu, event_constraints(event)).value
        brute = float(kl_rows(grid[grid @ f >= t], nu.weights).min())
        assert value <= brute + 1e-12
        assert brute - value <= tol
