"""Levy-Prokhorov distance on finite metric spaces.

For a fixed thickening radius the worst-case set gap max_U [eta1(U) - eta2(U^eps)]
equals the mass of eta1 that cannot be moved within the radius, which is a
transportation problem. Both directions come out of a single ``ot.emd2`` call
on a problem augmented with one dummy point per side.
"""

import functools
import logging
from typing import Tuple

import numpy as np
import ot

from core.measure_core.measures import check_same_space
from core.utils.errors import ValidationFailure
from core.utils.models import FiniteMeasure

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-12
BRUTEFORCE_MAX_POINTS = 8
BATCH_MAX_POINTS = 10


def distance_levels(dist: np.ndarray) -> np.ndarray:
    """Sorted distinct pairwise distances, starting at 0."""
    return np.unique(np.concatenate(([0.0], dist.ravel())))


def transport_deficits(a: np.ndarray, b: np.ndarray, allowed: np.ndarray) -> Tuple[float, float]:
    """Largest set gaps in both directions when mass may only move along ``allowed``.

    Args:
        a: Weights of the first measure
        b: Weights of the second measure
        allowed: Boolean matrix of admissible moves

    Returns:
        (max_U a(U) - b(N(U)), max_U b(U) - a(N(U))) where N is the allowed neighborhood
    """
    m1, m2 = float(a.sum()), float(b.sum())
    if m1 == 0.0 and m2 == 0.0:
        return 0.0, 0.0
    k = a.size
    cost = np.ones((k + 1, k + 1))
    cost[:k, :k] = np.where(allowed, 0.0, 1.0)
    cost[k, :] = 0.0
    source = np.append(a, m2)
    target = np.append(b, m1)
    # emd2 insists on equal totals; they agree up to summation order
    target = target * (source.sum() / target.sum())
    unmatched = float(ot.emd2(source, target, cost))
    forward = max(unmatched, 0.0)
    backward = max(unmatched + m2 - m1, 0.0)
    return forward, backward


def _gap_at(a: np.ndarray, b: np.ndarray, dist: np.ndarray, radius: float) -> float:
    forward, backward = transport_deficits(a, b, dist <= radius)
    return max(forward, backward)


def lp_feasible(eta1: FiniteMeasure, eta2: FiniteMeasure, epsilon: float) -> bool:
    """Whether both Prokhorov inequalities hold at radius epsilon.

    Thickenings use strict distance < epsilon; at epsilon = 0 the thickening of a
    set is the set itself.
    """
    check_same_space(eta1.space, eta2.space)
    if epsilon < 0:
        raise ValidationFailure(f"epsilon must be nonnegative, got {epsilon}")
    dist = eta1.space.distance_matrix()
    allowed = dist <= 0.0 if epsilon == 0 else dist < epsilon
    forward, backward = transport_deficits(eta1.weights, eta2.weights, allowed)
    return max(forward, backward) <= epsilon + FEASIBILITY_TOL


def lp_distance(eta1: FiniteMeasure, eta2: FiniteMeasure) -> float:
    """Levy-Prokhorov distance, exact on the finite space.

    The infimum over radii is min_k max(d_k, g_k) over the distance levels d_k,
    where g_k is the set gap when points within d_k are identified. g_k is
    nonincreasing, so the crossing is located by binary search.
    """
    check_same_space(eta1.space, eta2.space)
    return _lp_distance_arrays(eta1.weights, eta2.weights, eta1.space.distance_matrix())


def _lp_distance_arrays(a: np.ndarray, b: np.ndarray, dist: np.ndarray) -> float:
    if np.array_equal(a, b):
        return 0.0
    levels = distance_levels(dist)
    gaps = {}

    def gap(k: int) -> float:
        if k not in gaps:
            gaps[k] = _gap_at(a, b, dist, levels[k])
        return gaps[k]

    low, high = 0, levels.size
    while low < high:
        mid = (low + high) // 2
        if gap(mid) <= levels[mid]:
            high = mid
        else:
            low = mid + 1
    if low == levels.size:
        return gap(levels.size - 1)
    if low == 0:
        return 0.0
    return float(min(levels[low], gap(low - 1)))


@functools.lru_cache(maxsize=16)
def subset_indicators(k: int) -> np.ndarray:
    """(2^k, k) matrix of 0/1 rows, row m is the bitmask m."""
    masks = np.arange(2 ** k)[:, None]
    return ((masks >> np.arange(k)[None, :]) & 1).astype(float)


def _neighborhoods(subsets: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    return ((subsets @ allowed.astype(float)) > 0).astype(float)


def lp_feasible_bruteforce(eta1: FiniteMeasure, eta2: FiniteMeasure, epsilon: float) -> bool:
    """All-subsets check of both Prokhorov inequalities (test oracle)."""
    check_same_space(eta1.space, eta2.space)
    k = eta1.space.size
    if k > BRUTEFORCE_MAX_POINTS:
        raise ValidationFailure(f"brute force is limited to {BRUTEFORCE_MAX_POINTS} points")
    dist = eta1.space.distance_matrix()
    allowed = dist <= 0.0 if epsilon == 0 else dist < epsilon
    subsets = subset_indicators(k)
    thick = _neighborhoods(subsets, allowed)
    a, b = eta1.weights, eta2.weights
    forward = subsets @ a <= thick @ b + epsilon + FEASIBILITY_TOL
    backward = subsets @ b <= thick @ a + epsilon + FEASIBILITY_TOL
    return bool(np.all(forward) and np.all(backward))


def lp_distance_bruteforce(eta1: FiniteMeasure, eta2: FiniteMeasure) -> float:
    """Smallest candidate radius at which every subset inequality holds (test oracle).

    The infimum is a distance level or a set gap, so those are the candidates. Just
    above a candidate eps the strict thickening is the closed one, dist <= eps.
    Feasibility is monotone in the radius, so the candidates are bisected.
    """
    check_same_space(eta1.space, eta2.space)
    k = eta1.space.size
    if k > BRUTEFORCE_MAX_POINTS:
        raise ValidationFailure(f"brute force is limited to {BRUTEFORCE_MAX_POINTS} points")
    dist = eta1.space.distance_matrix()
    subsets = subset_indicators(k)
    a, b = eta1.weights, eta2.weights
    mass_a, mass_b = subsets @ a, subsets @ b

    def holds_above(eps: float) -> bool:
        thick = _neighborhoods(subsets, dist <= eps)
        return bool(np.all(mass_a <= thick @ b + eps + FEASIBILITY_TOL)
                    and np.all(mass_b <= thick @ a + eps + FEASIBILITY_TOL))

    levels = distance_levels(dist)
    candidates = [levels]
    for level in levels:
        thick = _neighborhoods(subsets, dist <= level)
        candidates += [mass_a - thick @ b, mass_b - thick @ a]
    radii = np.unique(np.concatenate(candidates))
    radii = radii[radii >= 0.0]
    low, high = 0, radii.size - 1
    while low < high:
        mid = (low + high) // 2
        if holds_above(radii[mid]):
            high = mid
        else:
            low = mid + 1
    return float(radii[low])


def lp_distance_batch(first: np.ndarray, second: np.ndarray, dist: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Levy-Prokhorov distances of many measure pairs on one small space.

    Args:
        first: (P, k) weights
        second: (P, k) weights
        dist: (k, k) distance matrix
        chunk: Pairs evaluated per block

    Returns:
        (P,) distances
    """
    first = np.atleast_2d(np.asarray(first, dtype=float))
    second = np.atleast_2d(np.asarray(second, dtype=float))
    k = dist.shape[0]
    if k > BATCH_MAX_POINTS:
        return np.array([_lp_distance_arrays(a, b, dist) for a, b in zip(first, second)])
    subsets = subset_indicators(k)
    levels = distance_levels(dist)
    thickenings = [_neighborhoods(subsets, dist <= level) for level in levels]
    out = np.empty(first.shape[0])
    for start in range(0, first.shape[0], chunk):
        a = first[start:start + chunk].T
        b = second[start:start + chunk].T
        mass_a, mass_b = subsets @ a, subsets @ b
        best = np.full(a.shape[1], np.inf)
        for level, thick in zip(levels, thickenings):
            gap = np.maximum((mass_a - thick @ b).max(axis=0), (mass_b - thick @ a).max(axis=0))
            best = np.minimum(best, np.maximum(level, np.maximum(gap, 0.0)))
        out[start:start + chunk] = best
    return out
