"""Finite weight spaces, measures, relative entropy and exponential tilting."""

import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from core.utils.errors import MismatchedSpaceError, NumericalFailure, ValidationFailure
from core.utils.models import FiniteMeasure, MeasureKind, MetricKind, WeightSpace

log = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


def discrete_space(labels: Sequence, zero_index: int = 0) -> WeightSpace:
    """Weight space with the discrete metric (distance 1 between distinct points)."""
    return WeightSpace(points=tuple(labels), zero_index=zero_index, metric=MetricKind.DISCRETE)


def real_line_space(values: ArrayLike, zero_index: Optional[int] = None) -> WeightSpace:
    """Weight space of real points with the metric |x - y|.

    Args:
        values: Real weight values
        zero_index: Index of the distinguished 0; defaults to the point equal to 0

    Returns:
        Euclidean WeightSpace
    """
    points = tuple(float(v) for v in values)
    if zero_index is None:
        if 0.0 not in points:
            raise ValidationFailure("real_line_space needs the value 0 or an explicit zero_index")
        zero_index = points.index(0.0)
    return WeightSpace(points=points, zero_index=zero_index, metric=MetricKind.EUCLIDEAN)


BINARY_SPACE = discrete_space((0, 1))


def dirac(space: WeightSpace, index: int) -> FiniteMeasure:
    """Point mass at space.points[index]."""
    if not 0 <= index < space.size:
        raise ValidationFailure(f"point index {index} out of range for {space.size} points")
    weights = np.zeros(space.size)
    weights[index] = 1.0
    return FiniteMeasure(space=space, weights=weights)


def bernoulli(p: float, space: WeightSpace = BINARY_SPACE) -> FiniteMeasure:
    """Bernoulli(p) on a two-point space: mass p on index 1."""
    if space.size != 2:
        raise ValidationFailure("bernoulli needs a two-point space")
    if not 0.0 <= p <= 1.0:
        raise ValidationFailure(f"bernoulli parameter {p} outside [0, 1]")
    return FiniteMeasure(space=space, weights=[1.0 - p, p])


def check_same_space(first: WeightSpace, second: WeightSpace) -> None:
    if first != second:
        raise MismatchedSpaceError("objects live on different weight spaces")


def as_function(f: ArrayLike, space: WeightSpace) -> np.ndarray:
    """Validate a real function on the points of a space."""
    values = np.asarray(f, dtype=float)
    if values.shape != (space.size,):
        raise ValidationFailure(f"function needs {space.size} values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValidationFailure("function values must be finite")
    return values


def measure_mean(omega: FiniteMeasure, f: ArrayLike) -> float:
    """<omega, f>."""
    return float(np.dot(omega.weights, as_function(f, omega.space)))


def kl_rows(omega: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Relative entropy of every row of omega (..., k) against nu (k,), +inf where support fails."""
    omega = np.asarray(omega, dtype=float)
    positive = omega > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(positive, omega * (np.log(np.where(positive, omega, 1.0)) - np.log(nu)), 0.0)
    values = terms.sum(axis=-1)
    blocked = np.any(positive & (nu == 0), axis=-1)
    values = np.where(blocked, np.inf, np.maximum(values, 0.0))
    if np.any(np.isnan(values)):
        raise NumericalFailure("relative entropy evaluated to NaN")
    return values


def kl_divergence(omega: FiniteMeasure, nu: FiniteMeasure) -> float:
    """Relative entropy H(omega | nu) with 0 log 0 = 0.

    Returns +inf when omega is not a probability measure or is not absolutely
    continuous with respect to nu.
    """
    check_same_space(omega.space, nu.space)
    if not nu.is_probability:
        raise ValidationFailure("reference measure must be a probability measure")
    if not omega.is_probability:
        return float("inf")
    return float(kl_rows(omega.weights, nu.weights))


def log_mgf(f: ArrayLike, nu: FiniteMeasure) -> float:
    """log sum_i exp(f_i) nu_i, max-shift stabilized."""
    values = as_function(f, nu.space)
    return float(logsumexp(values, b=nu.weights))


def tilt(nu: FiniteMeasure, f: ArrayLike, theta: float) -> FiniteMeasure:
    """Exponential tilt: weights proportional to nu_i exp(theta f_i).

    Infinite theta returns nu restricted to the maximizers (or minimizers) of f on
    its support.
    """
    values = as_function(f, nu.space)
    if theta == 0:
        return nu
    support = nu.weights > 0
    if np.isinf(theta):
        masked = np.where(support, values, -np.inf if theta > 0 else np.inf)
        extreme = masked.max() if theta > 0 else masked.min()
        keep = support & (values == extreme)
        weights = np.where(keep, nu.weights, 0.0)
    else:
        with np.errstate(divide="ignore"):
            logits = np.where(support, np.log(nu.weights) + theta * values, -np.inf)
        weights = np.exp(logits - logits.max())
    weights = weights / weights.sum()
    if not np.all(np.isfinite(weights)):
        raise NumericalFailure(f"tilt overflowed at theta={theta!r}")
    return FiniteMeasure(space=nu.space, weights=weights, kind=MeasureKind.PROBABILITY)


def tilted_mean(nu: FiniteMeasure, f: ArrayLike, theta: float) -> float:
    return measure_mean(tilt(nu, f, theta), f)
