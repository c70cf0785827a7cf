"""Dyadic projections of measures and graphons on a compact interval."""

import logging
from typing import List, Optional, Union

import numpy as np
from scipy import integrate

from core.measure_core import kl_rows
from core.utils.errors import NumericalFailure, ValidationFailure
from core.utils.models import (
    DensityGraphon,
    DensityMeasure,
    FiniteMeasure,
    NestedPartitionScheme,
    StepGraphon,
)

log = logging.getLogger(__name__)


def _halve(masses: np.ndarray, times: int) -> np.ndarray:
    """Merge adjacent cell pairs ``times`` times along the last axis."""
    for _ in range(times):
        masses = masses.reshape(*masses.shape[:-1], -1, 2).sum(axis=-1)
    return masses


class DyadicProjector:
    """Projections pi_m and pi_{m,n} of one NestedPartitionScheme.

    Cell masses are integrated once at depth_max and merged pairwise level by
    level, so pi_m equals pi_{m,n} o pi_n bit for bit.
    """

    def __init__(self, scheme: NestedPartitionScheme):
        self.scheme = scheme

    def _check_level(self, m: int) -> None:
        if not 0 <= m <= self.scheme.depth_max:
            raise ValidationFailure(f"level {m} outside [0, {self.scheme.depth_max}]")

    def _check_interval(self, mu: DensityMeasure) -> None:
        if mu.interval != tuple(self.scheme.interval):
            raise ValidationFailure(f"density lives on {mu.interval}, scheme on {self.scheme.interval}")

    def finest_masses(self, mu: DensityMeasure) -> np.ndarray:
        """Normalized cell masses at depth_max (exact interval intersections)."""
        self._check_interval(mu)
        if not mu.is_probability:
            raise ValidationFailure(f"density has mass {mu.mass!r}, expected a probability")
        cumulative = mu.cdf(self.scheme.boundaries(self.scheme.depth_max))
        masses = np.maximum(np.diff(cumulative), 0.0)
        return masses / masses.sum()

    def project_measure(self, mu: DensityMeasure, m: int) -> FiniteMeasure:
        """pi_m(mu): cell masses on the level-m representatives."""
        self._check_level(m)
        masses = _halve(self.finest_masses(mu), self.scheme.depth_max - m)
        return FiniteMeasure(space=self.scheme.level_space(m), weights=masses)

    def level_of(self, measure: FiniteMeasure) -> int:
        """Level whose space the measure lives on."""
        size = measure.space.size
        level = size.bit_length() - 1
        if size != 2 ** level or level > self.scheme.depth_max or measure.space != self.scheme.level_space(level):
            raise ValidationFailure("measure does not live on a level space of this scheme")
        return level

    def project_between(self, measure: FiniteMeasure, m: int) -> FiniteMeasure:
        """pi_{m,n}: merge level-n weights into their level-m cells."""
        n = self.level_of(measure)
        if not 0 <= m <= n:
            raise ValidationFailure(f"cannot project level {n} onto finer level {m}")
        return FiniteMeasure(space=self.scheme.level_space(m), weights=_halve(measure.weights, n - m),
                             kind=measure.kind)

    def embed_level(self, measure: FiniteMeasure, n: int) -> FiniteMeasure:
        """Place each level-m atom on the level-n cell containing it (cells are half-open)."""
        m = self.level_of(measure)
        self._check_level(n)
        if n < m:
            raise ValidationFailure(f"cannot embed level {m} into coarser level {n}")
        if n == m:
            return measure
        targets = (2 * np.arange(2 ** m) + 1) * 2 ** (n - m - 1)
        weights = np.zeros(2 ** n)
        weights[targets] = measure.weights
        return FiniteMeasure(space=self.scheme.level_space(n), weights=weights, kind=measure.kind)

    def _graphon_masses(self, W: DensityGraphon) -> np.ndarray:
        size = 2 ** self.scheme.depth_max
        masses = np.empty((W.n, W.n, size))
        for i in range(W.n):
            for j in range(W.n):
                if W.symmetric and j < i:
                    masses[i, j] = masses[j, i]
                else:
                    masses[i, j] = self.finest_masses(W.cells[i][j])
        return masses

    def project_graphon(self, W: DensityGraphon, m: int) -> StepGraphon:
        """Cell-wise pi_m."""
        self._check_level(m)
        masses = _halve(self._graphon_masses(W), self.scheme.depth_max - m)
        return StepGraphon(n=W.n, space=self.scheme.level_space(m), cells=masses, symmetric=W.symmetric)

    def rate_by_projections(
        self,
        W: Union[DensityGraphon, DensityMeasure],
        nu: DensityMeasure,
        m_max: Optional[int] = None,
    ) -> List[float]:
        """
        Entropies H(pi_m W | pi_m nu) for m = 1..m_max.

        Args:
            W: Density graphon, or a single density read as a constant graphon
            nu: Reference density
            m_max: Deepest level, defaults to depth_max

        Returns:
            Nondecreasing sequence of graphon entropies
        """
        m_max = self.scheme.depth_max if m_max is None else m_max
        self._check_level(m_max)
        if isinstance(W, DensityMeasure):
            W = DensityGraphon(n=1, cells=((W,),))
        cells = self._graphon_masses(W)
        reference = self.finest_masses(nu)
        rates = {}
        for m in range(self.scheme.depth_max, 0, -1):
            if m <= m_max:
                per_cell = kl_rows(cells, reference)
                rates[m] = float("inf") if np.any(np.isinf(per_cell)) else float(per_cell.sum() / W.n ** 2)
            cells = _halve(cells, 1)
            reference = _halve(reference, 1)
        sequence = [rates[m] for m in range(1, m_max + 1)]
        log.debug("rate by projections up to level %d: %s", m_max, sequence[-1:] or sequence)
        return sequence


def _common_breakpoints(omega: DensityMeasure, nu: DensityMeasure) -> np.ndarray:
    if omega.interval != nu.interval:
        raise ValidationFailure(f"densities live on {omega.interval} and {nu.interval}")
    return np.union1d(omega.breakpoints, nu.breakpoints)


def density_relative_entropy(omega: DensityMeasure, nu: DensityMeasure) -> float:
    """Integral of omega log(omega / nu) by adaptive quadrature on each common piece."""
    total = 0.0
    edges = _common_breakpoints(omega, nu)
    for left, right in zip(edges[:-1], edges[1:]):
        ends = np.array([left, 0.5 * (left + right), right])
        own, ref = omega.density(ends), nu.density(ends)
        if np.all(own <= 0):
            continue
        if np.all(ref <= 0):
            return float("inf")

        def integrand(x: float) -> float:
            a = float(omega.density(x)[0])
            b = float(nu.density(x)[0])
            if a <= 0:
                return 0.0
            if b <= 0:
                return float("inf")
            return a * (np.log(a) - np.log(b))

        value, _ = integrate.quad(integrand, left, right, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += value
    if np.isnan(total):
        raise NumericalFailure("density relative entropy evaluated to NaN")
    return max(total, 0.0)


def graphon_density_entropy(W: DensityGraphon, nu: DensityMeasure) -> float:
    """Average of density_relative_entropy over the cells of W."""
    values = [density_relative_entropy(cell, nu) for row in W.cells for cell in row]
    return float(np.sum(values) / W.n ** 2)
