"""Simulated annealing over block permutations."""

import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from core.utils.models import GraphonConfig
from core.utils.parallel import ordered_map
from core.utils.seeding import derive_seed, generator

log = logging.getLogger(__name__)

Permutation = Tuple[int, ...]


class PermutationAnnealer:
    """Minimize (or maximize) an objective over permutations with swap-two-blocks moves.

    The schedule is geometric: the temperature starts at the spread of objective
    values around the start permutation and is multiplied by ``anneal_ratio`` after
    every epoch of ``size`` proposals, for ``anneal_iterations_per_block`` epochs.
    """

    def __init__(
        self,
        objective: Callable[[Permutation], float],
        size: int,
        config: Optional[GraphonConfig] = None,
        maximize: bool = False,
    ):
        self.objective = objective
        self.size = size
        self.config = config or GraphonConfig()
        self.sign = -1.0 if maximize else 1.0

    def _energy(self, perm: Permutation, cache: Dict[Permutation, float]) -> float:
        if perm not in cache:
            cache[perm] = self.sign * self.objective(perm)
        return cache[perm]

    @staticmethod
    def _swapped(perm: Permutation, i: int, j: int) -> Permutation:
        moved = list(perm)
        moved[i], moved[j] = moved[j], moved[i]
        return tuple(moved)

    def _initial_temperature(self, start: Permutation, rng: np.random.Generator,
                             cache: Dict[Permutation, float]) -> float:
        energies = [self._energy(start, cache)]
        for _ in range(min(16, self.size * (self.size - 1) // 2)):
            i, j = rng.choice(self.size, size=2, replace=False)
            energies.append(self._energy(self._swapped(start, int(i), int(j)), cache))
        spread = max(energies) - min(energies)
        return spread if spread > 0 else 1e-3

    def anneal(self, start: Sequence[int], seed: int) -> Tuple[float, Permutation]:
        """Single annealing run.

        Args:
            start: Initial permutation
            seed: Seed of this run's random stream

        Returns:
            (best objective value, best permutation); ties go to the smaller permutation
        """
        rng = generator(seed)
        cache: Dict[Permutation, float] = {}
        current = tuple(int(v) for v in start)
        current_energy = self._energy(current, cache)
        best, best_energy = current, current_energy
        if self.size < 2:
            return self.sign * best_energy, best

        temperature = self._initial_temperature(current, rng, cache)
        for epoch in range(self.config.anneal_iterations_per_block):
            for _ in range(self.size):
                i, j = rng.choice(self.size, size=2, replace=False)
                candidate = self._swapped(current, int(i), int(j))
                energy = self._energy(candidate, cache)
                delta = energy - current_energy
                if delta <= 0 or rng.random() < math.exp(-delta / temperature):
                    current, current_energy = candidate, energy
                    if energy < best_energy or (energy == best_energy and candidate < best):
                        best, best_energy = candidate, energy
            temperature *= self.config.anneal_ratio
        log.debug("anneal seed=%d best=%.6g after %d epochs", seed, self.sign * best_energy,
                  self.config.anneal_iterations_per_block)
        return self.sign * best_energy, best

    def search(self, start: Sequence[int], seed: int) -> Tuple[float, Permutation]:
        """Best result over ``anneal_restarts`` runs, each with its own derived seed."""
        seeds = [derive_seed(seed, restart) for restart in range(self.config.anneal_restarts)]
        runs = ordered_map(lambda s: self.anneal(start, s), seeds, self.config.threads)
        return min(runs, key=lambda run: (self.sign * run[0], run[1]))
