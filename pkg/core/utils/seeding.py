"""Deterministic random streams keyed by an integer seed."""

from typing import Iterable

import numpy as np


def generator(seed: int) -> np.random.Generator:
    """Counter-based generator; the same seed yields the same stream on every platform."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def derive_seed(seed: int, *indices: int) -> int:
    """Independent child seed for a repetition, restart or sample index."""
    sequence = np.random.SeedSequence([int(seed), *(int(i) for i in indices)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def edge_uniforms(seed: int, n: int) -> np.ndarray:
    """One uniform per edge i<j, in np.triu_indices(n, 1) order."""
    count = n * (n - 1) // 2
    return generator(seed).random(count)


def spawn_seeds(seed: int, count: int, offset: Iterable[int] = ()) -> list:
    prefix = tuple(offset)
    return [derive_seed(seed, *prefix, k) for k in range(count)]
