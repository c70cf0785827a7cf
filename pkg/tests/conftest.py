"""Shared fixtures: seeded generators and random measure/graphon factories."""

import numpy as np
import pytest

from core.measure_core import bernoulli, discrete_space
from core.utils.models import FiniteMeasure, GraphonConfig, StepGraphon


def symmetrize(cells: np.ndarray) -> np.ndarray:
    n = cells.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool))[:, :, None]
    return np.where(upper, cells, cells.transpose(1, 0, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config():
    return GraphonConfig()


@pytest.fixture
def bern03():
    return bernoulli(0.3)


@pytest.fixture
def make_measure():
    """Factory: random full-support probability measure on k discrete points."""

    def factory(rng: np.random.Generator, k: int, space=None) -> FiniteMeasure:
        space = space or discrete_space(range(k))
        return FiniteMeasure(space=space, weights=rng.dirichlet(np.ones(k)))

    return factory


@pytest.fixture
def make_graphon():
    """Factory: random symmetric step graphon with full-support cells."""

    def factory(rng: np.random.Generator, n: int, k: int, space=None) -> StepGraphon:
        space = space or discrete_space(range(k))
        cells = symmetrize(rng.dirichlet(np.ones(k), size=(n, n)))
        return StepGraphon(n=n, space=space, cells=cells)

    return factory
