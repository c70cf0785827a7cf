"""Tests for graphon relative entropy and its dual representation."""

import math

import numpy as np
import pytest

from core.cut_metric import d_cut
from core.entropy_rate import graphon_entropy, optimal_kernel, per_cell_entropy, random_kernel, variational_value
from core.graphon_core import approximant, constant_graphon, relabel, step
from core.measure_core import bernoulli, kl_divergence
from core.utils.errors import MismatchedSpaceError, SupportError, ValidationFailure
from core.utils.models import DualKernel, StepGraphon


class TestGraphonEntropy:
    """Test cases for graphon_entropy."""

    def test_constant_graphon_matches_kl(self, rng, make_measure):
        mu, nu = make_measure(rng, 3), make_measure(rng, 3)
        assert graphon_entropy(constant_graphon(mu, 3), nu) == pytest.approx(kl_divergence(mu, nu), abs=1e-12)

    def test_zero_at_reference(self, bern03):
        assert graphon_entropy(constant_graphon(bern03, 2), bern03) == 0.0

    def test_bernoulli_half(self, bern03):
        expected = 0.5 * math.log(0.5 / 0.3) + 0.5 * math.log(0.5 / 0.7)
        assert graphon_entropy(constant_graphon(bernoulli(0.5)), bern03) == pytest.approx(expected, abs=1e-14)

    def test_average_of_cells(self, rng, make_graphon, make_measure):
        W = make_graphon(rng, 3, 2)
        nu = make_measure(rng, 2)
        cells = per_cell_entropy(W, nu)
        assert cells.shape == (3, 3)
        assert graphon_entropy(W, nu) == pytest.approx(cells.mean(), abs=1e-14)

    def test_missing_support_is_infinite(self, bern03):
        W = constant_graphon(bernoulli(0.5))
        nu = bernoulli(1.0)
        assert graphon_entropy(W, nu) == float("inf")

    def test_relabel_invariant(self, rng, make_graphon, make_measure):
        W = make_graphon(rng, 4, 3)
        nu = make_measure(rng, 3)
        assert graphon_entropy(relabel(W, [1, 3, 0, 2]), nu) == pytest.approx(graphon_entropy(W, nu), abs=1e-14)

    def test_stepping_never_increases(self, rng, make_graphon, make_measure):
        for _ in range(20):
            W = make_graphon(rng, 4, 3)
            nu = make_measure(rng, 3)
            assert graphon_entropy(approximant(W, 2), nu) <= graphon_entropy(W, nu) + 1e-12
            assert graphon_entropy(step(W, [[0, 2], [1, 3]]), nu) <= graphon_entropy(W, nu) + 1e-12

    def test_lower_semicontinuous_along_diagonal_sequence(self, bern03):
        """Diagonal spikes vanish in the cut distance but keep the entropy above the limit's."""
        for k in range(2, 9):
            cells = np.zeros((k, k, 2))
            cells[..., 0] = 1.0
            cells[np.arange(k), np.arange(k)] = [0.0, 1.0]
            W_k = StepGraphon(n=k, space=bern03.space, cells=cells)
            limit = StepGraphon(n=k, space=bern03.space, cells=np.tile([1.0, 0.0], (k, k, 1)))
            assert d_cut(W_k, limit).value == pytest.approx(1.0 / k, abs=1e-12)
            assert graphon_entropy(W_k, bern03) >= graphon_entropy(limit, bern03) - 1e-8
            assert graphon_entropy(limit, bern03) == pytest.approx(-math.log(0.7), abs=1e-14)

    def test_continuous_along_vanishing_mixture(self, rng, make_graphon, make_measure):
        W, V = make_graphon(rng, 3, 3), make_graphon(rng, 3, 3)
        nu = make_measure(rng, 3)
        t = 2.0 ** -30
        mixed = StepGraphon(n=3, space=W.space, cells=(1.0 - t) * W.cells + t * V.cells)
        assert abs(graphon_entropy(mixed, nu) - graphon_entropy(W, nu)) <= 1e-6

    def test_space_mismatch(self, rng, make_graphon, make_measure):
        with pytest.raises(MismatchedSpaceError):
            graphon_entropy(make_graphon(rng, 2, 2), make_measure(rng, 3))


class TestVariationalValue:
    """Test cases for the dual representation."""

    def test_never_exceeds_entropy(self, rng, make_graphon, make_measure):
        for _ in range(10):
            W = make_graphon(rng, 3, 3)
            nu = make_measure(rng, 3)
            entropy = graphon_entropy(W, nu)
            for _ in range(20):
                A = random_kernel(3, 3, scale=3.0, rng=rng)
                assert variational_value(W, nu, A) <= entropy + 1e-12

    def test_optimal_kernel_attains_entropy(self, rng, make_graphon, make_measure):
        for _ in range(10):
            W = make_graphon(rng, 3, 3)
            nu = make_measure(rng, 3)
            A = optimal_kernel(W, nu)
            assert variational_value(W, nu, A) == pytest.approx(graphon_entropy(W, nu), abs=1e-12)

    def test_optimal_kernel_vanishes_at_zero(self, rng, make_graphon, make_measure):
        W = make_graphon(rng, 2, 3)
        A = optimal_kernel(W, make_measure(rng, 3))
        assert np.all(A.values[:, :, W.space.zero_index] == 0.0)

    def test_zero_kernel_gives_zero(self, rng, make_graphon, make_measure):
        W = make_graphon(rng, 2, 2)
        assert variational_value(W, make_measure(rng, 2), DualKernel(n=2, values=np.zeros((2, 2, 2)))) == pytest.approx(0.0, abs=1e-14)

    def test_kernel_shape_checked(self, rng, make_graphon, make_measure):
        with pytest.raises(ValidationFailure):
            variational_value(make_graphon(rng, 2, 2), make_measure(rng, 2), random_kernel(3, 2, rng=rng))

    def test_optimal_kernel_reports_hole(self, bern03):
        cells = np.array([[[0.5, 0.5], [1.0, 0.0]], [[1.0, 0.0], [0.5, 0.5]]])
        W = StepGraphon(n=2, space=bern03.space, cells=cells)
        with pytest.raises(SupportError) as excinfo:
            optimal_kernel(W, bern03)
        assert excinfo.value.cell == (0, 1)
        assert excinfo.value.point == 1

    def test_kernel_bound(self, rng):
        A = random_kernel(2, 2, scale=0.5, rng=rng)
        assert 0.0 < A.bound <= 0.5
