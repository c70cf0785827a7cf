"""Tests for constrained rate minimization."""

import math

import numpy as np
import pytest

from core.entropy_rate import graphon_entropy
from core.measure_core import bernoulli, discrete_space, kl_rows
from core.rate_minimizer import ConstraintArrays, RateMinimizer, kkt_check, legendre_value, minimize_rate
from core.utils.errors import InfeasibleConstraintError, SupportError, ValidationFailure
from core.utils.models import ConstraintSet, Direction, FiniteMeasure, LinearConstraint, StepGraphon


def bernoulli_kl(p: float, q: float) -> float:
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


def single(threshold: float, f=(0.0, 1.0), direction: Direction = Direction.GE, n_blocks: int = 1) -> ConstraintSet:
    constraint = LinearConstraint(f=list(f), direction=direction, threshold=threshold)
    return ConstraintSet(constraints=(constraint,), n_blocks=n_blocks)


def simplex_grid(steps: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    first, second = i[keep] / steps, j[keep] / steps
    return np.stack([first, second, 1.0 - first - second], axis=1)


class TestSingleConstraint:
    """Test cases for the closed-form tilt."""

    def test_bernoulli_mean(self, bern03):
        result = minimize_rate(bern03, single(0.5))
        assert result.value == pytest.approx(bernoulli_kl(0.5, 0.3), abs=1e-12)
        assert result.graphon.cells[0, 0] == pytest.approx([0.5, 0.5], abs=1e-12)
        assert result.method == "closed-form-tilt"
        assert result.dual[0] > 0
        assert result.feasible
        assert result.kkt_residual <= 1e-8

    def test_lower_direction(self, bern03):
        result = minimize_rate(bern03, single(0.1, direction=Direction.LE))
        assert result.value == pytest.approx(bernoulli_kl(0.1, 0.3), abs=1e-12)

    def test_satisfied_by_reference(self, bern03):
        result = minimize_rate(bern03, single(0.2))
        assert result.value == 0.0
        assert result.method == "reference"
        assert result.dual.tolist() == [0.0]

    def test_boundary_threshold(self, bern03):
        result = minimize_rate(bern03, single(1.0))
        assert result.degenerate
        assert result.value == pytest.approx(-math.log(0.3), abs=1e-12)
        assert result.graphon.cells[0, 0].tolist() == [0.0, 1.0]
        assert result.kkt_residual == 0.0

    def test_blocks_are_constant(self, bern03):
        result = minimize_rate(bern03, single(0.6, n_blocks=3))
        assert result.graphon.n == 3
        assert np.all(result.graphon.cells == result.graphon.cells[0, 0])
        assert result.value == pytest.approx(bernoulli_kl(0.6, 0.3), abs=1e-12)

    def test_infeasible(self, bern03):
        with pytest.raises(InfeasibleConstraintError):
            minimize_rate(bern03, single(1.2))

    def test_reference_needs_full_support(self):
        with pytest.raises(SupportError):
            minimize_rate(bernoulli(1.0), single(0.5))

    def test_functional_size_checked(self, bern03):
        with pytest.raises(ValidationFailure):
            minimize_rate(bern03, single(0.5, f=(0.0, 1.0, 2.0)))


class TestDuality:
    """Test cases comparing minimizers with the Legendre transform and a grid search."""

    def test_matches_legendre_transform(self, rng, make_measure):
        for _ in range(20):
            nu = make_measure(rng, 3)
            f = rng.normal(size=3)
            t = float(np.quantile(f, rng.uniform(0.55, 0.9)))
            if t <= float(nu.weights @ f):
                continue
            result = minimize_rate(nu, single(t, f=f))
            assert result.value == pytest.approx(legendre_value(nu, f, t), abs=1e-8)

    def test_matches_grid_search(self, rng, make_measure):
        grid = simplex_grid(1000)
        for _ in range(20):
            nu = make_measure(rng, 3)
            f = rng.normal(size=3)
            t = float(nu.weights @ f + 0.5 * (f.max() - nu.weights @ f))
            feasible = grid[grid @ f >= t]
            brute = float(kl_rows(feasible, nu.weights).min())
            value = minimize_rate(nu, single(t, f=f)).value
            assert value <= brute + 1e-12
            assert brute - value <= 2e-3

    def test_tightening_never_lowers_the_rate(self, bern03):
        values = [minimize_rate(bern03, single(t)).value for t in np.linspace(0.2, 0.95, 16)]
        assert all(later >= earlier for earlier, later in zip(values, values[1:]))

    def test_legendre_boundaries(self, bern03):
        f = np.array([0.0, 1.0])
        assert legendre_value(bern03, f, 1.0) == pytest.approx(-math.log(0.3))
        assert legendre_value(bern03, f, 1.5) == float("inf")
        assert legendre_value(bern03, f, 0.3) == pytest.approx(0.0, abs=1e-12)

    def test_weak_duality(self, bern03):
        minimizer = RateMinimizer()
        constraints = single(0.5)
        value = minimizer.minimize_rate(bern03, constraints).value
        for theta in np.linspace(0.0, 5.0, 11):
            assert minimizer.dual_value(np.array([theta]), bern03, constraints) <= value + 1e-12

    def test_lagrangian_minimizer_is_tilt(self, bern03):
        minimizer = RateMinimizer()
        constraints = single(0.5)
        result = minimizer.minimize_rate(bern03, constraints)
        cells = minimizer.lagrangian_minimizer(result.dual, bern03, constraints)
        assert cells == pytest.approx(result.graphon.cells, abs=1e-10)


class TestGeneralSolver:
    """Test cases for mirror descent with per-block constraints."""

    def test_single_block_constraint(self, bern03):
        constraint = LinearConstraint(f=[0.0, 1.0], threshold=0.6, scope=((0, 0),))
        constraints = ConstraintSet(constraints=(constraint,), n_blocks=2)
        result = minimize_rate(bern03, constraints)
        assert result.method.startswith("mirror-descent")
        assert result.value == pytest.approx(bernoulli_kl(0.6, 0.3) / 4, abs=1e-6)
        assert result.graphon.cells[1, 1] == pytest.approx([0.7, 0.3], abs=1e-4)
        assert result.feasible

    def test_two_constraints(self):
        nu = FiniteMeasure(space=discrete_space(range(3)), weights=[0.5, 0.3, 0.2])
        constraints = ConstraintSet(
            constraints=(
                LinearConstraint(f=[0.0, 1.0, 2.0], threshold=1.0),
                LinearConstraint(f=[0.0, 0.0, 1.0], direction=Direction.LE, threshold=0.25),
            ),
            n_blocks=1,
        )
        result = minimize_rate(nu, constraints)
        slacks = ConstraintArrays(constraints, 3).slacks(result.graphon.cells)
        assert slacks.min() >= -constraints.tolerance
        assert result.value == pytest.approx(graphon_entropy(result.graphon, nu), abs=1e-15)
        # dropping the cap can only lower the rate
        relaxed = minimize_rate(nu, ConstraintSet(constraints=constraints.constraints[:1]))
        assert relaxed.value <= result.value + 1e-9

    def test_kkt_flags_a_bad_point(self, bern03):
        constraints = single(0.5)
        result = minimize_rate(bern03, constraints)
        skewed = result.model_copy(update={"dual": result.dual * 2.0})
        assert kkt_check(skewed, bern03, constraints) > 1e-3
        assert kkt_check(result, bern03, constraints) <= 1e-8

    def test_gradient_matches_finite_differences(self, rng):
        nu = FiniteMeasure(space=discrete_space(range(3)), weights=[0.5, 0.3, 0.2])
        constraints = ConstraintSet(
            constraints=(
                LinearConstraint(f=[0.0, 1.0, 2.0], threshold=1.0),
                LinearConstraint(f=[0.0, 0.0, 1.0], direction=Direction.LE, threshold=0.25, scope=((0, 1),)),
            ),
            n_blocks=2,
        )
        minimizer = RateMinimizer()
        h = 1e-6
        for _ in range(20):
            cells = 0.05 + 0.9 * rng.dirichlet(np.ones(3), size=(2, 2))
            theta = rng.uniform(0.0, 2.0, size=2)
            analytic = minimizer.objective_gradient(cells, theta, nu, constraints)
            numeric = np.zeros_like(cells)
            for index in np.ndindex(*cells.shape):
                shift = np.zeros_like(cells)
                shift[index] = h
                upper = minimizer.lagrangian_value(cells + shift, theta, nu, constraints)
                lower = minimizer.lagrangian_value(cells - shift, theta, nu, constraints)
                numeric[index] = (upper - lower) / (2.0 * h)
            assert np.linalg.norm(numeric - analytic) <= 1e-5 * np.linalg.norm(analytic)

    @pytest.mark.parametrize("delta", [1e-2, 1e-3, 1e-4])
    def test_kkt_residual_tracks_a_moved_minimizer(self, bern03, delta):
        constraints = single(0.5)
        result = minimize_rate(bern03, constraints)
        moved = StepGraphon(n=1, space=bern03.space, cells=[[[0.5 - delta, 0.5 + delta]]])
        residual = kkt_check(result.model_copy(update={"graphon": moved}), bern03, constraints)
        # half the log-ratio spread of the moved cell
        assert residual == pytest.approx(math.atanh(2.0 * delta), rel=1e-6)
        assert residual / delta == pytest.approx(2.0, rel=1e-3)


class TestConstraintArrays:
    """Test cases for the dense constraint form."""

    def test_global_scope_averages(self, rng, make_graphon):
        W = make_graphon(rng, 3, 2)
        arrays = ConstraintArrays(single(0.5, n_blocks=3), 2)
        assert arrays.slacks(W.cells)[0] == pytest.approx(W.cells[:, :, 1].mean() - 0.5)

    def test_block_scope_is_symmetrized(self):
        constraint = LinearConstraint(f=[0.0, 1.0], threshold=0.5, scope=((0, 1),))
        arrays = ConstraintArrays(ConstraintSet(constraints=(constraint,), n_blocks=2), 2)
        assert arrays.scopes[0].tolist() == [[0.0, 0.5], [0.5, 0.0]]

    def test_scope_outside_grid(self):
        constraint = LinearConstraint(f=[0.0, 1.0], threshold=0.5, scope=((0, 3),))
        with pytest.raises(ValueError):
            ConstraintSet(constraints=(constraint,), n_blocks=2)
