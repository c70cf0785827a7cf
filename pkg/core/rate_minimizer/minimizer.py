"""Minimization of the graphon rate function over linear constraint sets."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from core.entropy_rate import graphon_entropy
from core.graphon_core import constant_graphon
from core.measure_core import as_function, log_mgf, tilt, tilted_mean
from core.utils.errors import InfeasibleConstraintError, NumericalFailure, SupportError, ValidationFailure
from core.utils.models import (
    ConstraintSet,
    Direction,
    FiniteMeasure,
    GraphonConfig,
    MinimizerResult,
    StepGraphon,
)

log = logging.getLogger(__name__)

BRACKET_LIMIT = 2.0 ** 60
TINY = np.finfo(float).tiny


class ConstraintArrays:
    """Dense form of a ConstraintSet.

    Constraint c reads s_c * (sum_ij a_c[i, j] <f_c, W_ij> - t_c) >= 0, where s_c is
    +1 for >= and -1 for <=, and a_c averages over the (symmetrized) scope.
    """

    def __init__(self, constraints: ConstraintSet, size: int):
        n = constraints.n_blocks
        self.n = n
        count = len(constraints.constraints)
        self.signs = np.array([c.direction.sign for c in constraints.constraints])
        self.thresholds = np.array([c.threshold for c in constraints.constraints])
        self.functions = np.zeros((count, size))
        self.scopes = np.zeros((count, n, n))
        for index, constraint in enumerate(constraints.constraints):
            if constraint.f.shape != (size,):
                raise ValidationFailure(f"constraint {index} functional needs {size} values, got {constraint.f.shape}")
            self.functions[index] = constraint.f
            if constraint.scope == "global":
                self.scopes[index] = 1.0 / n ** 2
            else:
                weights = np.zeros((n, n))
                for i, j in constraint.scope:
                    weights[i, j] += 1.0
                weights /= weights.sum()
                self.scopes[index] = 0.5 * (weights + weights.T)

    def slacks(self, cells: np.ndarray) -> np.ndarray:
        """Signed slack of every constraint; negative means violated."""
        means = np.einsum("cij,ijz,cz->c", self.scopes, cells, self.functions)
        return self.signs * (means - self.thresholds)

    def potentials(self, theta: np.ndarray) -> np.ndarray:
        """(n, n, |Z|) per-cell tilt exponents n^2 sum_c theta_c s_c a_c[i, j] f_c."""
        return self.n ** 2 * np.einsum("c,cij,cz->ijz", theta * self.signs, self.scopes, self.functions)

    def gradient(self, cells: np.ndarray, log_nu: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Gradient of the Lagrangian in the cell weights, cells treated as free variables."""
        return (np.log(cells) - log_nu + 1.0 - self.potentials(theta)) / self.n ** 2


class RateMinimizer:
    """Minimizes I_nu over a ConstraintSet.

    A single global constraint is solved in closed form by an exponential tilt
    whose parameter is found by bisection. Everything else runs entropic mirror
    descent with dual ascent on the multipliers, polished by L-BFGS-B on the
    concave dual.
    """

    def __init__(self, config: Optional[GraphonConfig] = None):
        """
        Initialize minimizer.

        Args:
            config: Iteration counts and tolerances
        """
        self.config = config or GraphonConfig()

    # ------------------------------------------------------------------
    # checks
    # ------------------------------------------------------------------

    @staticmethod
    def _check_reference(nu: FiniteMeasure) -> None:
        if not nu.is_probability:
            raise ValidationFailure("reference measure must be a probability measure")
        missing = np.flatnonzero(nu.weights <= 0)
        if missing.size:
            raise SupportError(f"reference measure must charge every point; point {int(missing[0])} is empty",
                               point=int(missing[0]))

    def _check_each_feasible(self, constraints: ConstraintSet) -> None:
        tol = constraints.tolerance
        for index, constraint in enumerate(constraints.constraints):
            reachable = constraint.f.max() if constraint.direction is Direction.GE else constraint.f.min()
            if constraint.direction.sign * (reachable - constraint.threshold) < -tol:
                raise InfeasibleConstraintError(
                    f"constraint {index} asks mean {constraint.direction.value} {constraint.threshold} "
                    f"but f only reaches {reachable}"
                )

    # ------------------------------------------------------------------
    # dual pieces
    # ------------------------------------------------------------------

    def lagrangian_minimizer(self, theta: np.ndarray, nu: FiniteMeasure, constraints: ConstraintSet) -> np.ndarray:
        """Cells of argmin_W L(W, theta): each cell is nu tilted by its potential."""
        arrays = ConstraintArrays(constraints, nu.space.size)
        logits = np.log(nu.weights) + arrays.potentials(np.asarray(theta, dtype=float))
        return np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))

    def dual_value(self, theta: np.ndarray, nu: FiniteMeasure, constraints: ConstraintSet) -> float:
        """D(theta) = sum_c theta_c s_c t_c - (1/n^2) sum_ij log <nu, exp(potential_ij)>."""
        arrays = ConstraintArrays(constraints, nu.space.size)
        theta = np.asarray(theta, dtype=float)
        potentials = arrays.potentials(theta)
        normalizers = logsumexp(potentials, b=np.broadcast_to(nu.weights, potentials.shape), axis=-1)
        return float(np.dot(theta * arrays.signs, arrays.thresholds) - normalizers.sum() / arrays.n ** 2)

    def lagrangian_value(self, cells: np.ndarray, theta: np.ndarray, nu: FiniteMeasure,
                         constraints: ConstraintSet) -> float:
        """L(W, theta) with cells treated as free nonnegative variables."""
        arrays = ConstraintArrays(constraints, nu.space.size)
        cells = np.asarray(cells, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            entropy = np.where(cells > 0, cells * np.log(cells / nu.weights), 0.0).sum()
        return float(entropy / arrays.n ** 2 - np.dot(np.asarray(theta, dtype=float), arrays.slacks(cells)))

    def objective_gradient(self, cells: np.ndarray, theta: np.ndarray, nu: FiniteMeasure,
                           constraints: ConstraintSet) -> np.ndarray:
        """Gradient of lagrangian_value with respect to the cell weights."""
        arrays = ConstraintArrays(constraints, nu.space.size)
        cells = np.asarray(cells, dtype=float)
        return arrays.gradient(cells, np.log(nu.weights), np.asarray(theta, dtype=float))

    # ------------------------------------------------------------------
    # solvers
    # ------------------------------------------------------------------

    def _result(self, cells: np.ndarray, nu: FiniteMeasure, constraints: ConstraintSet, theta: np.ndarray,
                method: str, iterations: int = 0, degenerate: bool = False) -> MinimizerResult:
        n = constraints.n_blocks
        upper = np.triu(np.ones((n, n), dtype=bool))
        cells = np.where(upper[:, :, None], cells, cells.transpose(1, 0, 2))
        sums = cells.sum(axis=-1, keepdims=True)
        cells = np.where(np.abs(sums - 1.0) > 1e-14, cells / sums, cells)
        graphon = StepGraphon(n=n, space=nu.space, cells=cells)
        arrays = ConstraintArrays(constraints, nu.space.size)
        slacks = arrays.slacks(graphon.cells) if len(constraints.constraints) else np.zeros(0)
        violation = float(max(0.0, -slacks.min())) if slacks.size else 0.0
        value = graphon_entropy(graphon, nu)
        if not np.isfinite(value):
            raise NumericalFailure("minimizer has infinite rate")
        provisional = MinimizerResult(
            graphon=graphon,
            value=value,
            dual=theta,
            kkt_residual=0.0,
            feasible=violation <= constraints.tolerance,
            max_violation=violation,
            method=method,
            iterations=iterations,
            degenerate=degenerate,
        )
        residual = self.kkt_check(provisional, nu, constraints)
        return provisional.model_copy(update={"kkt_residual": residual})

    def _solve_single(self, nu: FiniteMeasure, constraints: ConstraintSet) -> MinimizerResult:
        constraint = constraints.constraints[0]
        f = as_function(constraint.f, nu.space)
        sign = constraint.direction.sign
        target = constraint.threshold
        reachable = f.max() if sign > 0 else f.min()
        n = constraints.n_blocks

        if sign * (target - reachable) >= 0:
            # boundary threshold: the limit tilt onto the extreme points of f
            limit = tilt(nu, f, sign * np.inf)
            log.debug("boundary threshold %.12g: limit tilt", target)
            return self._result(constant_graphon(limit, n).cells, nu, constraints, np.array([np.inf]),
                                "limit-tilt", degenerate=True)

        def excess(theta: float) -> float:
            return sign * (tilted_mean(nu, f, sign * theta) - target)

        upper = 1.0
        while excess(upper) < 0:
            upper *= 2.0
            if upper > BRACKET_LIMIT:
                raise NumericalFailure("tilt bracket expansion did not reach the threshold")
        theta, info = optimize.bisect(excess, 0.0, upper, xtol=1e-15, maxiter=self.config.bisection_iterations,
                                      full_output=True, disp=False)
        omega = tilt(nu, f, sign * theta)
        gap = abs(tilted_mean(nu, f, sign * theta) - target)
        if gap > max(self.config.bisection_tol, 1e-12):
            log.warning("tilt bisection stopped %.3e away from the threshold", gap)
        log.debug("tilt parameter %.15g after %d bisection steps", theta, info.iterations)
        return self._result(constant_graphon(omega, n).cells, nu, constraints, np.array([theta]),
                            "closed-form-tilt", iterations=info.iterations)

    def _solve_general(self, nu: FiniteMeasure, constraints: ConstraintSet) -> MinimizerResult:
        arrays = ConstraintArrays(constraints, nu.space.size)
        n, tol = constraints.n_blocks, constraints.tolerance
        log_nu = np.log(nu.weights)
        cells = np.broadcast_to(nu.weights, (n, n, nu.space.size)).copy()
        theta = np.zeros(len(constraints.constraints))
        best: Optional[Tuple[float, np.ndarray, np.ndarray, int]] = None

        for k in range(1, self.config.mirror_iterations + 1):
            step = 1.0 / np.sqrt(k)
            # per-cell scale; the +1 cancels in the normalization
            gradient = n ** 2 * arrays.gradient(cells, log_nu, theta)
            logits = np.log(cells) - step * gradient
            cells = np.maximum(np.exp(logits - logsumexp(logits, axis=-1, keepdims=True)), TINY)
            slacks = arrays.slacks(cells)
            theta = np.maximum(0.0, theta - step * slacks)
            if slacks.min() >= -tol:
                value = float(np.sum(cells * (np.log(cells) - log_nu)) / n ** 2)
                if best is None or value < best[0]:
                    best = (value, cells.copy(), theta.copy(), k)

        method, iterations = "mirror-descent", self.config.mirror_iterations
        if self.config.mirror_polish:
            polished = optimize.minimize(
                lambda th: -self.dual_value(th, nu, constraints),
                theta,
                jac=lambda th: arrays.slacks(self.lagrangian_minimizer(th, nu, constraints)),
                method="L-BFGS-B",
                bounds=[(0.0, None)] * theta.size,
                options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 1000},
            )
            candidate = self.lagrangian_minimizer(polished.x, nu, constraints)
            slacks = arrays.slacks(candidate)
            if np.all(np.isfinite(candidate)) and slacks.min() >= -tol:
                value = float(np.sum(candidate * (np.log(candidate) - log_nu)) / n ** 2)
                if best is None or value <= best[0] + tol:
                    best = (value, candidate, polished.x, iterations)
                    method = "mirror-descent+dual-polish"

        if best is None:
            raise InfeasibleConstraintError("no feasible graphon found for the constraint set")
        _, cells, theta, iterations = best
        log.debug("general solver (%s) value %.12g", method, best[0])
        return self._result(cells, nu, constraints, theta, method, iterations=iterations)

    def minimize_rate(self, nu: FiniteMeasure, constraints: ConstraintSet) -> MinimizerResult:
        """
        Minimize the rate function over the constraint set.

        Args:
            nu: Reference edge law with full support
            constraints: Linear constraints

        Returns:
            MinimizerResult with multipliers and KKT residual

        Raises:
            SupportError: nu misses a point
            InfeasibleConstraintError: no probability graphon meets the constraints
        """
        self._check_reference(nu)
        self._check_each_feasible(constraints)
        n = constraints.n_blocks
        count = len(constraints.constraints)
        reference = constant_graphon(nu, n)
        arrays = ConstraintArrays(constraints, nu.space.size)
        if count == 0 or arrays.slacks(reference.cells).min() >= -self.config.mass_tol:
            return self._result(reference.cells, nu, constraints, np.zeros(count), "reference")
        if count == 1 and constraints.constraints[0].scope == "global":
            return self._solve_single(nu, constraints)
        return self._solve_general(nu, constraints)

    def kkt_check(self, result: MinimizerResult, nu: FiniteMeasure, constraints: ConstraintSet) -> float:
        """
        Largest KKT violation of a minimizer.

        Stationarity is measured per cell as half the spread of
        log(W_ij / nu) - potential_ij over the points, i.e. after the best
        per-cell normalizer; complementarity as |theta_c * slack_c|, together with
        primal and dual feasibility.
        """
        arrays = ConstraintArrays(constraints, nu.space.size)
        cells = result.graphon.cells
        theta = np.asarray(result.dual, dtype=float)
        slacks = arrays.slacks(cells) if theta.size else np.zeros(0)
        primal = float(max(0.0, -slacks.min())) if slacks.size else 0.0
        if result.degenerate:
            return primal
        dual = float(max(0.0, -theta.min())) if theta.size else 0.0
        complementarity = float(np.max(np.abs(theta * slacks))) if theta.size else 0.0
        if np.any(cells <= 0):
            return float("inf")
        residual = np.log(cells) - np.log(nu.weights) - arrays.potentials(theta)
        stationarity = float(np.max(residual.max(axis=-1) - residual.min(axis=-1)) / 2.0)
        return max(stationarity, complementarity, primal, dual)


def legendre_value(nu: FiniteMeasure, f, t: float) -> float:
    """Cramer transform sup_theta [theta t - log <nu, exp(theta f)>]."""
    values = as_function(f, nu.space)
    support = nu.weights > 0
    top, bottom = values[support].max(), values[support].min()
    if t > top or t < bottom:
        return float("inf")
    if t == top or t == bottom:
        return float(-np.log(nu.weights[support & (values == t)].sum()))
    found = optimize.minimize_scalar(lambda theta: log_mgf(theta * values, nu) - theta * t,
                                     method="brent", tol=1e-12)
    return float(-found.fun)


def minimize_rate(nu: FiniteMeasure, constraints: ConstraintSet, config: Optional[GraphonConfig] = None) -> MinimizerResult:
    return RateMinimizer(config).minimize_rate(nu, constraints)


def kkt_check(result: MinimizerResult, nu: FiniteMeasure, constraints: ConstraintSet,
              config: Optional[GraphonConfig] = None) -> float:
    return RateMinimizer(config).kkt_check(result, nu, constraints)

