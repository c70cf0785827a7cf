"""Bundled invariant suite run by the `selftest` subcommand."""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.cut_metric import CutDistanceCalculator
from core.discretization import DyadicProjector
from core.entropy_rate import graphon_entropy, optimal_kernel, random_kernel, variational_value
from core.graphon_core import approximant, relabel, step, total_measure
from core.measure_core import (
    bernoulli,
    discrete_space,
    kl_divergence,
    log_mgf,
    lp_distance,
    lp_distance_bruteforce,
)
from core.rate_minimizer import RateMinimizer, legendre_value
from core.sampling_ldp import (
    LdpVerifier,
    event_constraints,
    event_log_prob_exact,
    kl_product,
    kl_product_bruteforce,
)
from core.utils.models import (
    DensityMeasure,
    Direction,
    EventKind,
    EventSpec,
    FiniteMeasure,
    GraphonConfig,
    NestedPartitionScheme,
    SelfTestCheck,
    SelfTestReport,
    StepGraphon,
)
from core.utils.seeding import generator

log = logging.getLogger(__name__)

Check = Callable[[np.random.Generator], Tuple[bool, str]]

# H(Bern(0.5) | Bern(0.3))
EDGE_DENSITY_RATE = 0.5 * math.log(0.5 / 0.3) + 0.5 * math.log(0.5 / 0.7)


def _measure(rng: np.random.Generator, k: int) -> FiniteMeasure:
    return FiniteMeasure(space=discrete_space(range(k)), weights=rng.dirichlet(np.ones(k)))


def _graphon(rng: np.random.Generator, n: int, k: int) -> StepGraphon:
    cells = rng.dirichlet(np.ones(k), size=(n, n))
    cells = np.where(np.triu(np.ones((n, n), dtype=bool))[:, :, None], cells, cells.transpose(1, 0, 2))
    return StepGraphon(n=n, space=discrete_space(range(k)), cells=cells)


class SelfTestRunner:
    """Runs one quick check per invariant family of every engine."""

    def __init__(self, config: Optional[GraphonConfig] = None, seed: int = 0):
        """
        Initialize runner.

        Args:
            config: Engine constants shared by every check
            seed: Seed of the random instances
        """
        self.config = config or GraphonConfig()
        self.seed = seed
        self.calculator = CutDistanceCalculator(self.config)
        self.minimizer = RateMinimizer(self.config)

    def checks(self) -> List[Tuple[str, str, Check]]:
        return [
            ("measure_core", "lp metric axioms", self.lp_metric_axioms),
            ("measure_core", "lp transport matches subset oracle", self.lp_oracle_equivalence),
            ("measure_core", "kl nonnegative and convex", self.kl_convexity),
            ("measure_core", "log-mgf is 1-Lipschitz in sup norm", self.log_mgf_lipschitz),
            ("graphon_core", "stepping is a projection with the tower property", self.stepping_projection),
            ("graphon_core", "relabeling keeps the total measure", self.relabel_invariance),
            ("cut_metric", "d_cut is a symmetric semi-distance", self.d_cut_axioms),
            ("cut_metric", "relabeled graphons are at delta distance 0", self.delta_cut_relabel),
            ("entropy_rate", "optimal kernel attains the entropy", self.variational_equality),
            ("entropy_rate", "stepping never raises the entropy", self.entropy_monotone),
            ("discretization", "projections compose exactly", self.projection_composition),
            ("discretization", "projected rate of density 2x converges", self.projected_rate),
            ("sampling_ldp", "graph law divergence factorizes over edges", self.kl_product_identity),
            ("sampling_ldp", "exact tail matches enumeration", self.exact_oracle),
            ("sampling_ldp", "edge density gap shrinks", self.edge_density_gap),
            ("rate_minimizer", "single constraint matches the Legendre value", self.minimizer_duality),
        ]

    def run(self) -> SelfTestReport:
        """Run every check; a raised exception counts as a failure."""
        report = SelfTestReport()
        for index, (module, name, check) in enumerate(self.checks()):
            rng = generator(self.seed + index)
            try:
                passed, detail = check(rng)
            except Exception as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            report.checks.append(SelfTestCheck(module=module, name=name, passed=bool(passed), detail=detail))
            log.info("%s %s / %s %s", "ok" if passed else "FAIL", module, name, detail)
        return report

    # measure_core

    def lp_metric_axioms(self, rng: np.random.Generator) -> Tuple[bool, str]:
        worst = 0.0
        for _ in range(20):
            a, b, c = (_measure(rng, 4) for _ in range(3))
            ab, bc, ac = lp_distance(a, b), lp_distance(b, c), lp_distance(a, c)
            worst = max(worst, abs(ab - lp_distance(b, a)), ac - ab - bc, lp_distance(a, a))
        return worst <= 1e-9, f"worst violation {worst:.3g}"

    def lp_oracle_equivalence(self, rng: np.random.Generator) -> Tuple[bool, str]:
        worst = 0.0
        for k in range(2, 6):
            for _ in range(10):
                a, b = _measure(rng, k), _measure(rng, k)
                worst = max(worst, abs(lp_distance(a, b) - lp_distance_bruteforce(a, b)))
        return worst <= 1e-9, f"max difference {worst:.3g}"

    def kl_convexity(self, rng: np.random.Generator) -> Tuple[bool, str]:
        worst = 0.0
        for _ in range(20):
            first, second, nu = (_measure(rng, 3) for _ in range(3))
            worst = max(worst, -kl_divergence(first, nu))
            for lam in (0.25, 0.5, 0.75):
                mix = FiniteMeasure(space=nu.space, weights=lam * first.weights + (1 - lam) * second.weights)
                bound = lam * kl_divergence(first, nu) + (1 - lam) * kl_divergence(second, nu)
                worst = max(worst, kl_divergence(mix, nu) - bound)
        return worst <= 1e-10, f"worst violation {worst:.3g}"

    def log_mgf_lipschitz(self, rng: np.random.Generator) -> Tuple[bool, str]:
        worst = 0.0
        for _ in range(20):
            nu = _measure(rng, 4)
            f, g = rng.normal(size=4) * 3, rng.normal(size=4) * 3
            worst = max(worst, abs(log_mgf(f, nu) - log_mgf(g, nu)) - np.max(np.abs(f - g)))
        return worst <= 1e-12, f"worst excess {worst:.3g}"

    # graphon_core

    def stepping_projection(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W = _graphon(rng, 4, 3)
        groups = [[0, 2], [1, 3]]
        once = step(W, groups, keep_grid=True)
        twice = step(once, groups, keep_grid=True)
        idempotent = np.max(np.abs(once.cells - twice.cells))
        tower = np.max(np.abs(approximant(approximant(W, 2), 1).cells - approximant(W, 1).cells))
        worst = float(max(idempotent, tower))
        return worst <= 1e-12, f"max difference {worst:.3g}"

    def relabel_invariance(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W = _graphon(rng, 5, 3)
        moved = relabel(W, rng.permutation(5))
        worst = float(np.max(np.abs(total_measure(W).weights - total_measure(moved).weights)))
        return worst <= 1e-12, f"max difference {worst:.3g}"

    # cut_metric

    def d_cut_axioms(self, rng: np.random.Generator) -> Tuple[bool, str]:
        U, W = _graphon(rng, 3, 2), _graphon(rng, 3, 2)
        forward = self.calculator.d_cut(U, W).value
        backward = self.calculator.d_cut(W, U).value
        itself = self.calculator.d_cut(U, U).value
        worst = max(abs(forward - backward), itself)
        return worst <= 1e-9, f"d(U,W)={forward:.6g}, asymmetry and self-distance {worst:.3g}"

    def delta_cut_relabel(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W = _graphon(rng, 4, 2)
        value = self.calculator.delta_cut(W, relabel(W, rng.permutation(4))).value
        return value <= 1e-12, f"delta distance {value:.3g}"

    # entropy_rate

    def variational_equality(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W, nu = _graphon(rng, 3, 3), _measure(rng, 3)
        entropy = graphon_entropy(W, nu)
        gap = abs(variational_value(W, nu, optimal_kernel(W, nu)) - entropy)
        excess = max(variational_value(W, nu, random_kernel(3, 3, 2.0, rng)) - entropy for _ in range(50))
        return gap <= 1e-10 and excess <= 1e-10, f"gap {gap:.3g}, random kernel excess {excess:.3g}"

    def entropy_monotone(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W, nu = _graphon(rng, 4, 3), _measure(rng, 3)
        excess = graphon_entropy(step(W, [[0, 3], [1, 2]]), nu) - graphon_entropy(W, nu)
        return excess <= 1e-12, f"excess {excess:.3g}"

    # discretization

    def projection_composition(self, rng: np.random.Generator) -> Tuple[bool, str]:
        projector = DyadicProjector(NestedPartitionScheme(interval=(0.0, 1.0), depth_max=8))
        density = DensityMeasure(breakpoints=[0.0, 0.3, 1.0], values=[0.5, 0.85 / 0.7])
        fine = projector.project_measure(density, 7)
        exact = all(
            np.array_equal(projector.project_between(fine, m).weights, projector.project_measure(density, m).weights)
            for m in range(0, 8)
        )
        return exact, "bit-exact" if exact else "composition differs"

    def projected_rate(self, rng: np.random.Generator) -> Tuple[bool, str]:
        projector = DyadicProjector(NestedPartitionScheme(interval=(0.0, 1.0), depth_max=12))
        omega = DensityMeasure(breakpoints=[0.0, 1.0], values=[0.0], slopes=[2.0])
        uniform = DensityMeasure(breakpoints=[0.0, 1.0], values=[1.0])
        rates = projector.rate_by_projections(omega, uniform)
        monotone = all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
        error = abs(rates[-1] - (math.log(2.0) - 0.5))
        return monotone and error <= 1e-4, f"level-12 error {error:.3g}"

    # sampling_ldp

    def kl_product_identity(self, rng: np.random.Generator) -> Tuple[bool, str]:
        W, nu = _graphon(rng, 4, 2), _measure(rng, 2)
        gap = abs(kl_product(W, nu).total - kl_product_bruteforce(W, nu, self.config))
        return gap <= 1e-10, f"difference {gap:.3g}"

    def exact_oracle(self, rng: np.random.Generator) -> Tuple[bool, str]:
        nu = FiniteMeasure(space=discrete_space(range(3)), weights=[0.5, 0.3, 0.2])
        f = np.array([0.0, 1.0, 2.0])
        event = EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=f, direction=Direction.GE, threshold=1.0)
        # four vertices, six edges, 3^6 labelings
        grid = np.array(np.meshgrid(*[np.arange(3)] * 6, indexing="ij")).reshape(6, -1).T
        probs = nu.weights[grid].prod(axis=1)
        enumerated = math.log(probs[f[grid].sum(axis=1) >= 6.0 - 1e-9].sum())
        gap = abs(event_log_prob_exact(4, nu, event, self.config) - enumerated)
        return gap <= 1e-10, f"difference {gap:.3g}"

    def edge_density_gap(self, rng: np.random.Generator) -> Tuple[bool, str]:
        event = EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=[0.0, 1.0], direction=Direction.GE, threshold=0.5)
        report = LdpVerifier(self.config).verify_ldp(bernoulli(0.3), event, [10, 20, 40, 80])
        first, last = abs(report.rows[0].gap), abs(report.rows[-1].gap)
        rate = abs(report.rows[0].rate_target - EDGE_DENSITY_RATE)
        return last < first and last <= 0.015 and rate <= 1e-8, f"|gap| {first:.4g} -> {last:.4g}"

    # rate_minimizer

    def minimizer_duality(self, rng: np.random.Generator) -> Tuple[bool, str]:
        worst = 0.0
        for _ in range(5):
            nu = _measure(rng, 3)
            f = rng.normal(size=3)
            mean = float(nu.weights @ f)
            t = mean + 0.5 * (f.max() - mean)
            event = EventSpec(kind=EventKind.MEAN_FUNCTIONAL, f=f, direction=Direction.GE, threshold=t)
            value = self.minimizer.minimize_rate(nu, event_constraints(event)).value
            worst = max(worst, abs(value - legendre_value(nu, f, t)))
        return worst <= 1e-8, f"max difference {worst:.3g}"


def run_selftest(config: Optional[GraphonConfig] = None, seed: int = 0) -> SelfTestReport:
    return SelfTestRunner(config, seed).run()
