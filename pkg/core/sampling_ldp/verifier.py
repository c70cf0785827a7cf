"""Large-deviation and conditional-concentration experiments."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from core.cut_metric import CutDistanceCalculator
from core.entropy_rate import graphon_entropy
from core.graphon_core import embed_graph, regrid, with_zero_diagonal
from core.measure_core import as_function
from core.rate_minimizer import RateMinimizer
from core.sampling_ldp.exact import event_log_prob_exact
from core.sampling_ldp.samplers import conditional_sample, sample_from_graphon
from core.utils.errors import ValidationFailure
from core.utils.models import (
    ConcentrationReport,
    ConcentrationRow,
    ConstraintSet,
    CutMode,
    EventKind,
    EventSpec,
    FiniteMeasure,
    GraphonConfig,
    LdpReport,
    LdpRow,
    LinearConstraint,
    MinimizerResult,
    SearchMode,
    VerifyMode,
)
from core.utils.parallel import ordered_map
from core.utils.seeding import derive_seed, generator

log = logging.getLogger(__name__)

Z_95 = 1.959963984540054
HIT_SLACK = 1e-9


def event_constraints(event: EventSpec, n_blocks: int = 1) -> ConstraintSet:
    """The mean-functional event as a single global constraint."""
    constraint = LinearConstraint(f=event.f, direction=event.direction, threshold=event.threshold)
    return ConstraintSet(constraints=(constraint,), n_blocks=n_blocks)


class LdpVerifier:
    """Compares (2/n^2) log P(event) with minus the minimal rate over the event."""

    def __init__(self, config: Optional[GraphonConfig] = None):
        """
        Initialize verifier.

        Args:
            config: Sample counts, thread cap and search settings
        """
        self.config = config or GraphonConfig()
        self.minimizer = RateMinimizer(self.config)
        self.calculator = CutDistanceCalculator(self.config)

    def minimize_event(self, nu: FiniteMeasure, event: EventSpec) -> MinimizerResult:
        if event.kind is not EventKind.MEAN_FUNCTIONAL:
            raise ValidationFailure("only mean-functional events reduce to linear constraints")
        as_function(event.f, nu.space)
        return self.minimizer.minimize_rate(nu, event_constraints(event))

    def _row(self, n: int, method: VerifyMode, log_prob: float, rate: float,
             ess: Optional[float] = None, samples: Optional[int] = None, half_width: float = 0.0) -> LdpRow:
        scaled = 2.0 * log_prob / n ** 2
        return LdpRow(n=n, method=method, log_prob=log_prob, scaled=scaled, rate_target=rate,
                      gap=scaled + rate, ess=ess, samples=samples, half_width=half_width)

    @staticmethod
    def _weighted_estimate(log_weights: np.ndarray, hits: np.ndarray, n: int) -> Tuple[float, float, float]:
        """(log P, effective sample size, 95% half-width on the scaled axis) from importance weights."""
        samples = log_weights.size
        if not np.any(hits):
            return float("-inf"), 0.0, float("inf")
        kept = log_weights[hits]
        log_sum = logsumexp(kept)
        log_prob = float(log_sum - np.log(samples))
        ess = float(np.exp(2.0 * log_sum - logsumexp(2.0 * kept)))
        second_moment = np.exp(logsumexp(2.0 * kept) - np.log(samples) - 2.0 * log_prob)
        relative_sd = np.sqrt(max(second_moment - 1.0, 0.0) / samples)
        return log_prob, ess, float(2.0 / n ** 2 * Z_95 * relative_sd)

    def _mean_functional_mc(self, n: int, nu: FiniteMeasure, event: EventSpec, proposal: np.ndarray,
                            rate: float, seed: int) -> LdpRow:
        edges = n * (n - 1) // 2
        rng = generator(derive_seed(seed, n))
        counts = rng.multinomial(edges, proposal, size=self.config.mc_samples)
        charged = proposal > 0
        ratio = np.zeros(proposal.size)
        ratio[charged] = np.log(nu.weights[charged]) - np.log(proposal[charged])
        f = as_function(event.f, nu.space)
        log_weights = counts @ ratio
        hits = event.direction.sign * (counts @ f - event.threshold * edges) >= -HIT_SLACK
        log_prob, ess, half_width = self._weighted_estimate(log_weights, hits, n)
        return self._row(n, VerifyMode.MONTE_CARLO, log_prob, rate, ess, self.config.mc_samples, half_width)

    def _delta_ball_mc(self, n: int, nu: FiniteMeasure, event: EventSpec, rate: float, seed: int) -> LdpRow:
        proposal = with_zero_diagonal(regrid(event.center, n))
        rows, cols = np.triu_indices(n, 1)
        with np.errstate(divide="ignore"):
            log_ratio = np.log(nu.weights)[None, :] - np.log(proposal.cells[rows, cols])

        def replica(index: int) -> Tuple[float, bool]:
            graph = sample_from_graphon(proposal, derive_seed(seed, n, index))
            values = graph.weights[rows, cols]
            weight = float(log_ratio[np.arange(rows.size), values].sum())
            distance = self.calculator.delta_cut(embed_graph(graph), event.center, SearchMode.ANNEAL).value
            return weight, distance <= event.radius

        draws = ordered_map(replica, list(range(self.config.mc_samples)), self.config.threads)
        log_weights = np.array([weight for weight, _ in draws])
        hits = np.array([hit for _, hit in draws], dtype=bool)
        log_prob, ess, half_width = self._weighted_estimate(log_weights, hits, n)
        return self._row(n, VerifyMode.MONTE_CARLO, log_prob, rate, ess, self.config.mc_samples, half_width)

    def verify_ldp(
        self,
        nu: FiniteMeasure,
        event: EventSpec,
        n_list: Sequence[int],
        mode: VerifyMode = VerifyMode.EXACT,
        seed: Optional[int] = None,
    ) -> LdpReport:
        """
        Tabulate (2/n^2) log P(event) against minus the rate for each n.

        Args:
            nu: Edge law
            event: Mean-functional event (exact or monte-carlo) or delta-ball (monte-carlo)
            n_list: Graph sizes, each at least 2
            mode: exact lattice oracle or importance sampling
            seed: Required for monte-carlo

        Returns:
            LdpReport with one row per n, in the order given
        """
        sizes = [int(n) for n in n_list]
        if any(n < 2 for n in sizes):
            raise ValidationFailure("every graph size must be at least 2")
        if mode is VerifyMode.MONTE_CARLO and seed is None:
            raise ValidationFailure("monte-carlo verification needs a seed")

        if event.kind is EventKind.DELTA_BALL:
            if mode is VerifyMode.EXACT:
                raise ValidationFailure("delta-ball events are verified by monte-carlo only")
            # upper bound on the infimum of the rate over the ball
            rate = graphon_entropy(event.center, nu)
            rows = [self._delta_ball_mc(n, nu, event, rate, seed) for n in sizes]
        else:
            result = self.minimize_event(nu, event)
            rate = result.value
            if mode is VerifyMode.EXACT:
                rows = ordered_map(
                    lambda n: self._row(n, VerifyMode.EXACT, event_log_prob_exact(n, nu, event, self.config), rate),
                    sizes,
                    self.config.threads,
                )
            else:
                proposal = np.array(result.graphon.cells[0, 0])
                rows = ordered_map(lambda n: self._mean_functional_mc(n, nu, event, proposal, rate, seed),
                                   sizes, self.config.threads)
        for row in rows:
            log.info("n=%d scaled=%.6g rate=%.6g gap=%.3g", row.n, row.scaled, row.rate_target, row.gap)
        return LdpReport(rows=list(rows), method=mode, event_kind=event.kind)

    def concentration_experiment(
        self,
        nu: FiniteMeasure,
        event: EventSpec,
        n_list: Sequence[int],
        reps: int,
        seed: int,
    ) -> ConcentrationReport:
        """
        Unlabeled cut distance between conditioned samples and the rate minimizer.

        Args:
            nu: Edge law
            event: Mean-functional conditioning event
            n_list: Graph sizes
            reps: Conditioned samples per size
            seed: Base seed; sample r at size n uses derive_seed(seed, n, r)

        Returns:
            ConcentrationReport with the median and 0.9-quantile per size
        """
        if reps < 1:
            raise ValidationFailure("reps must be positive")
        target = self.minimize_event(nu, event).graphon
        tasks = [(int(n), r) for n in n_list for r in range(reps)]

        def distance(task: Tuple[int, int]) -> Tuple[float, CutMode]:
            n, r = task
            graph = conditional_sample(n, nu, event, derive_seed(seed, n, r), self.config)
            result = self.calculator.delta_cut(embed_graph(graph), target, SearchMode.ANNEAL)
            return result.value, result.mode

        outcomes = ordered_map(distance, tasks, self.config.threads)
        rows: List[ConcentrationRow] = []
        for position, n in enumerate(int(n) for n in n_list):
            chunk = [value for value, _ in outcomes[position * reps:(position + 1) * reps]]
            rows.append(ConcentrationRow(
                n=n,
                reps=reps,
                median=float(np.median(chunk)),
                q90=float(np.quantile(chunk, 0.9)),
                distances=tuple(chunk),
            ))
            log.info("n=%d median=%.6g q90=%.6g", n, rows[-1].median, rows[-1].q90)
        modes = {mode for _, mode in outcomes}
        mode = modes.pop() if len(modes) == 1 else CutMode.HEURISTIC_UPPER_BOUND
        return ConcentrationReport(rows=rows, mode=mode)


def verify_ldp(nu: FiniteMeasure, event: EventSpec, n_list: Sequence[int], mode: VerifyMode = VerifyMode.EXACT,
               seed: Optional[int] = None, config: Optional[GraphonConfig] = None) -> LdpReport:
    return LdpVerifier(config).verify_ldp(nu, event, n_list, mode, seed)


def concentration_experiment(nu: FiniteMeasure, event: EventSpec, n_list: Sequence[int], reps: int, seed: int,
                             config: Optional[GraphonConfig] = None) -> ConcentrationReport:
    return LdpVerifier(config).concentration_experiment(nu, event, n_list, reps, seed)
