"""Labeled and unlabeled cut distances between step graphons.

Block-constant graphons attain the supremum over measurable rectangles at
unions of whole blocks, so every search below runs over block indicator
vectors (bitmasks for the exact path).
"""

import itertools
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from core.cut_metric.annealing import PermutationAnnealer
from core.graphon_core import is_constant, overlap_matrix, regrid
from core.measure_core import check_same_space, lp_distance_batch
from core.measure_core.prokhorov import subset_indicators
from core.utils.errors import ValidationFailure
from core.utils.models import (
    CutMode,
    CutResult,
    CutWitness,
    DualKernel,
    GraphonConfig,
    SearchMode,
    StepGraphon,
)
from core.utils.parallel import ordered_map
from core.utils.seeding import derive_seed, generator

log = logging.getLogger(__name__)

# objective(aggregates of U, aggregates of W) -> one value per row
Objective = Callable[[np.ndarray, np.ndarray], np.ndarray]

IMPROVEMENT_TOL = 1e-15
FRACTIONAL_SCAN_MAX_BLOCKS = 3


def _members(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def _all_aggregates(cells: np.ndarray) -> np.ndarray:
    """(2^n, 2^n, k) array of W(S x T; .) over all block unions, indexed by bitmask."""
    n, _, k = cells.shape
    masks = subset_indicators(n)
    rows = (masks @ cells.reshape(n, n * k)).reshape(-1, n, k)
    return np.einsum("tj,sjk->stk", masks, rows) / n ** 2


def _colored_objective(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.abs(first - second).sum(axis=1)


class CutDistanceCalculator:
    """Cut semi-distance, unlabeled cut distance and overlay functional."""

    def __init__(self, config: Optional[GraphonConfig] = None):
        """
        Initialize calculator.

        Args:
            config: Search limits, annealing schedule and seed
        """
        self.config = config or GraphonConfig()

    # ------------------------------------------------------------------
    # labeled distances
    # ------------------------------------------------------------------

    def _check_pair(self, U: StepGraphon, W: StepGraphon) -> None:
        check_same_space(U.space, W.space)
        if U.n != W.n:
            raise ValidationFailure(f"block counts differ ({U.n} vs {W.n})")

    def _lp_objective(self, U: StepGraphon) -> Objective:
        dist = U.space.distance_matrix()
        return lambda first, second: lp_distance_batch(first, second, dist)

    def _exact_search(self, U: np.ndarray, W: np.ndarray, objective: Objective,
                      u_aggregates: Optional[np.ndarray] = None) -> Tuple[float, int, int]:
        n, _, k = U.shape
        if u_aggregates is None:
            u_aggregates = _all_aggregates(U)
        values = objective(u_aggregates.reshape(-1, k), _all_aggregates(W).reshape(-1, k))
        best = int(np.argmax(values))
        return float(values[best]), best // 2 ** n, best % 2 ** n

    def _ascent(self, U: np.ndarray, W: np.ndarray, objective: Objective, start: int) -> Tuple[float, np.ndarray, np.ndarray]:
        """Steepest single-flip ascent over block indicator vectors from one start."""
        n = U.shape[0]
        scale = 1.0 / n ** 2
        if start == 0:
            s = np.ones(n)
            t = np.ones(n)
        else:
            rng = generator(derive_seed(self.config.seed, start))
            s = (rng.random(n) < 0.5).astype(float)
            t = (rng.random(n) < 0.5).astype(float)

        def value_at(s_vec: np.ndarray, t_vec: np.ndarray) -> float:
            first = np.einsum("i,j,ijk->k", s_vec, t_vec, U)[None, :] * scale
            second = np.einsum("i,j,ijk->k", s_vec, t_vec, W)[None, :] * scale
            return float(objective(first, second)[0])

        current = value_at(s, t)
        for _ in range(self.config.heuristic_max_flips):
            row_u = np.einsum("j,ijk->ik", t, U) * scale
            row_w = np.einsum("j,ijk->ik", t, W) * scale
            col_u = np.einsum("i,ijk->jk", s, U) * scale
            col_w = np.einsum("i,ijk->jk", s, W) * scale
            base_u, base_w = s @ row_u, s @ row_w
            flip_s = (1.0 - 2.0 * s)[:, None]
            flip_t = (1.0 - 2.0 * t)[:, None]
            first = np.vstack([base_u + flip_s * row_u, base_u + flip_t * col_u])
            second = np.vstack([base_w + flip_s * row_w, base_w + flip_t * col_w])
            values = objective(np.maximum(first, 0.0), np.maximum(second, 0.0))
            move = int(np.argmax(values))
            if values[move] <= current + IMPROVEMENT_TOL:
                break
            if move < n:
                s[move] = 1.0 - s[move]
            else:
                t[move - n] = 1.0 - t[move - n]
            current = value_at(s, t)
        return current, s, t

    def _heuristic_search(self, U: np.ndarray, W: np.ndarray, objective: Objective,
                          starts: Optional[int] = None) -> Tuple[float, Tuple[int, ...], Tuple[int, ...]]:
        count = starts or self.config.heuristic_starts
        runs = ordered_map(lambda start: self._ascent(U, W, objective, start), list(range(count)),
                           self.config.threads)
        value, s, t = max(runs, key=lambda run: run[0])
        log.debug("coordinate ascent over %d starts: %.6g", count, value)
        return value, tuple(np.flatnonzero(s).tolist()), tuple(np.flatnonzero(t).tolist())

    def _search(self, U: np.ndarray, W: np.ndarray, objective: Objective,
                starts: Optional[int] = None,
                u_aggregates: Optional[np.ndarray] = None) -> Tuple[float, Tuple[int, ...], Tuple[int, ...], CutMode]:
        n = U.shape[0]
        if n <= self.config.n_exact:
            value, s_mask, t_mask = self._exact_search(U, W, objective, u_aggregates)
            return value, _members(s_mask, n), _members(t_mask, n), CutMode.EXACT
        value, S, T = self._heuristic_search(U, W, objective, starts)
        return value, S, T, CutMode.HEURISTIC_LOWER_BOUND

    def d_cut(self, U: StepGraphon, W: StepGraphon) -> CutResult:
        """
        Cut semi-distance: max over block unions S, T of the Levy-Prokhorov distance
        between U(S x T) and W(S x T).

        Exact for n <= n_exact (ties go to the smallest S then T bitmask); above that a
        multi-start coordinate ascent reports a lower bound.

        Args:
            U: First graphon
            W: Second graphon on the same grid and space

        Returns:
            CutResult with the optimizing block unions
        """
        self._check_pair(U, W)
        value, S, T, mode = self._search(U.cells, W.cells, self._lp_objective(U))
        return CutResult(
            value=value,
            witness=CutWitness(S=S, T=T, blocks=U.n),
            mode=mode,
            distance="d_cut",
            metric=U.space.metric,
        )

    def d_cut_colored(self, U: StepGraphon, W: StepGraphon) -> CutResult:
        """Sum over colors of the real cut distance between color densities, over block unions."""
        self._check_pair(U, W)
        value, S, T, mode = self._search(U.cells, W.cells, _colored_objective)
        return CutResult(
            value=value,
            witness=CutWitness(S=S, T=T, blocks=U.n),
            mode=mode,
            distance="d_cut_colored",
            metric=U.space.metric,
        )

    def evaluate_witness(self, U: StepGraphon, W: StepGraphon, witness: CutWitness) -> float:
        """Levy-Prokhorov distance between the aggregates on the witness rectangle."""
        if witness.permutation is not None:
            W = regrid(W, witness.blocks)
            W = StepGraphon(n=W.n, space=W.space, cells=W.cells[np.ix_(witness.permutation, witness.permutation)],
                            symmetric=W.symmetric)
            U = regrid(U, witness.blocks)
        s = np.zeros(U.n)
        t = np.zeros(U.n)
        s[list(witness.S)] = 1.0
        t[list(witness.T)] = 1.0
        first = np.einsum("i,j,ijk->k", s, t, U.cells) / U.n ** 2
        second = np.einsum("i,j,ijk->k", s, t, W.cells) / W.n ** 2
        return float(lp_distance_batch(first[None, :], second[None, :], U.space.distance_matrix())[0])

    def d_cut_fractional_scan(self, U: StepGraphon, W: StepGraphon, step: float = 0.1) -> float:
        """Brute-force scan of fractional rectangles s, t on a grid (test oracle, n <= 3)."""
        self._check_pair(U, W)
        if U.n > FRACTIONAL_SCAN_MAX_BLOCKS:
            raise ValidationFailure(f"fractional scan is limited to {FRACTIONAL_SCAN_MAX_BLOCKS} blocks")
        ticks = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
        grid = np.array(list(itertools.product(ticks, repeat=U.n)))
        scale = 1.0 / U.n ** 2
        rows_u = np.einsum("ai,ijk->ajk", grid, U.cells) * scale
        rows_w = np.einsum("ai,ijk->ajk", grid, W.cells) * scale
        dist = U.space.distance_matrix()
        best = 0.0
        for s_rows_u, s_rows_w in zip(rows_u, rows_w):
            first = grid @ s_rows_u
            second = grid @ s_rows_w
            best = max(best, float(lp_distance_batch(first, second, dist).max()))
        return best

    # ------------------------------------------------------------------
    # unlabeled distance
    # ------------------------------------------------------------------

    def _common_grid(self, U: StepGraphon, W: StepGraphon, refine: int) -> Tuple[StepGraphon, StepGraphon]:
        blocks = math.lcm(U.n, W.n) * refine
        return regrid(U, blocks), regrid(W, blocks)

    def _assignment_start(self, U: StepGraphon, W: StepGraphon) -> Tuple[int, ...]:
        """Match blocks by the LP distance between row-average measures."""
        rows_u = U.cells.mean(axis=1)
        rows_w = W.cells.mean(axis=1)
        n = U.n
        cost = lp_distance_batch(
            np.repeat(rows_u, n, axis=0), np.tile(rows_w, (n, 1)), U.space.distance_matrix()
        ).reshape(n, n)
        _, columns = linear_sum_assignment(cost)
        return tuple(int(c) for c in columns)

    def _permuted_distance(self, U: StepGraphon, W: StepGraphon, starts: Optional[int] = None):
        objective = self._lp_objective(U)
        # U stays fixed across permutations
        u_aggregates = _all_aggregates(U.cells) if U.n <= self.config.n_exact else None

        def distance(perm: Sequence[int]):
            permuted = W.cells[np.ix_(perm, perm)]
            return self._search(U.cells, permuted, objective, starts, u_aggregates)

        return distance

    def delta_cut(
        self,
        U: StepGraphon,
        W: StepGraphon,
        mode: SearchMode = SearchMode.EXACT,
        refine: Optional[int] = None,
    ) -> CutResult:
        """
        Unlabeled cut distance restricted to block permutations.

        Both graphons are regridded to lcm(n_U, n_W) * refine blocks. The result is an
        upper bound on the distance over all measure-preserving relabelings.

        Args:
            U: First graphon
            W: Second graphon (permuted)
            mode: exact enumeration (at most n_exact_delta blocks) or anneal
            refine: Refinement factor, defaults to config.refine

        Returns:
            CutResult whose witness carries the permutation applied to W
        """
        check_same_space(U.space, W.space)
        refine = refine or self.config.refine
        U, W = self._common_grid(U, W, refine)
        blocks = U.n
        identity = tuple(range(blocks))

        if is_constant(U) or is_constant(W):
            # every relabeling of a constant graphon is itself
            result = self.d_cut(U, W)
            witness = result.witness.model_copy(update={"permutation": identity, "refine": refine})
            return result.model_copy(update={"witness": witness, "distance": "delta_cut"})

        distance = self._permuted_distance(U, W)
        if mode is SearchMode.EXACT:
            if blocks > self.config.n_exact_delta:
                raise ValidationFailure(
                    f"exact permutation search is limited to {self.config.n_exact_delta} blocks, got {blocks}"
                )
            perms = list(itertools.permutations(range(blocks)))
            chunks = [perms[i::self.config.threads] for i in range(min(self.config.threads, len(perms)))]

            def scan(chunk: List[Tuple[int, ...]]):
                best = None
                for perm in chunk:
                    value = distance(perm)[0]
                    if best is None or value < best[0] or (value == best[0] and perm < best[1]):
                        best = (value, perm)
                return best

            _, perm = min(ordered_map(scan, chunks, self.config.threads))
            cut_mode = CutMode.EXACT
        else:
            annealer = PermutationAnnealer(
                lambda p: distance(p)[0] if blocks <= self.config.n_exact
                else self._permuted_distance(U, W, self.config.anneal_inner_starts)(p)[0],
                blocks,
                self.config,
            )
            _, perm = annealer.search(self._assignment_start(U, W), self.config.seed)
            cut_mode = CutMode.HEURISTIC_UPPER_BOUND

        value, S, T, inner_mode = distance(perm)
        if inner_mode is CutMode.HEURISTIC_LOWER_BOUND:
            cut_mode = CutMode.HEURISTIC_UPPER_BOUND
        log.debug("delta_cut over %d blocks (%s): %.6g", blocks, mode.value, value)
        return CutResult(
            value=value,
            witness=CutWitness(S=S, T=T, permutation=tuple(perm), blocks=blocks, refine=refine),
            mode=cut_mode,
            distance="delta_cut",
            metric=U.space.metric,
        )

    # ------------------------------------------------------------------
    # overlay functional
    # ------------------------------------------------------------------

    def overlay(self, W: StepGraphon, A, mode: Optional[SearchMode] = None) -> float:
        """
        Max over block permutations sigma of (1/n^2) sum_ij <A_ij, W_sigma(i)sigma(j)>.

        Args:
            W: Graphon
            A: DualKernel or (m, m, |Z|) array of test functions
            mode: exact (at most n_exact_delta blocks) or anneal; chosen by size if omitted

        Returns:
            Overlay value
        """
        return self.overlay_with_permutation(W, A, mode)[0]

    def overlay_with_permutation(self, W: StepGraphon, A, mode: Optional[SearchMode] = None):
        kernel = A.values if isinstance(A, DualKernel) else np.asarray(A, dtype=float)
        if kernel.ndim != 3 or kernel.shape[0] != kernel.shape[1] or kernel.shape[2] != W.space.size:
            raise ValidationFailure(f"kernel must have shape (m, m, {W.space.size}), got {kernel.shape}")
        if not np.all(np.isfinite(kernel)):
            raise ValidationFailure("kernel entries must be finite")
        blocks = math.lcm(W.n, kernel.shape[0])
        W = regrid(W, blocks)
        replicate = np.argmax(overlap_matrix(kernel.shape[0], blocks), axis=1)
        kernel = kernel[np.ix_(replicate, replicate)]
        pairing = np.einsum("ijk,abk->ijab", kernel, W.cells) / blocks ** 2
        rows = np.arange(blocks)

        if mode is None:
            mode = SearchMode.EXACT if blocks <= self.config.n_exact_delta else SearchMode.ANNEAL
        if mode is SearchMode.EXACT:
            if blocks > self.config.n_exact_delta:
                raise ValidationFailure(f"exact overlay is limited to {self.config.n_exact_delta} blocks")
            perms = np.array(list(itertools.permutations(range(blocks))), dtype=np.int64)
            values = pairing[rows[None, :, None], rows[None, None, :], perms[:, :, None], perms[:, None, :]].sum(axis=(1, 2))
            best = int(np.argmax(values))
            return float(values[best]), tuple(perms[best].tolist())

        def objective(perm: Sequence[int]) -> float:
            p = np.asarray(perm)
            return float(pairing[rows[:, None], rows[None, :], p[:, None], p[None, :]].sum())

        annealer = PermutationAnnealer(objective, blocks, self.config, maximize=True)
        return annealer.search(tuple(range(blocks)), self.config.seed)


def d_cut(U: StepGraphon, W: StepGraphon, config: Optional[GraphonConfig] = None) -> CutResult:
    return CutDistanceCalculator(config).d_cut(U, W)


def delta_cut(U: StepGraphon, W: StepGraphon, mode: SearchMode = SearchMode.EXACT,
              config: Optional[GraphonConfig] = None) -> CutResult:
    return CutDistanceCalculator(config).delta_cut(U, W, mode)


def d_cut_colored(U: StepGraphon, W: StepGraphon, config: Optional[GraphonConfig] = None) -> CutResult:
    return CutDistanceCalculator(config).d_cut_colored(U, W)


def overlay(W: StepGraphon, A, config: Optional[GraphonConfig] = None) -> float:
    return CutDistanceCalculator(config).overlay(W, A)
