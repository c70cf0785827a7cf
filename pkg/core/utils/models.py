"""Pydantic models for graphon-ldp data structures."""

import functools
import hashlib
import json
import math
import os
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    StrictFloat,
    StrictInt,
    computed_field,
    model_validator,
)

# Probability-mass checks are absolute; metric/entropy comparisons use METRIC_TOL.
MASS_TOL = 1e-12
METRIC_TOL = 1e-9
TRIANGLE_TOL = 1e-12


def _float_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def _index_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.int64)
    array.setflags(write=False)
    return array


def _array_to_list(array: np.ndarray) -> list:
    return array.tolist()


FloatArray = Annotated[np.ndarray, BeforeValidator(_float_array), PlainSerializer(_array_to_list, return_type=list)]
IndexArray = Annotated[np.ndarray, BeforeValidator(_index_array), PlainSerializer(_array_to_list, return_type=list)]
Label = Union[StrictInt, StrictFloat, str]


class _ArrayModel(BaseModel):
    """Frozen model holding read-only numpy payloads; equality is exact and element-wise."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __eq__(self, other: object) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        for name in type(self).model_fields:
            mine, theirs = getattr(self, name), getattr(other, name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if not (
                    isinstance(mine, np.ndarray)
                    and isinstance(theirs, np.ndarray)
                    and mine.shape == theirs.shape
                    and np.array_equal(mine, theirs)
                ):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = None  # type: ignore[assignment]


# ============================================================================
# Tags
# ============================================================================


class MetricKind(str, Enum):
    """How distances between weight values are defined."""
    DISCRETE = "discrete"
    EUCLIDEAN = "euclidean"
    CUSTOM = "custom"


class MeasureKind(str, Enum):
    """Kind tag of a finite measure."""
    PROBABILITY = "probability"
    SUBPROBABILITY = "subprobability"
    SIGNED_FORBIDDEN = "signed-forbidden"


class CutMode(str, Enum):
    """Quality tag of a cut-distance value."""
    EXACT = "exact"
    HEURISTIC_LOWER_BOUND = "heuristic-lower-bound"
    HEURISTIC_UPPER_BOUND = "heuristic-upper-bound"


class SearchMode(str, Enum):
    """Permutation search strategy for the unlabeled distance and overlays."""
    EXACT = "exact"
    ANNEAL = "anneal"


class Direction(str, Enum):
    """Inequality direction of an event or constraint."""
    GE = ">="
    LE = "<="

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.GE else -1.0


class EventKind(str, Enum):
    """Rare-event families."""
    MEAN_FUNCTIONAL = "mean-functional"
    DELTA_BALL = "delta-ball"


class VerifyMode(str, Enum):
    """How event probabilities are obtained."""
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


# ============================================================================
# Weight spaces and measures
# ============================================================================


class WeightSpace(BaseModel):
    """Finite metric space of edge-weight values containing a distinguished 0."""

    model_config = ConfigDict(frozen=True)

    points: Tuple[Label, ...] = Field(..., description="Ordered labeled values")
    dist: Optional[Tuple[Tuple[float, ...], ...]] = Field(
        default=None, description="Pairwise distances; required for the custom metric"
    )
    zero_index: int = Field(default=0, description="Index of the distinguished point 0")
    metric: MetricKind = MetricKind.DISCRETE

    @model_validator(mode="after")
    def _check_metric(self) -> "WeightSpace":
        size = len(self.points)
        if size == 0:
            raise ValueError("a weight space needs at least the point 0")
        if len(set(self.points)) != size:
            raise ValueError("weight space points must be distinct")
        if not 0 <= self.zero_index < size:
            raise ValueError(f"zero_index {self.zero_index} out of range for {size} points")
        if self.metric is MetricKind.EUCLIDEAN:
            if any(isinstance(p, str) for p in self.points):
                raise ValueError("euclidean weight spaces need numeric points")
        if self.metric is MetricKind.CUSTOM:
            if self.dist is None:
                raise ValueError("custom metric requires a dist matrix")
            matrix = np.array(self.dist, dtype=float)
            if matrix.shape != (size, size):
                raise ValueError(f"dist must be {size}x{size}, got {matrix.shape}")
            if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
                raise ValueError("distances must be finite and nonnegative")
            if np.any(np.diag(matrix) != 0):
                raise ValueError("dist must have a zero diagonal")
            if not np.allclose(matrix, matrix.T, rtol=0.0, atol=TRIANGLE_TOL):
                raise ValueError("dist must be symmetric")
            through = (matrix[:, :, None] + matrix[None, :, :]).min(axis=1)
            if np.any(matrix > through + TRIANGLE_TOL):
                raise ValueError("dist violates the triangle inequality")
            off = matrix[~np.eye(size, dtype=bool)]
            if off.size and off.min() <= 0:
                raise ValueError("distinct points must be at positive distance")
        elif self.dist is not None:
            raise ValueError(f"dist is only accepted with the custom metric, not {self.metric.value}")
        return self

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def metric_name(self) -> str:
        return self.metric.value

    def distance_matrix(self) -> np.ndarray:
        """Dense pairwise distance matrix."""
        if self.metric is MetricKind.DISCRETE:
            return 1.0 - np.eye(self.size)
        if self.metric is MetricKind.EUCLIDEAN:
            values = np.array(self.points, dtype=float)
            return np.abs(values[:, None] - values[None, :])
        return np.array(self.dist, dtype=float)


class FiniteMeasure(_ArrayModel):
    """Nonnegative weight vector over a WeightSpace."""

    space: WeightSpace
    weights: FloatArray
    kind: MeasureKind = MeasureKind.PROBABILITY

    @model_validator(mode="after")
    def _check_weights(self) -> "FiniteMeasure":
        if self.kind is MeasureKind.SIGNED_FORBIDDEN:
            raise ValueError("signed measures are not supported")
        if self.weights.shape != (self.space.size,):
            raise ValueError(f"expected {self.space.size} weights, got shape {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        mass = float(np.sum(self.weights))
        if self.kind is MeasureKind.PROBABILITY and abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"probability weights sum to {mass!r}")
        if self.kind is MeasureKind.SUBPROBABILITY and mass > 1.0 + MASS_TOL:
            raise ValueError(f"subprobability weights sum to {mass!r}")
        return self

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_probability(self) -> bool:
        return abs(self.total_mass - 1.0) <= MASS_TOL


# ============================================================================
# Graphons and graphs
# ============================================================================


class StepGraphon(_ArrayModel):
    """Block-constant probability graphon on an equal n x n grid."""

    n: int = Field(..., gt=0, description="Block count")
    space: WeightSpace
    cells: FloatArray = Field(..., description="n x n x |Z| cell weights")
    symmetric: bool = True

    @model_validator(mode="after")
    def _check_cells(self) -> "StepGraphon":
        expected = (self.n, self.n, self.space.size)
        if self.cells.shape != expected:
            raise ValueError(f"cells must have shape {expected}, got {self.cells.shape}")
        if not np.all(np.isfinite(self.cells)) or np.any(self.cells < 0):
            raise ValueError("cell weights must be finite and nonnegative")
        masses = self.cells.sum(axis=2)
        worst = float(np.max(np.abs(masses - 1.0)))
        if worst > MASS_TOL:
            raise ValueError(f"every cell must be a probability measure (mass error {worst:.3e})")
        if self.symmetric and not np.array_equal(self.cells, self.cells.transpose(1, 0, 2)):
            raise ValueError("symmetric graphon has cells[i][j] != cells[j][i]")
        return self

    def cell(self, i: int, j: int) -> FiniteMeasure:
        """Cell (i, j) as a probability measure."""
        return FiniteMeasure(space=self.space, weights=self.cells[i, j])


class WeightedGraph(_ArrayModel):
    """Simple weighted graph: symmetric point indices, zero diagonal."""

    n: int = Field(..., gt=0, description="Vertex count")
    space: WeightSpace
    weights: IndexArray = Field(..., description="n x n point indices")

    @model_validator(mode="after")
    def _check_weights(self) -> "WeightedGraph":
        if self.weights.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {self.weights.shape}")
        if np.any(self.weights < 0) or np.any(self.weights >= self.space.size):
            raise ValueError("weight indices out of range")
        if not np.array_equal(self.weights, self.weights.T):
            raise ValueError("weighted graph must be symmetric")
        if np.any(np.diag(self.weights) != self.space.zero_index):
            raise ValueError("self-loops are excluded: the diagonal must carry the zero point")
        return self


class DualKernel(_ArrayModel):
    """Block-constant kernel with values in real functions on the weight space."""

    n: int = Field(..., gt=0)
    values: FloatArray = Field(..., description="n x n x |Z| kernel values")

    @model_validator(mode="after")
    def _check_values(self) -> "DualKernel":
        if self.values.ndim != 3 or self.values.shape[:2] != (self.n, self.n):
            raise ValueError(f"kernel values must have shape (n, n, |Z|) with n={self.n}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("kernel entries must be finite")
        return self

    @computed_field  # type: ignore[misc]
    @property
    def bound(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


class CutWitness(BaseModel):
    """Optimizing block unions and, for the unlabeled distance, the permutation."""

    S: Tuple[int, ...] = ()
    T: Tuple[int, ...] = ()
    permutation: Optional[Tuple[int, ...]] = None
    blocks: int = Field(..., gt=0, description="Block count the witness refers to")
    refine: int = 1


class CutResult(BaseModel):
    """Value of a cut (semi-)distance together with its witness."""

    value: float = Field(..., ge=0.0)
    witness: CutWitness
    mode: CutMode
    distance: str = Field(default="d_cut", description="d_cut, delta_cut or d_cut_colored")
    metric: MetricKind = MetricKind.DISCRETE


# ============================================================================
# Continuous weight spaces
# ============================================================================


class DensityMeasure(_ArrayModel):
    """Measure on an interval with a piecewise-linear density (piecewise constant by default)."""

    breakpoints: FloatArray
    values: FloatArray = Field(..., description="Density at the left end of each piece")
    slopes: FloatArray = Field(default_factory=lambda: _float_array([]), description="Per-piece slopes")

    @model_validator(mode="after")
    def _check_density(self) -> "DensityMeasure":
        pieces = self.breakpoints.size - 1
        if self.breakpoints.ndim != 1 or pieces < 1:
            raise ValueError("a density needs at least two breakpoints")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.values.shape != (pieces,):
            raise ValueError(f"expected {pieces} density values, got {self.values.shape}")
        if self.slopes.size not in (0, pieces):
            raise ValueError(f"expected {pieces} slopes, got {self.slopes.size}")
        if not (np.all(np.isfinite(self.breakpoints)) and np.all(np.isfinite(self.values))
                and np.all(np.isfinite(self.slopes))):
            raise ValueError("density data must be finite")
        right = self.values + self.piece_slopes * self.lengths
        if np.any(self.values < 0) or np.any(right < -MASS_TOL):
            raise ValueError("density must be nonnegative")
        return self

    @property
    def interval(self) -> Tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def piece_slopes(self) -> np.ndarray:
        return self.slopes if self.slopes.size else np.zeros(self.values.size)

    @property
    def mass(self) -> float:
        return float(np.sum(self.piece_masses()))

    @property
    def is_probability(self) -> bool:
        return abs(self.mass - 1.0) <= MASS_TOL

    def piece_masses(self) -> np.ndarray:
        lengths = self.lengths
        return self.values * lengths + 0.5 * self.piece_slopes * lengths ** 2

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """Mass of [a, x] for each entry of x, integrated in closed form."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        piece = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.values.size - 1)
        before = np.concatenate(([0.0], np.cumsum(self.piece_masses())))[piece]
        run = np.clip(x - self.breakpoints[piece], 0.0, self.lengths[piece])
        return before + self.values[piece] * run + 0.5 * self.piece_slopes[piece] * run ** 2

    def density(self, x: np.ndarray) -> np.ndarray:
        """Density value at each x (right-continuous, last piece closed)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        piece = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.values.size - 1)
        return self.values[piece] + self.piece_slopes[piece] * (x - self.breakpoints[piece])


class DensityGraphon(BaseModel):
    """Graphon on an equal grid whose cells are absolutely continuous measures."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., gt=0)
    cells: Tuple[Tuple[DensityMeasure, ...], ...]
    symmetric: bool = True

    @model_validator(mode="after")
    def _check_cells(self) -> "DensityGraphon":
        if len(self.cells) != self.n or any(len(row) != self.n for row in self.cells):
            raise ValueError(f"cells must be {self.n}x{self.n}")
        interval = self.cells[0][0].interval
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                if cell.interval != interval:
                    raise ValueError(f"cell ({i}, {j}) lives on {cell.interval}, expected {interval}")
                if self.symmetric and not cell == self.cells[j][i]:
                    raise ValueError(f"symmetric density graphon differs at ({i}, {j})")
        return self

    @property
    def interval(self) -> Tuple[float, float]:
        return self.cells[0][0].interval


@functools.lru_cache(maxsize=64)
def _level_space(a: float, b: float, anchor_cell: int, m: int) -> WeightSpace:
    width = (b - a) / 2 ** m
    midpoints = a + width * (np.arange(2 ** m) + 0.5)
    return WeightSpace(points=tuple(midpoints.tolist()), zero_index=anchor_cell, metric=MetricKind.EUCLIDEAN)


class NestedPartitionScheme(BaseModel):
    """Dyadic partitions of [a, b] with midpoint representatives."""

    model_config = ConfigDict(frozen=True)

    interval: Tuple[float, float]
    depth_max: int = Field(..., ge=0, le=20)
    zero_anchor: float = Field(default=0.0, description="Point whose cell carries the distinguished 0")

    @model_validator(mode="after")
    def _check_nested(self) -> "NestedPartitionScheme":
        a, b = self.interval
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError(f"invalid interval {self.interval}")
        if not a <= self.zero_anchor <= b:
            raise ValueError(f"zero anchor {self.zero_anchor} outside {self.interval}")
        for m in range(1, self.depth_max + 1):
            if not np.array_equal(self.boundaries(m)[::2], self.boundaries(m - 1)):
                raise ValueError(f"level {m} does not refine level {m - 1}")
            if not math.isclose(self.diameter(m), (b - a) / 2 ** m, rel_tol=0.0, abs_tol=MASS_TOL):
                raise ValueError(f"level {m} diameter mismatch")
        return self

    def _check_level(self, m: int) -> None:
        if not 0 <= m <= self.depth_max:
            raise ValueError(f"level {m} outside [0, {self.depth_max}]")

    def boundaries(self, m: int) -> np.ndarray:
        a, b = self.interval
        return a + (b - a) * (np.arange(2 ** m + 1) / 2 ** m)

    def representatives(self, m: int) -> np.ndarray:
        self._check_level(m)
        return np.array(self.level_space(m).points, dtype=float)

    def diameter(self, m: int) -> float:
        return float(np.max(np.diff(self.boundaries(m))))

    def cell_of(self, x: float, m: int) -> int:
        """Index of the level-m cell containing x (cells half-open, the last one closed)."""
        a, b = self.interval
        if not a <= x <= b:
            raise ValueError(f"{x} outside {self.interval}")
        index = int(np.searchsorted(self.boundaries(m), x, side="right")) - 1
        return min(index, 2 ** m - 1)

    def level_space(self, m: int) -> WeightSpace:
        """WeightSpace of level-m representatives with the euclidean metric."""
        self._check_level(m)
        a, b = self.interval
        return _level_space(a, b, self.cell_of(self.zero_anchor, m), m)


# ============================================================================
# Events, constraints and reports
# ============================================================================


class EventSpec(_ArrayModel):
    """Rare event: a linear mean-functional threshold or an unlabeled cut-distance ball."""

    kind: EventKind
    f: Optional[FloatArray] = None
    direction: Direction = Direction.GE
    threshold: Optional[float] = None
    center: Optional[StepGraphon] = None
    radius: Optional[float] = None

    @model_validator(mode="after")
    def _check_event(self) -> "EventSpec":
        if self.kind is EventKind.MEAN_FUNCTIONAL:
            if self.f is None or self.threshold is None:
                raise ValueError("mean-functional events need f and threshold")
            if self.f.ndim != 1 or not np.all(np.isfinite(self.f)):
                raise ValueError("f must be a finite vector")
            if not math.isfinite(self.threshold):
                raise ValueError("threshold must be finite")
        else:
            if self.center is None or self.radius is None:
                raise ValueError("delta-ball events need center and radius")
            if not self.radius > 0:
                raise ValueError("radius must be positive")
        return self


class KlProductReport(BaseModel):
    """Edge-factorized divergence of a graphon-driven graph law from the i.i.d. law."""

    n: int
    total: float = Field(..., description="sum over i<j of H(cells[i][j] | nu)")
    scaled: float = Field(..., description="(2/n^2) * total")
    full_entropy: float = Field(..., description="graphon_entropy over the full square")
    diagonal_correction: float = Field(..., description="(1/n^2) * sum_i H(cells[i][i] | nu)")
    offending_cell: Optional[Tuple[int, int]] = None

    @property
    def offdiag_entropy(self) -> float:
        return self.scaled


class SumDistribution(_ArrayModel):
    """Exact law of the sum of f over the N edges, on the lattice (base + step*j) / denominator."""

    edges: int
    denominator: int
    base: int
    step: int
    log_pmf: FloatArray
    point_classes: IndexArray = Field(..., description="Lattice class of each point, -1 off the support")
    steps: IndexArray = Field(..., description="Distinct classes charged by the edge law")
    step_log_probs: FloatArray = Field(..., description="Log mass of each class")

    def values(self) -> np.ndarray:
        j = np.arange(self.log_pmf.size)
        return (self.base + self.step * j) / self.denominator


class LdpRow(BaseModel):
    """One row of a large-deviation report."""

    n: int
    method: VerifyMode
    log_prob: float
    scaled: float
    rate_target: float
    gap: float
    ess: Optional[float] = None
    samples: Optional[int] = None
    half_width: float = 0.0


class LdpReport(BaseModel):
    """Per-n comparison of (2/n^2) log P against minus the rate."""

    rows: List[LdpRow] = Field(default_factory=list)
    method: VerifyMode
    event_kind: EventKind

    @model_validator(mode="after")
    def _check_rows(self) -> "LdpReport":
        for row in self.rows:
            if row.method is VerifyMode.EXACT and row.half_width != 0.0:
                raise ValueError("exact rows carry zero half-width")
        return self


class ConcentrationRow(BaseModel):
    """Distance summary of conditioned samples at one graph size."""

    n: int
    reps: int
    median: float
    q90: float
    distances: Tuple[float, ...] = ()


class ConcentrationReport(BaseModel):
    rows: List[ConcentrationRow] = Field(default_factory=list)
    mode: CutMode


Scope = Union[Literal["global"], Tuple[Tuple[int, int], ...]]


class LinearConstraint(_ArrayModel):
    """Bound on the average of <f, W_ij> over a scope of cells."""

    f: FloatArray
    direction: Direction = Direction.GE
    threshold: float
    scope: Scope = "global"

    @model_validator(mode="after")
    def _check_constraint(self) -> "LinearConstraint":
        if self.f.ndim != 1 or not np.all(np.isfinite(self.f)):
            raise ValueError("constraint functional must be a finite vector")
        if not math.isfinite(self.threshold):
            raise ValueError("constraint threshold must be finite")
        if self.scope != "global" and len(self.scope) == 0:
            raise ValueError("per-block scope must list at least one cell")
        return self


class ConstraintSet(BaseModel):
    """Linear constraints defining a rare-event set."""

    model_config = ConfigDict(frozen=True)

    constraints: Tuple[LinearConstraint, ...] = ()
    n_blocks: int = Field(default=1, gt=0)
    tolerance: float = Field(default=1e-6, gt=0.0)

    @model_validator(mode="after")
    def _check_scopes(self) -> "ConstraintSet":
        for index, constraint in enumerate(self.constraints):
            if constraint.scope == "global":
                continue
            for i, j in constraint.scope:
                if not (0 <= i < self.n_blocks and 0 <= j < self.n_blocks):
                    raise ValueError(f"constraint {index} scope cell ({i}, {j}) outside {self.n_blocks} blocks")
        return self


class MinimizerResult(_ArrayModel):
    """Rate minimizer with its multipliers and KKT residual."""

    graphon: StepGraphon
    value: float = Field(..., ge=0.0)
    dual: FloatArray
    kkt_residual: float
    feasible: bool = True
    max_violation: float = 0.0
    method: str = "closed-form"
    iterations: int = 0
    degenerate: bool = False


# ============================================================================
# Configuration and run bookkeeping
# ============================================================================


class GraphonConfig(BaseModel):
    """Tunable constants of every engine."""

    model_config = ConfigDict(frozen=True)

    mass_tol: float = MASS_TOL
    metric_tol: float = METRIC_TOL
    lp_precision: float = 1e-10
    n_exact: int = Field(default=10, ge=1)
    n_exact_delta: int = Field(default=7, ge=1)
    heuristic_starts: int = Field(default=32, ge=1)
    heuristic_max_flips: int = Field(default=1000, ge=1)
    anneal_inner_starts: int = Field(default=4, ge=1)
    anneal_ratio: float = Field(default=0.97, gt=0.0, lt=1.0)
    anneal_iterations_per_block: int = Field(default=200, ge=1)
    anneal_restarts: int = Field(default=1, ge=1)
    refine: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    bisection_iterations: int = Field(default=200, ge=1)
    bisection_tol: float = 1e-12
    mirror_iterations: int = Field(default=10_000, ge=1)
    mirror_polish: bool = True
    feasibility_tol: float = 1e-6
    lattice_max_denominator: int = Field(default=10_000, ge=1)
    max_exact_edges: int = Field(default=1_000_000, ge=1)
    max_enumeration: int = Field(default=100_000, ge=1)
    mc_samples: int = Field(default=2000, ge=1)
    rejection_max_tries: int = Field(default=100_000, ge=1)
    threads: int = Field(default=1, ge=1)

    @classmethod
    def from_env(cls, **overrides: Any) -> "GraphonConfig":
        """Build a config, capping parallelism with GRAPHON_LDP_THREADS."""
        raw = os.environ.get("GRAPHON_LDP_THREADS")
        if raw and "threads" not in overrides:
            overrides["threads"] = max(1, int(raw))
        return cls(**overrides)

    def config_hash(self) -> str:
        # threads never changes results, so it stays out of the hash
        canonical = json.dumps(self.model_dump(mode="json", exclude={"threads"}), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


STOCHASTIC_COMMANDS = frozenset({"sample", "condition", "concentrate"})
# subcommands that draw random numbers only in one mode
SEEDED_MODES = {"verify": "monte-carlo", "dist": "anneal"}
Subcommand = Literal["sample", "dist", "entropy", "project", "verify", "condition", "concentrate", "minimize", "selftest"]


class RunManifest(BaseModel):
    """Provenance embedded in every output file."""

    subcommand: str
    seed: Optional[int] = None
    config_hash: str
    version: str
    libraries: Dict[str, str] = Field(default_factory=dict)


class RunConfig(BaseModel):
    """Parsed command parameters."""

    subcommand: Subcommand
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None
    n_list: Tuple[int, ...] = ()
    mode: Optional[str] = None
    config: GraphonConfig = Field(default_factory=GraphonConfig)

    @property
    def stochastic(self) -> bool:
        return self.subcommand in STOCHASTIC_COMMANDS or SEEDED_MODES.get(self.subcommand) == self.mode

    @model_validator(mode="after")
    def _check_run(self) -> "RunConfig":
        if self.stochastic and self.seed is None:
            raise ValueError(f"subcommand '{self.subcommand}' needs a seed")
        for name, path in self.inputs.items():
            if not Path(path).exists():
                raise ValueError(f"input '{name}' not found: {path}")
        if any(n < 1 for n in self.n_list):
            raise ValueError("graph sizes must be positive")
        return self


class SelfTestCheck(BaseModel):
    module: str
    name: str
    passed: bool
    detail: str = ""


class SelfTestReport(BaseModel):
    checks: List[SelfTestCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[SelfTestCheck]:
        return [check for check in self.checks if not check.passed]
