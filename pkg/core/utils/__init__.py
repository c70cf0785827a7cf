"""Shared models, errors, logging and seeding for graphon-ldp."""

from .errors import (
    DivisibilityError,
    GraphonLdpError,
    InfeasibleConstraintError,
    LatticeError,
    MismatchedSpaceError,
    NumericalFailure,
    SupportError,
    ValidationFailure,
    ZeroProbabilityEventError,
)
from .models import (
    ConcentrationReport,
    ConcentrationRow,
    ConstraintSet,
    CutMode,
    CutResult,
    CutWitness,
    DensityGraphon,
    DensityMeasure,
    Direction,
    DualKernel,
    EventKind,
    EventSpec,
    FiniteMeasure,
    GraphonConfig,
    KlProductReport,
    LdpReport,
    LdpRow,
    LinearConstraint,
    MeasureKind,
    MetricKind,
    MinimizerResult,
    NestedPartitionScheme,
    RunConfig,
    RunManifest,
    SearchMode,
    SelfTestCheck,
    SelfTestReport,
    StepGraphon,
    SumDistribution,
    VerifyMode,
    WeightedGraph,
    WeightSpace,
)

__all__ = [
    "DivisibilityError",
    "GraphonLdpError",
    "InfeasibleConstraintError",
    "LatticeError",
    "MismatchedSpaceError",
    "NumericalFailure",
    "SupportError",
    "ValidationFailure",
    "ZeroProbabilityEventError",
    "ConcentrationReport",
    "ConcentrationRow",
    "ConstraintSet",
    "CutMode",
    "CutResult",
    "CutWitness",
    "DensityGraphon",
    "DensityMeasure",
    "Direction",
    "DualKernel",
    "EventKind",
    "EventSpec",
    "FiniteMeasure",
    "GraphonConfig",
    "KlProductReport",
    "LdpReport",
    "LdpRow",
    "LinearConstraint",
    "MeasureKind",
    "MetricKind",
    "MinimizerResult",
    "NestedPartitionScheme",
    "RunConfig",
    "RunManifest",
    "SearchMode",
    "SelfTestCheck",
    "SelfTestReport",
    "StepGraphon",
    "SumDistribution",
    "VerifyMode",
    "WeightedGraph",
    "WeightSpace",
]
