"""Exception hierarchy for graphon-ldp."""

from typing import Optional, Tuple


class GraphonLdpError(Exception):
    """Base class for every error raised by the library."""


class ValidationFailure(GraphonLdpError, ValueError):
    """Input rejected before any numerics ran (maps to CLI exit status 2)."""


class MismatchedSpaceError(ValidationFailure):
    """Two objects that must share a WeightSpace do not."""


class DivisibilityError(ValidationFailure):
    """A block count does not divide another one."""


class LatticeError(ValidationFailure):
    """Functional values do not sit on a common rational lattice."""


class NumericalFailure(GraphonLdpError, ArithmeticError):
    """A computation produced NaN, or +inf where a finite value was required (exit status 3)."""


class SupportError(NumericalFailure):
    """Absolute continuity or full support failed.

    Args:
        message: Human readable explanation
        cell: Offending (i, j) block, if any
        point: Offending point index, if any
    """

    def __init__(self, message: str, cell: Optional[Tuple[int, int]] = None, point: Optional[int] = None):
        super().__init__(message)
        self.cell = cell
        self.point = point


class InfeasibleConstraintError(NumericalFailure):
    """No probability graphon satisfies the constraint set."""


class ZeroProbabilityEventError(NumericalFailure):
    """Conditioning on an event of probability zero."""
