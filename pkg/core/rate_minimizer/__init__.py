"""Constrained minimization of the graphon rate function."""

from .minimizer import ConstraintArrays, RateMinimizer, kkt_check, legendre_value, minimize_rate

__all__ = ["ConstraintArrays", "RateMinimizer", "kkt_check", "legendre_value", "minimize_rate"]
