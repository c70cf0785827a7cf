"""Nested dyadic partitions and projections of measures and graphons."""

from .projections import DyadicProjector, density_relative_entropy, graphon_density_entropy

__all__ = ["DyadicProjector", "density_relative_entropy", "graphon_density_entropy"]
