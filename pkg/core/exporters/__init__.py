"""Exporters for generating output files."""

from .exporter import OutputExporter, build_manifest, library_versions, to_plain

__all__ = ["OutputExporter", "build_manifest", "library_versions", "to_plain"]
