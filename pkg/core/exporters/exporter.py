"""Exporter for generating output files."""

import json
import logging
import math
import os
import tempfile
import threading
from enum import Enum
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from core import __version__
from core.utils.models import ConcentrationReport, GraphonConfig, LdpReport, RunManifest

log = logging.getLogger(__name__)

LIBRARIES = ("numpy", "scipy", "POT", "pandas", "pydantic")
LDP_COLUMNS = ["n", "method", "log_prob", "scaled", "rate_target", "gap", "ess", "samples", "half_width"]
CONCENTRATION_COLUMNS = ["n", "reps", "median", "q90", "mode"]


def library_versions() -> Dict[str, str]:
    versions = {}
    for name in LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def build_manifest(subcommand: str, config: GraphonConfig, seed: Optional[int] = None) -> RunManifest:
    """Provenance record for one run."""
    return RunManifest(
        subcommand=subcommand,
        seed=seed,
        config_hash=config.config_hash(),
        version=__version__,
        libraries=library_versions(),
    )


def to_plain(value: Any) -> Any:
    """JSON-ready copy of a payload; non-finite floats become "inf", "-inf" or "nan"."""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isfinite(number):
            return number
        return "nan" if math.isnan(number) else ("inf" if number > 0 else "-inf")
    return value


class OutputExporter:
    """Single writer for JSON documents and CSV tables, each carrying the run manifest."""

    def __init__(self, manifest: RunManifest):
        """Initialize the exporter.

        Args:
            manifest: Provenance embedded in every file written
        """
        self.manifest = manifest
        self.written: List[Path] = []
        self._lock = threading.Lock()

    def _atomic_write(self, output_path: Path, content: str) -> Path:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            handle, temp_name = tempfile.mkstemp(dir=output_path.parent, prefix=f".{output_path.name}.", suffix=".tmp")
            try:
                with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as f:
                    f.write(content)
                os.replace(temp_name, output_path)
            except BaseException:
                if os.path.exists(temp_name):
                    os.unlink(temp_name)
                raise
            self.written.append(output_path)
        log.debug("wrote %s", output_path)
        return output_path

    def export_json(self, output_path: Path, payload: Any) -> Path:
        """Export a JSON document with a top-level "manifest".

        Args:
            output_path: Destination file
            payload: Model or mapping to serialize

        Returns:
            Path to exported file
        """
        document = to_plain(payload)
        if not isinstance(document, dict):
            document = {"value": document}
        document["manifest"] = to_plain(self.manifest)
        content = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
        return self._atomic_write(Path(output_path), content)

    def export_table(self, output_path: Path, rows: Iterable[Dict[str, Any]], columns: List[str]) -> Path:
        """Export a CSV table and its `<name>.manifest.json` sidecar.

        Args:
            output_path: Destination CSV file
            rows: One mapping per row
            columns: Header, in order

        Returns:
            Path to the CSV file
        """
        frame = pd.DataFrame(list(rows), columns=columns)
        content = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n", na_rep="")
        output_path = Path(output_path)
        self._atomic_write(output_path, content)
        self.export_json(output_path.with_name(f"{output_path.stem}.manifest.json"), {"table": output_path.name})
        return output_path

    def export_ldp_report(self, output_path: Path, report: LdpReport) -> Path:
        rows = [{**row.model_dump(), "method": row.method.value} for row in report.rows]
        return self.export_table(output_path, rows, LDP_COLUMNS)

    def export_concentration(self, output_path: Path, report: ConcentrationReport) -> Path:
        rows = [
            {"n": row.n, "reps": row.reps, "median": row.median, "q90": row.q90, "mode": report.mode.value}
            for row in report.rows
        ]
        return self.export_table(output_path, rows, CONCENTRATION_COLUMNS)
