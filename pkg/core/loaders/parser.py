"""Parser for measure, graphon, graph, density, scheme, event and constraint files."""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Union

from core.utils.errors import ValidationFailure
from core.utils.models import (
    ConstraintSet,
    DensityGraphon,
    DensityMeasure,
    DualKernel,
    EventKind,
    EventSpec,
    FiniteMeasure,
    GraphonConfig,
    MetricKind,
    NestedPartitionScheme,
    StepGraphon,
    WeightedGraph,
)

log = logging.getLogger(__name__)

Document = Union[
    ConstraintSet,
    DensityGraphon,
    DensityMeasure,
    DualKernel,
    EventSpec,
    FiniteMeasure,
    NestedPartitionScheme,
    StepGraphon,
    WeightedGraph,
]


def _depth(value: Any) -> int:
    depth = 0
    while isinstance(value, list):
        if not value:
            return depth + 1
        value = value[0]
        depth += 1
    return depth


class InputParser:
    """Reads UTF-8 JSON documents into validated models."""

    KINDS = ("constraints", "event", "scheme", "density", "density-graphon", "graphon", "kernel", "graph", "measure")

    def __init__(self, encoding: str = "utf-8"):
        """Initialize the parser.

        Args:
            encoding: Text encoding of every input file
        """
        self.encoding = encoding
        self._builders: Dict[str, Callable[[Dict[str, Any]], Document]] = {
            "constraints": self.constraints_from_dict,
            "event": self.event_from_dict,
            "scheme": NestedPartitionScheme.model_validate,
            "density": DensityMeasure.model_validate,
            "density-graphon": DensityGraphon.model_validate,
            "graphon": self.graphon_from_dict,
            "kernel": DualKernel.model_validate,
            "graph": self.graph_from_dict,
            "measure": self.measure_from_dict,
        }

    def load_json(self, file_path: str) -> Dict[str, Any]:
        path = Path(file_path)
        if not path.exists():
            raise ValidationFailure(f"input file not found: {file_path}")
        try:
            with open(path, "r", encoding=self.encoding) as f:
                data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationFailure(f"{file_path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationFailure(f"{file_path} must hold a JSON object")
        # outputs of this tool carry their provenance; inputs ignore it
        data.pop("manifest", None)
        return data

    def detect_kind(self, data: Dict[str, Any]) -> str:
        """Guess the document kind from its keys.

        Raises:
            ValidationFailure: when no known layout matches
        """
        if "constraints" in data:
            return "constraints"
        if data.get("kind") in {kind.value for kind in EventKind}:
            return "event"
        if "depth_max" in data:
            return "scheme"
        if "breakpoints" in data:
            return "density"
        if "cells" in data:
            first = data["cells"]
            while isinstance(first, list) and first:
                first = first[0]
            return "density-graphon" if isinstance(first, dict) else "graphon"
        if "values" in data and "n" in data:
            return "kernel"
        if "weights" in data:
            return "graph" if _depth(data["weights"]) == 2 else "measure"
        raise ValidationFailure(f"cannot tell the document kind from keys {sorted(data)}")

    @staticmethod
    def space_from_dict(data: Dict[str, Any]) -> Dict[str, Any]:
        """A space with an explicit distance matrix is a custom metric space."""
        space = dict(data)
        if space.get("dist") is not None and "metric" not in space:
            space["metric"] = MetricKind.CUSTOM.value
        return space

    def _with_space(self, data: Dict[str, Any], size: int) -> Dict[str, Any]:
        payload = dict(data)
        if "space" in payload:
            payload["space"] = self.space_from_dict(payload["space"])
        else:
            payload["space"] = {"points": list(range(size))}
        return payload

    def measure_from_dict(self, data: Dict[str, Any]) -> FiniteMeasure:
        return FiniteMeasure.model_validate(self._with_space(data, len(data.get("weights", []))))

    def graphon_from_dict(self, data: Dict[str, Any]) -> StepGraphon:
        cells = data.get("cells", [])
        size = len(cells[0][0]) if cells and cells[0] else 0
        payload = self._with_space(data, size)
        payload.setdefault("n", len(cells))
        return StepGraphon.model_validate(payload)

    def graph_from_dict(self, data: Dict[str, Any]) -> WeightedGraph:
        weights = data.get("weights", [])
        size = 1 + max((max(row) for row in weights if row), default=0)
        payload = self._with_space(data, size)
        payload.setdefault("n", len(weights))
        return WeightedGraph.model_validate(payload)

    def event_from_dict(self, data: Dict[str, Any]) -> EventSpec:
        payload = dict(data)
        if isinstance(payload.get("center"), dict):
            payload["center"] = self.graphon_from_dict(payload["center"])
        return EventSpec.model_validate(payload)

    def constraints_from_dict(self, data: Dict[str, Any]) -> ConstraintSet:
        return ConstraintSet.model_validate(data)

    def parse_as(self, file_path: str, kind: str) -> Document:
        """Parse a file that must hold the given document kind.

        Args:
            file_path: JSON file path
            kind: One of InputParser.KINDS

        Returns:
            The validated model
        """
        if kind not in self._builders:
            raise ValidationFailure(f"unknown document kind '{kind}'")
        data = self.load_json(file_path)
        detected = self.detect_kind(data)
        if detected != kind:
            raise ValidationFailure(f"{file_path} holds a {detected} document, expected {kind}")
        log.debug("parsing %s as %s", file_path, kind)
        return self._builders[kind](data)

    def parse(self, file_path: str) -> Document:
        """Parse an input file (auto-detect kind).

        Args:
            file_path: JSON file path

        Returns:
            Model matching the detected document kind
        """
        data = self.load_json(file_path)
        kind = self.detect_kind(data)
        log.debug("parsing %s as %s", file_path, kind)
        return self._builders[kind](data)

    def parse_config(self, file_path: str, **overrides: Any) -> GraphonConfig:
        """Engine constants from a JSON file, explicit overrides winning."""
        data = self.load_json(file_path)
        data.update({key: value for key, value in overrides.items() if value is not None})
        return GraphonConfig.from_env(**data)
