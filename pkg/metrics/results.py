# metrics/results.py
"""
Resultado de una corrida, serializado como UNA línea JSON.

El frente se guarda como conteos de la matriz de confusión (enteros), así
la igualdad de puntos sigue siendo exacta al releer. No se guardan tiempos:
dos ejecuciones de la misma corrida producen el mismo archivo.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from datasets.classification import ConfusionMatrix
from emo.individuals import ObjectivePoint
from gp_core.exceptions import ContractViolation, ParseError
from metrics.indicators import FrontSet

FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunResult:
    run_id: str
    run_index: int
    seed: int
    dataset: str
    scheme: str
    variant: str
    ubss: Optional[float]
    lbss: Optional[float]
    front: tuple[ConfusionMatrix, ...]
    hyperarea: float
    hypervolume_rect: float
    hypervolume: float
    mean_tree_size: float
    per_generation_sizes: tuple[float, ...]
    nodes_evaluated: int
    best_accuracy: float
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("hyperarea", "hypervolume_rect", "hypervolume"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ContractViolation(f"{name} must lie in [0, 1], got {value}")

    @property
    def method(self) -> str:
        return self.scheme if self.variant == "baseline" else f"{self.scheme}-{self.variant}"

    @property
    def thresholds_label(self) -> str:
        if self.ubss is None:
            return "-"
        lb = "-" if self.lbss is None else f"{self.lbss:g}"
        return f"ubss={self.ubss:g},lbss={lb}"

    def front_set(self) -> FrontSet:
        return FrontSet.from_points(ObjectivePoint.from_confusion(cm) for cm in self.front)

    def to_json_line(self) -> str:
        payload = asdict(self)
        payload["front"] = [cm.as_dict() for cm in self.front]
        payload["per_generation_sizes"] = list(self.per_generation_sizes)
        payload["format"] = FORMAT_VERSION
        return json.dumps(payload, sort_keys=True) + "\n"

    @classmethod
    def from_json_line(cls, line: str) -> "RunResult":
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid result line: {e.msg}", e.lineno) from e
        if payload.pop("format", None) != FORMAT_VERSION:
            raise ParseError("unsupported result format")
        try:
            payload["front"] = tuple(ConfusionMatrix(**cm) for cm in payload["front"])
            payload["per_generation_sizes"] = tuple(float(v) for v in payload["per_generation_sizes"])
            return cls(**payload)
        except (KeyError, TypeError) as e:
            raise ParseError(f"malformed result record: {e}") from e


def write_result(result: RunResult, path: Path | str) -> Path:
    """Escritura atómica: temporal + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".{os.getpid()}.tmp")
    tmp.write_text(result.to_json_line(), encoding="utf-8")
    os.replace(tmp, path)
    return path


def read_result(path: Path | str) -> RunResult:
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text or "\n" in text:
        raise ParseError(f"{path}: a result file holds exactly one JSON line")
    return RunResult.from_json_line(text)
