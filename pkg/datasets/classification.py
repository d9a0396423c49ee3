# datasets/classification.py
"""
Regla de decisión del clasificador GP y matriz de confusión.

Un ejemplo va a la clase minoritaria (positiva) si la salida del programa
es >= 0. NaN nunca es >= 0, así que cae en la negativa.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from emo.individuals import ObjectivePoint
from gp_core.exceptions import ContractViolation
from gp_core.trees import ProgramTree, evaluate

if TYPE_CHECKING:
    from datasets.services import Dataset


class Label(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ContractViolation(f"confusion counts must be non-negative: {self}")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def total(self) -> int:
        return self.positives + self.negatives

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.tp + self.tn, self.total)

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


def classify(output: float) -> Label:
    return Label.POSITIVE if output >= 0 else Label.NEGATIVE


def predict(outputs: np.ndarray) -> np.ndarray:
    """Versión vectorizada de classify: True = positivo."""
    with np.errstate(invalid="ignore"):
        return np.asarray(outputs, dtype=np.float64) >= 0


def confusion_from_outputs(outputs: np.ndarray, labels: np.ndarray) -> ConfusionMatrix:
    predicted = predict(outputs)
    actual = np.asarray(labels, dtype=bool)
    if predicted.shape != actual.shape:
        raise ContractViolation(f"outputs {predicted.shape} and labels {actual.shape} differ in shape")
    tp = int(np.count_nonzero(predicted & actual))
    fn = int(np.count_nonzero(~predicted & actual))
    fp = int(np.count_nonzero(predicted & ~actual))
    tn = int(np.count_nonzero(~predicted & ~actual))
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)


def objectives_from_outputs(outputs: np.ndarray, labels: np.ndarray) -> tuple[ObjectivePoint, ConfusionMatrix]:
    cm = confusion_from_outputs(outputs, labels)
    if cm.positives == 0 or cm.negatives == 0:
        raise ContractViolation("both classes must be present to compute TPR and TNR")
    return ObjectivePoint.from_confusion(cm), cm


def objectives(tree: ProgramTree, ds: "Dataset") -> tuple[ObjectivePoint, ConfusionMatrix]:
    return objectives_from_outputs(evaluate(tree, ds.features), ds.labels)
