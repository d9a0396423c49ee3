# emo/individuals.py
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, Optional, Sequence

import numpy as np

from gp_core.exceptions import ContractViolation
from gp_core.trees import ProgramTree

if TYPE_CHECKING:
    from datasets.classification import ConfusionMatrix


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # 0.7 -> 7/10, no la expansión binaria completa
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ObjectivePoint:
    """
    (TPR, TNR) exactos. La igualdad usa los racionales (conteos/conteos),
    nunca tolerancias de float. `confusion` viaja como dato, no compara.
    """

    tpr: Fraction
    tnr: Fraction
    confusion: Optional["ConfusionMatrix"] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tpr", _exact(self.tpr))
        object.__setattr__(self, "tnr", _exact(self.tnr))
        for name in ("tpr", "tnr"):
            v = getattr(self, name)
            if not (0 <= v <= 1):
                raise ContractViolation(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def from_confusion(cls, cm: "ConfusionMatrix") -> "ObjectivePoint":
        return cls(Fraction(cm.tp, cm.tp + cm.fn), Fraction(cm.tn, cm.tn + cm.fp), confusion=cm)

    def as_floats(self) -> tuple[float, float]:
        return float(self.tpr), float(self.tnr)


_uids = itertools.count(1)


@dataclass(eq=False)
class Individual:
    genotype: ProgramTree
    semantics: np.ndarray
    train_objectives: ObjectivePoint
    test_objectives: Optional[ObjectivePoint] = None

    # anotaciones por generación
    rank: int = 0
    crowding: float = 0.0
    spea2_fitness: float = 0.0
    semantic_distance: int = 0

    uid: int = field(default_factory=lambda: next(_uids))

    @property
    def size(self) -> int:
        return self.genotype.size


@dataclass
class Population:
    members: list[Individual]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Individual]:
        return iter(self.members)

    def __getitem__(self, i: int) -> Individual:
        return self.members[i]


def objective_matrix(individuals: Sequence[Individual]) -> np.ndarray:
    """Matriz (n, 2) de floats [TPR, TNR] sobre entrenamiento."""
    if not individuals:
        return np.empty((0, 2), dtype=np.float64)
    return np.array([ind.train_objectives.as_floats() for ind in individuals], dtype=np.float64)
