# semantics/distances.py
"""
Semántica de un programa = vector de salidas sobre los casos de fitness
(filas de entrenamiento). Distancias semánticas por conteo con umbrales
LBSS/UBSS y la distancia media absoluta que usa SSC.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from gp_core.exceptions import ConfigurationError, ContractViolation

if TYPE_CHECKING:
    from emo.individuals import Individual

SemanticsVector = np.ndarray  # float64, longitud l = filas de entrenamiento

UBSS_VALUES = (0.25, 0.5, 0.75, 1.0)
LBSS_VALUES = (None, 0.001, 0.01, 0.1)


@dataclass(frozen=True)
class SemanticThresholds:
    ubss: float
    lbss: Optional[float] = None

    def __post_init__(self):
        if not (self.ubss > 0 and math.isfinite(self.ubss)):
            raise ConfigurationError(f"ubss must be a finite real > 0, got {self.ubss}")
        if self.lbss is not None and not (0 <= self.lbss < self.ubss):
            raise ConfigurationError(f"need 0 <= lbss < ubss, got lbss={self.lbss} ubss={self.ubss}")

    @property
    def banded(self) -> bool:
        return self.lbss is not None

    @property
    def label(self) -> str:
        lb = "-" if self.lbss is None else f"{self.lbss:g}"
        return f"ubss={self.ubss:g},lbss={lb}"


def _pair(p: Sequence[float], v: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(p, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractViolation(f"semantics length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ContractViolation("semantics vectors must not be empty")
    return a, b


def semantic_distance_banded(p: SemanticsVector, v: SemanticsVector, t: SemanticThresholds) -> int:
    """Cuenta i con lbss <= |p_i - v_i| <= ubss (ambos extremos incluidos)."""
    if t.lbss is None:
        raise ContractViolation("banded distance needs lbss")
    a, b = _pair(p, v)
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
        return int(np.count_nonzero((diff >= t.lbss) & (diff <= t.ubss)))


def semantic_distance_upper(p: SemanticsVector, v: SemanticsVector, t: SemanticThresholds) -> int:
    """Cuenta i con |p_i - v_i| > ubss (estricto)."""
    a, b = _pair(p, v)
    with np.errstate(invalid="ignore"):
        return int(np.count_nonzero(np.abs(a - b) > t.ubss))


def semantic_distance(p: SemanticsVector, v: SemanticsVector, t: SemanticThresholds) -> int:
    # con lbss: banda; sin lbss: solo cota superior
    if t.banded:
        return semantic_distance_banded(p, v, t)
    return semantic_distance_upper(p, v, t)


def mean_abs_distance(p: SemanticsVector, q: SemanticsVector) -> float:
    a, b = _pair(p, q)
    with np.errstate(invalid="ignore", over="ignore"):
        return float(np.mean(np.abs(a - b)))


def select_pivot(first_front: Sequence["Individual"]) -> "Individual":
    """
    Pivote = miembro del primer frente con mayor crowding FINITO.
    Si todos son infinitos (frente de <= 2), el de mayor TPR.
    Empates: el primero en orden.
    """
    if not first_front:
        raise ContractViolation("cannot pick a pivot from an empty front")
    finite = [ind for ind in first_front if math.isfinite(ind.crowding)]
    if finite:
        return max(finite, key=lambda ind: ind.crowding)
    return max(first_front, key=lambda ind: ind.train_objectives.tpr)
