# metrics/indicators.py
"""
Indicadores sobre frentes (TPR, TNR):

- hyperarea: suma de trapecios bajo el frente, cerrando contra los ejes
  con (0, tnr_primero) y (tpr_último, 0). Es la medida que se reporta.
- hypervolume_rect: hipervolumen rectangular estándar con referencia (0, 0),
  calculado con pymoo como verificación cruzada.
- frente PO acumulado y conteo de soluciones únicas entre dos métodos.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from pymoo.indicators.hv import HV

from emo.individuals import ObjectivePoint
from gp_core.exceptions import ContractViolation


def non_dominated_points(points: Iterable[ObjectivePoint]) -> list[ObjectivePoint]:
    """Filtro exacto (racionales) en O(n log n); sin duplicados, orden TPR ascendente."""
    unique = {(p.tpr, p.tnr): p for p in points}
    kept: list[ObjectivePoint] = []
    best_tnr = Fraction(-1)
    for key in sorted(unique, key=lambda k: (-k[0], -k[1])):
        if key[1] > best_tnr:
            kept.append(unique[key])
            best_tnr = key[1]
    kept.reverse()
    return kept


@dataclass(frozen=True)
class FrontSet:
    points: tuple[ObjectivePoint, ...]

    @classmethod
    def from_points(cls, points: Iterable[ObjectivePoint]) -> "FrontSet":
        return cls(tuple(non_dominated_points(points)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def keys(self) -> set[tuple[Fraction, Fraction]]:
        return {(p.tpr, p.tnr) for p in self.points}

    def as_floats(self) -> list[tuple[float, float]]:
        return [p.as_floats() for p in self.points]


def _as_points(front: FrontSet | Iterable[ObjectivePoint]) -> list[ObjectivePoint]:
    return list(front.points) if isinstance(front, FrontSet) else list(front)


def hyperarea(front: FrontSet | Iterable[ObjectivePoint]) -> float:
    points = non_dominated_points(_as_points(front))
    if not points:
        raise ContractViolation("hyperarea of an empty front")
    xs = [Fraction(0)] + [p.tpr for p in points] + [points[-1].tpr]
    ys = [points[0].tnr] + [p.tnr for p in points] + [Fraction(0)]
    area = sum(
        (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2
        for i in range(len(xs) - 1)
    )
    return float(area)


def hypervolume_rect(front: FrontSet | Iterable[ObjectivePoint]) -> float:
    points = _as_points(front)
    if not points:
        raise ContractViolation("hypervolume of an empty front")
    # pymoo minimiza: (1 - TPR, 1 - TNR) contra la referencia (1, 1)
    F = 1.0 - np.array([p.as_floats() for p in points], dtype=np.float64)
    F = F[(F < 1.0).all(axis=1)]
    if F.shape[0] == 0:
        return 0.0
    value = float(HV(ref_point=np.array([1.0, 1.0]))(F))
    return min(1.0, max(0.0, value))


def accumulate_po_front(fronts: Sequence[FrontSet]) -> FrontSet:
    if not fronts:
        raise ContractViolation("cannot accumulate an empty list of fronts")
    return FrontSet.from_points(p for front in fronts for p in front)


# =========================
# Soluciones únicas
# =========================

def pool(fronts: Iterable[FrontSet]) -> set[tuple[Fraction, Fraction]]:
    keys: set[tuple[Fraction, Fraction]] = set()
    for front in fronts:
        keys |= front.keys()
    return keys


@dataclass(frozen=True)
class UniqueSolutions:
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float
    pooled_a: int
    pooled_b: int

    @property
    def ratio(self) -> float:
        return self.mean_a / self.mean_b if self.mean_b else float("inf")


def _mean_sd(values: list[int]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def unique_solutions(a: Sequence[FrontSet], b: Sequence[FrontSet]) -> UniqueSolutions:
    """
    Por corrida de A: cuántos puntos suyos no aparecen en NINGUNA corrida de B
    (y simétrico). Se reporta media ± sd entre corridas, más los conteos
    sobre los pools completos.
    """
    if len(a) != len(b):
        raise ContractViolation(f"unique_solutions needs equal run counts, got {len(a)} and {len(b)}")
    if not a:
        raise ContractViolation("unique_solutions needs at least one run per method")
    pool_a, pool_b = pool(a), pool(b)
    per_run_a = [len(front.keys() - pool_b) for front in a]
    per_run_b = [len(front.keys() - pool_a) for front in b]
    mean_a, sd_a = _mean_sd(per_run_a)
    mean_b, sd_b = _mean_sd(per_run_b)
    return UniqueSolutions(mean_a, sd_a, mean_b, sd_b, len(pool_a - pool_b), len(pool_b - pool_a))


def exclusive_points(a: Sequence[FrontSet], b: Sequence[FrontSet]) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Puntos que solo encontró A / solo encontró B (para graficar)."""
    pool_a, pool_b = pool(a), pool(b)
    only_a = sorted((float(x), float(y)) for x, y in pool_a - pool_b)
    only_b = sorted((float(x), float(y)) for x, y in pool_b - pool_a)
    return only_a, only_b
