# emo/pareto.py
"""
Dominancia de Pareto (maximización), ordenamiento no dominado, crowding
distance (forma normalizada por rango) y fitness de SPEA2.

Las funciones *_matrix trabajan sobre matrices (n, m) de criterios y sirven
igual para 2 objetivos (TPR, TNR) que para 3 (SDO agrega la distancia
semántica).
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from emo.individuals import Individual, ObjectivePoint, objective_matrix
from gp_core.exceptions import ContractViolation


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    ge = a.tpr >= b.tpr and a.tnr >= b.tnr
    gt = a.tpr > b.tpr or a.tnr > b.tnr
    return ge and gt


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """D[i, j] = True si la fila i domina a la fila j."""
    F = np.asarray(F, dtype=np.float64)
    ge = (F[:, None, :] >= F[None, :, :]).all(axis=2)
    gt = (F[:, None, :] > F[None, :, :]).any(axis=2)
    return ge & gt


def fronts_from_matrix(F: np.ndarray) -> list[list[int]]:
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    if n == 0:
        return []
    D = dominance_matrix(F)
    dominators = D.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    fronts: list[list[int]] = []
    while remaining.any():
        current = np.flatnonzero(remaining & (dominators == 0))
        fronts.append(current.tolist())
        remaining[current] = False
        dominators = dominators - D[current].sum(axis=0)
    return fronts


def non_dominated_sort(pop: Sequence[Individual]) -> list[list[int]]:
    """Particiona índices en frentes F0, F1, ... y asigna Individual.rank."""
    if not pop:
        raise ContractViolation("cannot sort an empty population")
    fronts = fronts_from_matrix(objective_matrix(pop))
    for rank, front in enumerate(fronts):
        for i in front:
            pop[i].rank = rank
    return fronts


def crowding_from_matrix(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    n, m = F.shape
    if n <= 2:
        return np.full(n, math.inf)
    cd = np.zeros(n, dtype=np.float64)
    for k in range(m):
        col = F[:, k]
        lo, hi = col.min(), col.max()
        # objetivo constante: no aporta (ni siquiera en los extremos)
        if hi == lo:
            continue
        order = np.argsort(col, kind="stable")
        cd[order[0]] = math.inf
        cd[order[-1]] = math.inf
        cd[order[1:-1]] += (col[order[2:]] - col[order[:-2]]) / (hi - lo)
    return cd


def crowding_distance(front: Sequence[Individual]) -> np.ndarray:
    if not front:
        raise ContractViolation("cannot compute crowding of an empty front")
    cd = crowding_from_matrix(objective_matrix(front))
    for ind, value in zip(front, cd):
        ind.crowding = float(value)
    return cd


def spea2_strengths(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(strength D, fitness) sobre una matriz de criterios."""
    D = dominance_matrix(F)
    strength = D.sum(axis=1)
    fitness = strength @ D.astype(np.int64)  # suma de strengths de quienes me dominan
    return strength, fitness.astype(np.float64)


def spea2_fitness(pop: Sequence[Individual]) -> np.ndarray:
    if not pop:
        raise ContractViolation("cannot compute SPEA2 fitness of an empty population")
    _, fitness = spea2_strengths(objective_matrix(pop))
    for ind, value in zip(pop, fitness):
        ind.spea2_fitness = float(value)
    return fitness
