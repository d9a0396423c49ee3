# semantic_variants/services.py
"""
Mecanismos de diversidad semántica sobre el loop NSGA-II / SPEA2:

- SSC: crossover que se repite hasta que padres e hijos queden a una
  distancia semántica dentro del rango configurado.
- SCD: el frente que no cabe se completa por crowding sobre la distancia
  semántica al pivote (en vez de crowding en el espacio de objetivos).
- SDO: la distancia semántica al pivote es un tercer criterio a maximizar
  en el ordenamiento no dominado.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from emo.individuals import Individual, Population, objective_matrix
from emo.pareto import crowding_distance, crowding_from_matrix, fronts_from_matrix, non_dominated_sort
from emo.selection import SCHEMES, SCHEME_NSGA2, environmental_selection_nsga2, merge, truncate_by_crowding
from gp_core.exceptions import ConfigurationError, ContractViolation
from gp_core.operators import VariationParams, crossover_90_10
from gp_core.trees import ProgramTree, evaluate
from semantic_variants.tracing import trace_generation
from semantics.distances import SemanticThresholds, mean_abs_distance, select_pivot, semantic_distance

logger = logging.getLogger(__name__)

VARIANT_BASELINE = "baseline"
VARIANT_SSC = "ssc"
VARIANT_SCD = "scd"
VARIANT_SDO = "sdo"
VARIANTS = (VARIANT_BASELINE, VARIANT_SSC, VARIANT_SCD, VARIANT_SDO)
SEMANTIC_VARIANTS = (VARIANT_SSC, VARIANT_SCD, VARIANT_SDO)

SSC_MAX_TRIALS_DEFAULT = 20


@dataclass(frozen=True)
class VariantConfig:
    variant: str = VARIANT_BASELINE
    thresholds: Optional[SemanticThresholds] = None
    ssc_max_trials: int = SSC_MAX_TRIALS_DEFAULT
    base_scheme: str = SCHEME_NSGA2
    trace: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r} (expected one of {', '.join(VARIANTS)})")
        if self.base_scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.base_scheme!r}")
        if self.variant in SEMANTIC_VARIANTS and self.thresholds is None:
            raise ConfigurationError(f"variant {self.variant!r} needs semantic thresholds")
        if self.ssc_max_trials < 1:
            raise ConfigurationError("ssc_max_trials must be >= 1")
        # baseline: los umbrales no se usan
        if self.variant == VARIANT_BASELINE and self.thresholds is not None:
            object.__setattr__(self, "thresholds", None)

    @property
    def method_key(self) -> str:
        if self.variant == VARIANT_BASELINE:
            return self.base_scheme
        return f"{self.base_scheme}-{self.variant}"


# =========================
# SSC
# =========================

@dataclass(frozen=True)
class SscOutcome:
    children: tuple[ProgramTree, ProgramTree]
    semantics: tuple[np.ndarray, np.ndarray]
    attempts: int
    accepted: bool
    nodes_evaluated: int = field(default=0)


def ssc_accepts(distance: float, thresholds: SemanticThresholds) -> bool:
    # NaN nunca acepta
    if thresholds.banded:
        return thresholds.lbss <= distance <= thresholds.ubss
    return distance > thresholds.ubss


def ssc_crossover_outcome(
    parent_a: Individual,
    parent_b: Individual,
    cfg: VariantConfig,
    features: np.ndarray,
    rng: np.random.Generator,
    params: VariationParams | None = None,
) -> SscOutcome:
    if cfg.variant != VARIANT_SSC:
        raise ContractViolation(f"ssc_crossover called with variant {cfg.variant!r}")
    params = params or VariationParams()
    nodes = 0
    for attempt in range(1, cfg.ssc_max_trials + 1):
        child_a, child_b = crossover_90_10(parent_a.genotype, parent_b.genotype, params, rng)
        sem_a = evaluate(child_a, features)
        sem_b = evaluate(child_b, features)
        nodes += child_a.size + child_b.size
        accepted = ssc_accepts(mean_abs_distance(parent_a.semantics, sem_a), cfg.thresholds) and ssc_accepts(
            mean_abs_distance(parent_b.semantics, sem_b), cfg.thresholds
        )
        if accepted:
            break
    # sin aceptación: se queda el último intento
    return SscOutcome((child_a, child_b), (sem_a, sem_b), attempt, accepted, nodes)


def ssc_crossover(
    parent_a: Individual,
    parent_b: Individual,
    cfg: VariantConfig,
    features: np.ndarray,
    rng: np.random.Generator,
    params: VariationParams | None = None,
) -> tuple[ProgramTree, ProgramTree]:
    return ssc_crossover_outcome(parent_a, parent_b, cfg, features, rng, params).children


# =========================
# Selección ambiental
# =========================

def _distances_to(pivot: Individual, members: Sequence[Individual], thresholds: SemanticThresholds) -> np.ndarray:
    distances = np.empty(len(members), dtype=np.int64)
    for i, ind in enumerate(members):
        ind.semantic_distance = semantic_distance(ind.semantics, pivot.semantics, thresholds)
        distances[i] = ind.semantic_distance
    return distances


def _pivot(merged: list[Individual], fronts: list[list[int]]) -> Individual:
    first = [merged[i] for i in fronts[0]]
    crowding_distance(first)
    return select_pivot(first)


def environmental_selection_scd(parents: Population, offspring: Population, cfg: VariantConfig) -> Population:
    if cfg.variant != VARIANT_SCD:
        raise ContractViolation(f"SCD selection called with variant {cfg.variant!r}")
    merged = merge(parents, offspring)
    pop_size = len(parents)
    fronts = non_dominated_sort(merged)
    for front in fronts:
        crowding_distance([merged[i] for i in front])

    chosen: list[Individual] = []
    used = 0
    for front in fronts:
        if len(chosen) + len(front) > pop_size:
            break
        chosen.extend(merged[i] for i in front)
        used += 1
    if len(chosen) == pop_size:
        if cfg.trace:
            # sin frente parcial: histograma vacío
            pivot = select_pivot([merged[i] for i in fronts[0]])
            trace_generation(parents.generation, pivot.uid, cfg.variant, ())
        return Population(chosen, generation=parents.generation + 1)

    # F_r: todo lo que no entró
    rest_idx = [i for front in fronts[used:] for i in front]
    rest = [merged[i] for i in rest_idx]
    pivot = select_pivot([merged[i] for i in fronts[0]])
    distances = _distances_to(pivot, rest, cfg.thresholds)
    semantic_cd = crowding_from_matrix(distances.astype(np.float64))

    order = sorted(
        range(len(rest)),
        key=lambda j: (-semantic_cd[j], rest[j].rank, -rest[j].crowding, rest_idx[j]),
    )
    chosen.extend(rest[j] for j in order[: pop_size - len(chosen)])

    if cfg.trace:
        trace_generation(parents.generation, pivot.uid, cfg.variant, distances)
    return Population(chosen, generation=parents.generation + 1)


def environmental_selection_sdo(parents: Population, offspring: Population, cfg: VariantConfig) -> Population:
    if cfg.variant != VARIANT_SDO:
        raise ContractViolation(f"SDO selection called with variant {cfg.variant!r}")
    merged = merge(parents, offspring)
    pop_size = len(parents)
    pivot = _pivot(merged, non_dominated_sort(merged))
    distances = _distances_to(pivot, merged, cfg.thresholds)

    criteria = np.column_stack([objective_matrix(merged), distances.astype(np.float64)])
    chosen: list[Individual] = []
    for front in fronts_from_matrix(criteria):
        if len(chosen) + len(front) <= pop_size:
            chosen.extend(merged[i] for i in front)
        else:
            cd = crowding_from_matrix(criteria[front])
            members = [merged[i] for i in front]
            for ind, value in zip(members, cd):
                ind.crowding = float(value)
            chosen.extend(truncate_by_crowding(members, pop_size - len(chosen)))
        if len(chosen) == pop_size:
            break

    if cfg.trace:
        trace_generation(parents.generation, pivot.uid, cfg.variant, distances)
    return Population(chosen, generation=parents.generation + 1)


def environmental_selection(parents: Population, offspring: Population, cfg: VariantConfig) -> Population:
    if cfg.variant == VARIANT_SCD:
        return environmental_selection_scd(parents, offspring, cfg)
    if cfg.variant == VARIANT_SDO:
        return environmental_selection_sdo(parents, offspring, cfg)
    # baseline y SSC comparten la selección canónica
    return environmental_selection_nsga2(parents, offspring)
