# emo/selection.py
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from emo.individuals import Individual, Population
from emo.pareto import crowding_distance, non_dominated_sort, spea2_fitness
from gp_core.exceptions import ConfigurationError, ContractViolation

logger = logging.getLogger(__name__)

SCHEME_NSGA2 = "nsga2"
SCHEME_SPEA2 = "spea2"
SCHEMES = (SCHEME_NSGA2, SCHEME_SPEA2)


def annotate(members: Sequence[Individual], scheme: str) -> list[list[int]]:
    """
    Deja listas las anotaciones que usa el torneo: rank + crowding por
    frente (y fitness SPEA2 si corresponde). Devuelve los frentes.
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    fronts = non_dominated_sort(members)
    for front in fronts:
        crowding_distance([members[i] for i in front])
    if scheme == SCHEME_SPEA2:
        spea2_fitness(members)
    return fronts


def _tournament_key(ind: Individual, scheme: str) -> tuple[float, float]:
    primary = ind.rank if scheme == SCHEME_NSGA2 else ind.spea2_fitness
    return (primary, -ind.crowding)


def tournament_select(
    pop: Population | Sequence[Individual],
    k: int = 7,
    scheme: str = SCHEME_NSGA2,
    rng: np.random.Generator | None = None,
) -> Individual:
    members = pop.members if isinstance(pop, Population) else list(pop)
    if not members:
        raise ContractViolation("tournament over an empty population")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    if k < 1:
        raise ConfigurationError("tournament size must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()

    drawn = rng.integers(len(members), size=k)
    best_key = None
    tied: list[int] = []
    for idx in drawn:
        idx = int(idx)
        key = _tournament_key(members[idx], scheme)
        if best_key is None or key < best_key:
            best_key, tied = key, [idx]
        elif key == best_key and idx not in tied:
            tied.append(idx)
    if len(tied) == 1:
        return members[tied[0]]
    return members[tied[int(rng.integers(len(tied)))]]


def truncate_by_crowding(front: Sequence[Individual], need: int) -> list[Individual]:
    # orden estable: a igual crowding gana el que llegó primero al merge
    return sorted(front, key=lambda ind: -ind.crowding)[:need]


def merge(parents: Population, offspring: Population) -> list[Individual]:
    if len(parents) == 0:
        raise ContractViolation("parent population is empty")
    if len(offspring) != len(parents):
        raise ContractViolation(
            f"offspring size {len(offspring)} differs from parent size {len(parents)}"
        )
    return list(parents.members) + list(offspring.members)


def environmental_selection_nsga2(parents: Population, offspring: Population) -> Population:
    """R_t = P_t ∪ Q_t; frentes completos mientras quepan, el último por crowding."""
    merged = merge(parents, offspring)
    pop_size = len(parents)
    fronts = non_dominated_sort(merged)

    chosen: list[Individual] = []
    for front in fronts:
        members = [merged[i] for i in front]
        crowding_distance(members)
        if len(chosen) + len(members) <= pop_size:
            chosen.extend(members)
        else:
            chosen.extend(truncate_by_crowding(members, pop_size - len(chosen)))
        if len(chosen) == pop_size:
            break
    return Population(chosen, generation=parents.generation + 1)
