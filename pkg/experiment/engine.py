# experiment/engine.py
"""
Loop generacional de una corrida:

    init (ramped half-and-half) -> [cría -> selección ambiental -> anotar] x G
    -> evaluar el archivo final en TEST -> frente no dominado -> RunResult

El test solo se toca al final; la selección usa train_objectives.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from django.conf import settings

from datasets.catalog import DATASETS
from datasets.classification import objectives_from_outputs
from datasets.services import Dataset, SplitDataset, canonical_path, load_canonical, stratified_split
from emo.individuals import Individual, Population
from emo.selection import annotate, tournament_select
from experiment.config import HV_RECTANGLE, ExperimentConfig
from gp_core.exceptions import ConfigurationError
from gp_core.operators import crossover_90_10, ramped_half_and_half, subtree_mutation
from gp_core.trees import ProgramTree, evaluate
from metrics.indicators import FrontSet, hyperarea, hypervolume_rect
from metrics.results import RunResult
from semantic_variants.services import VARIANT_SSC, VariantConfig, environmental_selection, ssc_crossover_outcome

logger = logging.getLogger(__name__)


@dataclass
class RunStats:
    per_generation_sizes: list[float] = field(default_factory=list)
    nodes_evaluated: int = 0


# =========================
# Datos
# =========================

@lru_cache(maxsize=8)
def _load_dataset(path: str, name: str) -> Dataset:
    return load_canonical(path, name)


def dataset_for(cfg: ExperimentConfig) -> Dataset:
    path = cfg.dataset_path or canonical_path(cfg.dataset)
    ds = _load_dataset(str(Path(path)), cfg.dataset)
    spec = DATASETS.get(cfg.dataset)
    if spec is not None and ds.feature_count != spec.n_features:
        raise ConfigurationError(
            f"{cfg.dataset}: file {path} has {ds.feature_count} features, catalogue says {spec.n_features}"
        )
    return ds


def split_for(cfg: ExperimentConfig, run_index: int) -> SplitDataset:
    return stratified_split(dataset_for(cfg), cfg.split_seed_for(run_index))


# =========================
# Evaluación y cría
# =========================

def _individual(tree: ProgramTree, semantics: np.ndarray, train: Dataset) -> Individual:
    point, _ = objectives_from_outputs(semantics, train.labels)
    return Individual(genotype=tree, semantics=semantics, train_objectives=point)


def _evaluate(tree: ProgramTree, train: Dataset, stats: RunStats) -> Individual:
    stats.nodes_evaluated += tree.size
    return _individual(tree, evaluate(tree, train.features), train)


def _mean_size(pop: Population) -> float:
    return float(np.mean([ind.size for ind in pop]))


def breed(
    archive: Population,
    cfg: ExperimentConfig,
    vcfg: VariantConfig,
    train: Dataset,
    rng: np.random.Generator,
    stats: RunStats,
) -> Population:
    """
    pop_size hijos: crossover (dos torneos, dos hijos) con prob. crossover_rate,
    si no mutación de subárbol. El segundo hijo se descarta si no hay lugar.
    """
    params = cfg.variation
    k = params.tournament_size
    children: list[Individual] = []
    while len(children) < cfg.pop_size:
        if rng.random() < params.crossover_rate:
            a = tournament_select(archive, k, cfg.scheme, rng)
            b = tournament_select(archive, k, cfg.scheme, rng)
            room = cfg.pop_size - len(children)
            if vcfg.variant == VARIANT_SSC:
                outcome = ssc_crossover_outcome(a, b, vcfg, train.features, rng, params)
                stats.nodes_evaluated += outcome.nodes_evaluated
                pairs = list(zip(outcome.children, outcome.semantics))[:room]
                children.extend(_individual(tree, sem, train) for tree, sem in pairs)
            else:
                trees = crossover_90_10(a.genotype, b.genotype, params, rng)
                children.extend(_evaluate(tree, train, stats) for tree in trees[:room])
        else:
            parent = tournament_select(archive, k, cfg.scheme, rng)
            child = subtree_mutation(parent.genotype, params, rng, n_features=train.feature_count)
            children.append(_evaluate(child, train, stats))
    return Population(children, generation=archive.generation)


def initial_population(cfg: ExperimentConfig, train: Dataset, rng: np.random.Generator, stats: RunStats) -> Population:
    trees = ramped_half_and_half(cfg.pop_size, cfg.init_min_depth, cfg.init_max_depth, train.feature_count, rng)
    return Population([_evaluate(tree, train, stats) for tree in trees], generation=0)


def evolve(
    cfg: ExperimentConfig,
    split: SplitDataset,
    seed: int,
    *,
    trace: bool = False,
) -> tuple[Population, RunStats]:
    """Evoluciona sobre split.train; split.test no se lee."""
    rng = np.random.default_rng(seed)
    vcfg = cfg.variant_config(trace=trace)
    stats = RunStats()
    train = split.train

    archive = initial_population(cfg, train, rng, stats)
    annotate(archive.members, cfg.scheme)
    stats.per_generation_sizes.append(_mean_size(archive))

    for _ in range(cfg.generations):
        offspring = breed(archive, cfg, vcfg, train, rng, stats)
        archive = environmental_selection(archive, offspring, vcfg)
        # anotaciones de torneo sobre el archivo nuevo (2 objetivos)
        fronts = annotate(archive.members, cfg.scheme)
        stats.per_generation_sizes.append(_mean_size(archive))
        logger.debug(
            "gen=%d mean_size=%.2f front0=%d",
            archive.generation, stats.per_generation_sizes[-1], len(fronts[0]),
        )
    return archive, stats


# =========================
# Resultado
# =========================

def final_front(archive: Population, test: Dataset) -> FrontSet:
    """Evalúa el archivo final en test y devuelve su subconjunto no dominado."""
    for ind in archive:
        point, _ = objectives_from_outputs(evaluate(ind.genotype, test.features), test.labels)
        ind.test_objectives = point
    return FrontSet.from_points(ind.test_objectives for ind in archive)


def summarize(
    cfg: ExperimentConfig,
    run_index: int,
    seed: int,
    archive: Population,
    stats: RunStats,
    test: Dataset,
) -> RunResult:
    front = final_front(archive, test)
    area = hyperarea(front)
    rect = hypervolume_rect(front)
    thresholds = cfg.thresholds
    return RunResult(
        run_id=cfg.run_id(run_index),
        run_index=run_index,
        seed=seed,
        dataset=cfg.dataset,
        scheme=cfg.scheme,
        variant=cfg.variant,
        ubss=None if thresholds is None else thresholds.ubss,
        lbss=None if thresholds is None else thresholds.lbss,
        front=tuple(p.confusion for p in front),
        hyperarea=area,
        hypervolume_rect=rect,
        hypervolume=rect if cfg.hypervolume_kind == HV_RECTANGLE else area,
        mean_tree_size=float(np.mean(stats.per_generation_sizes)),
        per_generation_sizes=tuple(stats.per_generation_sizes),
        nodes_evaluated=stats.nodes_evaluated,
        best_accuracy=float(max(p.confusion.accuracy for p in front)),
        config=cfg.as_dict(),
    )


def run_one(cfg: ExperimentConfig, run_index: int, *, trace: Optional[bool] = None) -> RunResult:
    if not (0 <= run_index < cfg.runs):
        raise ConfigurationError(f"run_index {run_index} outside 0..{cfg.runs - 1}")
    if trace is None:
        trace = settings.MOGP_TRACE_SEMANTICS

    # errores de datos/config antes de evolucionar
    split = split_for(cfg, run_index)
    seed = cfg.seed_for(run_index)
    run_id = cfg.run_id(run_index)
    logger.info("run %s: start seed=%d train=%d test=%d", run_id, seed, len(split.train), len(split.test))

    archive, stats = evolve(cfg, split, seed, trace=trace)
    result = summarize(cfg, run_index, seed, archive, stats, split.test)
    logger.info(
        "run %s: done hyperarea=%.4f front=%d mean_size=%.2f",
        run_id, result.hyperarea, len(result.front), result.mean_tree_size,
    )
    return result
