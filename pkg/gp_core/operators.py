# gp_core/operators.py
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gp_core.exceptions import ConfigurationError
from gp_core.trees import FUNCTION_SET, Function, Node, Path, ProgramTree, Terminal, iter_nodes, replace_at, subtree_at

# Probabilidad de elegir función (vs hoja) bajo la profundidad objetivo en "grow".
GROW_FUNCTION_PROB = 0.5

METHOD_FULL = "full"
METHOD_GROW = "grow"


@dataclass(frozen=True)
class VariationParams:
    crossover_rate: float = 0.60
    mutation_rate: float = 0.40
    internal_node_bias: float = 0.90
    tournament_size: int = 7
    max_length: int = 800
    max_depth: int = 8
    mutation_max_depth: int = 5

    def __post_init__(self):
        if not (0.0 <= self.crossover_rate <= 1.0 and 0.0 <= self.mutation_rate <= 1.0):
            raise ConfigurationError("crossover_rate and mutation_rate must be probabilities")
        # operadores mutuamente excluyentes por hijo
        if not math.isclose(self.crossover_rate + self.mutation_rate, 1.0, abs_tol=1e-9):
            raise ConfigurationError(
                f"crossover_rate + mutation_rate must be 1 (got {self.crossover_rate} + {self.mutation_rate})"
            )
        if not (0.0 < self.internal_node_bias < 1.0):
            raise ConfigurationError("internal_node_bias must lie strictly between 0 and 1")
        if self.tournament_size < 1:
            raise ConfigurationError("tournament_size must be >= 1")
        if self.max_length < 1 or self.max_depth < 0 or self.mutation_max_depth < 0:
            raise ConfigurationError("size limits must be non-negative (max_length >= 1)")

    def fits(self, tree: ProgramTree) -> bool:
        return tree.size <= self.max_length and tree.depth <= self.max_depth


# =========================
# Construcción
# =========================

def _random_terminal(n_features: int, rng: np.random.Generator) -> Terminal:
    return Terminal(int(rng.integers(n_features)))


def random_tree(
    max_depth: int,
    n_features: int,
    rng: np.random.Generator,
    *,
    method: str = METHOD_GROW,
    root_is_function: bool = False,
) -> ProgramTree:
    """
    full: todas las hojas a profundidad max_depth.
    grow: bajo max_depth elige función con prob. GROW_FUNCTION_PROB.
    """
    if n_features <= 0:
        raise ConfigurationError("n_features must be > 0")
    if max_depth <= 0:
        return _random_terminal(n_features, rng)
    if method == METHOD_FULL or root_is_function or rng.random() < GROW_FUNCTION_PROB:
        op = FUNCTION_SET[int(rng.integers(len(FUNCTION_SET)))]
        left = random_tree(max_depth - 1, n_features, rng, method=method)
        right = random_tree(max_depth - 1, n_features, rng, method=method)
        return Function(op, left, right)
    return _random_terminal(n_features, rng)


def ramp_schedule(pop_size: int, init_min_depth: int, init_max_depth: int) -> list[tuple[int, str]]:
    """(profundidad objetivo, método) para cada individuo, alternando full/grow por nivel."""
    levels = list(range(init_min_depth, init_max_depth + 1))
    schedule = []
    for i in range(pop_size):
        d = levels[i % len(levels)]
        method = METHOD_FULL if (i // len(levels)) % 2 == 0 else METHOD_GROW
        schedule.append((d, method))
    return schedule


def ramped_half_and_half(
    pop_size: int,
    init_min_depth: int,
    init_max_depth: int,
    n_features: int,
    rng: np.random.Generator,
) -> list[ProgramTree]:
    if n_features <= 0:
        raise ConfigurationError("n_features must be > 0 (no terminals to build trees from)")
    if pop_size <= 0:
        raise ConfigurationError("pop_size must be > 0")
    if not (1 <= init_min_depth <= init_max_depth):
        raise ConfigurationError(
            f"need 1 <= init_min_depth <= init_max_depth, got {init_min_depth}..{init_max_depth}"
        )
    # raíz siempre función: profundidad >= 1 también en grow
    return [
        random_tree(d, n_features, rng, method=method, root_is_function=True)
        for d, method in ramp_schedule(pop_size, init_min_depth, init_max_depth)
    ]


# =========================
# Variación
# =========================

def pick_crossover_point(tree: ProgramTree, internal_node_bias: float, rng: np.random.Generator) -> Path:
    internal: list[Path] = []
    leaves: list[Path] = []
    for path, node in iter_nodes(tree):
        (internal if isinstance(node, Function) else leaves).append(path)
    # sin nodos internos => hoja
    if internal and rng.random() < internal_node_bias:
        return internal[int(rng.integers(len(internal)))]
    return leaves[int(rng.integers(len(leaves)))]


def crossover_90_10(
    parent_a: ProgramTree,
    parent_b: ProgramTree,
    params: VariationParams,
    rng: np.random.Generator,
) -> tuple[ProgramTree, ProgramTree]:
    point_a = pick_crossover_point(parent_a, params.internal_node_bias, rng)
    point_b = pick_crossover_point(parent_b, params.internal_node_bias, rng)
    sub_a = subtree_at(parent_a, point_a)
    sub_b = subtree_at(parent_b, point_b)

    child_a = replace_at(parent_a, point_a, sub_b)
    child_b = replace_at(parent_b, point_b, sub_a)

    # fuera de límites => se queda el padre (sin reintentos)
    if not params.fits(child_a):
        child_a = parent_a
    if not params.fits(child_b):
        child_b = parent_b
    return child_a, child_b


def subtree_mutation(
    parent: ProgramTree,
    params: VariationParams,
    rng: np.random.Generator,
    *,
    n_features: int,
) -> ProgramTree:
    nodes = list(iter_nodes(parent))
    path, _ = nodes[int(rng.integers(len(nodes)))]
    room = max(0, params.max_depth - len(path))
    replacement: Node = random_tree(min(params.mutation_max_depth, room), n_features, rng, method=METHOD_GROW)
    child = replace_at(parent, path, replacement)
    if not params.fits(child):
        return parent
    return child
