# gp_core/trees.py
"""
Genotipo GP: árboles de expresión inmutables.

Terminales = features del dataset (x0, x1, ...). Funciones binarias
{add, sub, mul, div} donde div es la división protegida: devuelve el
numerador cuando el denominador es cero. La raíz tiene profundidad 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

import numpy as np

from gp_core.exceptions import ContractViolation

Path = tuple[int, ...]  # 0 = hijo izquierdo, 1 = hijo derecho


class Op(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


FUNCTION_SET = (Op.ADD, Op.SUB, Op.MUL, Op.DIV)


@dataclass(frozen=True)
class Terminal:
    feature: int
    size: int = field(default=1, init=False, repr=False, compare=False)
    depth: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.feature < 0:
            raise ContractViolation(f"feature index must be >= 0, got {self.feature}")


@dataclass(frozen=True)
class Function:
    op: Op
    left: "Node"
    right: "Node"
    size: int = field(init=False, repr=False, compare=False)
    depth: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        # cacheamos tamaño/profundidad: el árbol no cambia nunca
        object.__setattr__(self, "size", 1 + self.left.size + self.right.size)
        object.__setattr__(self, "depth", 1 + max(self.left.depth, self.right.depth))


Node = Union[Terminal, Function]
ProgramTree = Node


def node_count(tree: ProgramTree) -> int:
    return tree.size


def depth(tree: ProgramTree) -> int:
    return tree.depth


def max_feature(tree: ProgramTree) -> int:
    if isinstance(tree, Terminal):
        return tree.feature
    return max(max_feature(tree.left), max_feature(tree.right))


def iter_nodes(tree: ProgramTree, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    """Recorre en preorden devolviendo (path, nodo)."""
    yield path, tree
    if isinstance(tree, Function):
        yield from iter_nodes(tree.left, path + (0,))
        yield from iter_nodes(tree.right, path + (1,))


def subtree_at(tree: ProgramTree, path: Path) -> Node:
    node = tree
    for step in path:
        if not isinstance(node, Function):
            raise ContractViolation(f"path {path} goes below a leaf")
        node = node.right if step else node.left
    return node


def replace_at(tree: ProgramTree, path: Path, new: Node) -> ProgramTree:
    if not path:
        return new
    if not isinstance(tree, Function):
        raise ContractViolation(f"path {path} goes below a leaf")
    head, rest = path[0], path[1:]
    if head == 0:
        return Function(tree.op, replace_at(tree.left, rest, new), tree.right)
    return Function(tree.op, tree.left, replace_at(tree.right, rest, new))


# =========================
# Evaluación (semántica)
# =========================

def _eval(node: Node, X: np.ndarray) -> np.ndarray:
    if isinstance(node, Terminal):
        return X[:, node.feature]
    a = _eval(node.left, X)
    b = _eval(node.right, X)
    if node.op is Op.ADD:
        return a + b
    if node.op is Op.SUB:
        return a - b
    if node.op is Op.MUL:
        return a * b
    # división protegida: a cuando b == 0
    return np.divide(a, b, out=np.array(a, dtype=np.float64, copy=True), where=(b != 0))


def evaluate(tree: ProgramTree, features: np.ndarray) -> np.ndarray:
    """
    Ejecuta el árbol sobre cada fila de `features` y devuelve el vector de
    salidas (longitud = número de filas). Nunca lanza por aritmética:
    overflow/NaN quedan en el vector.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ContractViolation(f"features must be a 2-D matrix, got shape {X.shape}")
    if max_feature(tree) >= X.shape[1]:
        raise ContractViolation(
            f"tree uses x{max_feature(tree)} but the matrix has {X.shape[1]} columns"
        )
    with np.errstate(all="ignore"):
        out = _eval(tree, X)
    return np.array(out, dtype=np.float64, copy=True)


# =========================
# Notación prefija
# =========================

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_TERMINAL_RE = re.compile(r"^x(\d+)$")


def to_prefix(tree: ProgramTree) -> str:
    if isinstance(tree, Terminal):
        return f"x{tree.feature}"
    return f"({tree.op.value} {to_prefix(tree.left)} {to_prefix(tree.right)})"


def parse_prefix(text: str) -> ProgramTree:
    tokens = _TOKEN_RE.findall(text or "")
    if not tokens:
        raise ContractViolation("empty program text")
    tree, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise ContractViolation(f"trailing tokens in program text: {' '.join(tokens[pos:])}")
    return tree


def _parse(tokens: list[str], pos: int) -> tuple[ProgramTree, int]:
    if pos >= len(tokens):
        raise ContractViolation("unexpected end of program text")
    tok = tokens[pos]
    if tok == "(":
        if pos + 1 >= len(tokens):
            raise ContractViolation("unexpected end of program text")
        try:
            op = Op(tokens[pos + 1])
        except ValueError:
            raise ContractViolation(f"unknown function {tokens[pos + 1]!r}")
        left, pos = _parse(tokens, pos + 2)
        right, pos = _parse(tokens, pos)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ContractViolation("missing ')' in program text")
        return Function(op, left, right), pos + 1
    m = _TERMINAL_RE.match(tok)
    if not m:
        raise ContractViolation(f"unknown terminal {tok!r}")
    return Terminal(int(m.group(1))), pos + 1
