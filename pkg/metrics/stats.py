# metrics/stats.py
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.stats import mannwhitneyu, rankdata

from gp_core.exceptions import ContractViolation

if TYPE_CHECKING:
    from metrics.results import RunResult

VERDICT_BETTER = "better"
VERDICT_WORSE = "worse"
VERDICT_EQUAL = "equal"

VERDICT_SYMBOLS = {VERDICT_BETTER: "+", VERDICT_WORSE: "-", VERDICT_EQUAL: "="}

# hasta este tamaño de la muestra menor la p es exacta
EXACT_MAX_SIZE = 10


@dataclass(frozen=True)
class RankSumResult:
    p_value: float
    verdict: str
    statistic: float  # W de x (suma de rangos)
    method: str

    @property
    def symbol(self) -> str:
        return VERDICT_SYMBOLS[self.verdict]


def wilcoxon_rank_sum(x: Sequence[float], y: Sequence[float], alpha: float = 0.05) -> RankSumResult:
    """
    Rank-sum de dos colas. "better" = x significativamente mayor que y
    (en media), "worse" al revés, "equal" si p >= alpha.

    Con min(n, m) <= EXACT_MAX_SIZE la p es exacta: sin empates la de scipy,
    con empates se enumera la distribución de la suma de rangos medios.
    Por encima, normal con varianza corregida por empates y continuidad.
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ContractViolation(f"rank-sum test needs at least 2 values per sample, got {a.size} and {b.size}")
    n = a.size

    both = np.concatenate([a, b])
    if np.all(both == both[0]):
        return RankSumResult(1.0, VERDICT_EQUAL, n * (n + 1) / 2 + n * b.size / 2, "degenerate")

    statistic = float(rankdata(both)[:n].sum())
    has_ties = np.unique(both).size < both.size
    if min(a.size, b.size) > EXACT_MAX_SIZE:
        method = "asymptotic"
        p = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    elif has_ties:
        method = "exact-ties"
        p = _exact_tied_pvalue(a, b)
    else:
        method = "exact"
        p = mannwhitneyu(a, b, alternative="two-sided", method="exact").pvalue

    p = float(min(1.0, p))
    if p >= alpha:
        verdict = VERDICT_EQUAL
    else:
        verdict = _direction(a, b)
    return RankSumResult(p, verdict, statistic, method)


def _exact_tied_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """
    P(|S - E[S]| >= |s_obs - E[S]|) sobre todos los subconjuntos de tamaño k
    de la muestra conjunta, S = suma de rangos medios de la muestra menor.
    Se cuenta en rangos doblados (enteros) por tamaño y suma.
    """
    small, other = (a, b) if a.size <= b.size else (b, a)
    k = small.size
    doubled = np.rint(2 * rankdata(np.concatenate([small, other]))).astype(np.int64)
    top = int(doubled.sum())

    counts = np.zeros((k + 1, top + 1))
    counts[0, 0] = 1.0
    for r in doubled:
        counts[1:, r:] += counts[:-1, : top + 1 - r].copy()

    center = k * (doubled.size + 1)
    observed = int(doubled[:k].sum())
    extreme = np.abs(np.arange(top + 1) - center) >= abs(observed - center)
    return float(counts[k, extreme].sum() / counts[k].sum())



def _direction(a: np.ndarray, b: np.ndarray) -> str:
    for stat in (np.mean, np.median):
        da, db = stat(a), stat(b)
        if da > db:
            return VERDICT_BETTER
        if da < db:
            return VERDICT_WORSE
    return VERDICT_EQUAL


# =========================
# Tamaño de árboles
# =========================

@dataclass(frozen=True)
class SizeSummary:
    per_run_means: tuple[float, ...]
    mean: float
    q1: float
    median: float
    q3: float
    minimum: float
    maximum: float
    nodes_evaluated_mean: float

    def as_row(self) -> dict[str, float]:
        return {
            "runs": len(self.per_run_means),
            "mean": self.mean,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "min": self.minimum,
            "max": self.maximum,
            "nodes_evaluated_mean": self.nodes_evaluated_mean,
        }


def size_statistics(results: Sequence["RunResult"]) -> SizeSummary:
    """Media de nodos por corrida y cuartiles entre corridas (datos de box-plot)."""
    if not results:
        raise ContractViolation("size statistics need at least one run")
    means = np.array([r.mean_tree_size for r in results], dtype=np.float64)
    q1, median, q3 = np.percentile(means, [25, 50, 75])
    return SizeSummary(
        per_run_means=tuple(float(m) for m in means),
        mean=float(means.mean()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        minimum=float(means.min()),
        maximum=float(means.max()),
        nodes_evaluated_mean=float(np.mean([r.nodes_evaluated for r in results])),
    )
