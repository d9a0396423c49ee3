# experiment/reporting.py
"""
Tablas de comparación entre métodos a partir de un manifest de campaña.

Una "celda" es (dataset, método, umbrales). Un método con umbrales se
compara contra la celda del otro método con los mismos umbrales; si el
otro es un baseline (sin umbrales) se usa su única celda.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from experiment.campaign import STATUS_OK, CampaignManifest, load_manifest
from gp_core.exceptions import ParseError, ReportError
from metrics.indicators import FrontSet, accumulate_po_front, exclusive_points, hyperarea, unique_solutions
from metrics.results import RunResult, read_result
from metrics.stats import VERDICT_BETTER, size_statistics, wilcoxon_rank_sum

logger = logging.getLogger(__name__)

NO_THRESHOLDS = "-"
AVERAGE_ROW = "avg"

CellKey = tuple[str, str, str]  # (dataset, method, thresholds)


@dataclass(frozen=True)
class Cell:
    dataset: str
    method: str
    thresholds: str
    results: tuple[RunResult, ...]

    @property
    def hyperareas(self) -> list[float]:
        return [r.hyperarea for r in self.results]

    @property
    def fronts(self) -> list[FrontSet]:
        return [r.front_set() for r in self.results]

    def po_front(self) -> FrontSet:
        return accumulate_po_front(self.fronts)


# =========================
# Carga
# =========================

def load_cells(manifest: CampaignManifest, methods: Iterable[str]) -> dict[CellKey, Cell]:
    """
    Lee los resultados de los métodos pedidos. Cualquier corrida listada que
    no esté completa (falló o falta el archivo) es un error de reporte.
    """
    wanted = set(methods)
    grouped: dict[CellKey, list[RunResult]] = defaultdict(list)
    missing: list[str] = []
    for entry in manifest.entries:
        if entry.method not in wanted:
            continue
        if entry.status != STATUS_OK:
            missing.append(entry.run_id)
            continue
        try:
            result = read_result(manifest.result_path(entry))
        except (FileNotFoundError, ParseError):
            missing.append(entry.run_id)
            continue
        grouped[(entry.dataset, entry.method, entry.thresholds)].append(result)
    if missing:
        raise ReportError("runs missing from the campaign", missing)

    absent = wanted - {method for _, method, _ in grouped}
    if absent:
        raise ReportError(f"no runs for method(s) {', '.join(sorted(absent))}")
    return {
        key: Cell(*key, tuple(sorted(results, key=lambda r: r.run_index)))
        for key, results in grouped.items()
    }


def _counterpart(cells: dict[CellKey, Cell], dataset: str, method: str, thresholds: str) -> Optional[Cell]:
    return cells.get((dataset, method, thresholds)) or cells.get((dataset, method, NO_THRESHOLDS))


def pair_cells(cells: dict[CellKey, Cell], method_a: str, method_b: str) -> list[tuple[Cell, Cell]]:
    """Pares (A, B) por dataset y umbrales; si A no tiene umbrales se usan los de B."""
    pairs = []
    for (dataset, method, thresholds), cell_a in sorted(cells.items()):
        if method != method_a:
            continue
        if thresholds == NO_THRESHOLDS:
            others = [c for (d, m, _), c in sorted(cells.items()) if d == dataset and m == method_b]
            pairs.extend((cell_a, cell_b) for cell_b in others)
            continue
        cell_b = _counterpart(cells, dataset, method_b, thresholds)
        if cell_b is not None:
            pairs.append((cell_a, cell_b))
    return pairs


def _cell_thresholds(a: Cell, b: Cell) -> str:
    return a.thresholds if a.thresholds != NO_THRESHOLDS else b.thresholds


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


# =========================
# Tablas
# =========================

def hyperarea_table(pairs: Sequence[tuple[Cell, Cell]]) -> pd.DataFrame:
    rows = []
    for a, b in pairs:
        mean_a, sd_a = _mean_sd(a.hyperareas)
        mean_b, sd_b = _mean_sd(b.hyperareas)
        test = wilcoxon_rank_sum(a.hyperareas, b.hyperareas)
        rows.append({
            "dataset": a.dataset,
            "thresholds": _cell_thresholds(a, b),
            "method_a": a.method,
            "method_b": b.method,
            "mean_a": mean_a,
            "sd_a": sd_a,
            "mean_b": mean_b,
            "sd_b": sd_b,
            "po_a": hyperarea(a.po_front()),
            "po_b": hyperarea(b.po_front()),
            "p_value": test.p_value,
            "verdict": test.symbol,
        })
    return pd.DataFrame(rows)


def unique_table(pairs: Sequence[tuple[Cell, Cell]]) -> pd.DataFrame:
    """Una fila por celda más una fila promedio por dataset."""
    rows = []
    for a, b in pairs:
        u = unique_solutions(a.fronts, b.fronts)
        rows.append({
            "dataset": a.dataset,
            "thresholds": _cell_thresholds(a, b),
            "method_a": a.method,
            "method_b": b.method,
            "mean_a": u.mean_a,
            "sd_a": u.sd_a,
            "mean_b": u.mean_b,
            "sd_b": u.sd_b,
            "pooled_a": u.pooled_a,
            "pooled_b": u.pooled_b,
        })
    table = pd.DataFrame(rows)
    if table.empty:
        return table
    numeric = ["mean_a", "sd_a", "mean_b", "sd_b", "pooled_a", "pooled_b"]
    averages = table.groupby(["dataset", "method_a", "method_b"], as_index=False, sort=True)[numeric].mean()
    averages["thresholds"] = AVERAGE_ROW
    table = pd.concat([table, averages[table.columns]], ignore_index=True)
    return table


def wins_table(cells: dict[CellKey, Cell], method: str, against: Sequence[str]) -> pd.DataFrame:
    """
    Por (dataset, umbrales): cuántos competidores vence `method` en hyperarea
    media (Wilcoxon "better") y en hyperarea del frente PO (estrictamente mayor).
    """
    rows = []
    for (dataset, m, thresholds), cell in sorted(cells.items()):
        if m != method:
            continue
        avg_wins = po_wins = compared = 0
        po_own = hyperarea(cell.po_front())
        for competitor in against:
            other = _counterpart(cells, dataset, competitor, thresholds)
            if other is None:
                continue
            compared += 1
            if wilcoxon_rank_sum(cell.hyperareas, other.hyperareas).verdict == VERDICT_BETTER:
                avg_wins += 1
            if po_own > hyperarea(other.po_front()):
                po_wins += 1
        rows.append({
            "dataset": dataset,
            "thresholds": thresholds,
            "method": method,
            "competitors": compared,
            "avg_wins": avg_wins,
            "po_wins": po_wins,
        })
    return pd.DataFrame(rows)


def sizes_table(cells: dict[CellKey, Cell]) -> pd.DataFrame:
    rows = []
    for (dataset, method, thresholds), cell in sorted(cells.items()):
        rows.append({"dataset": dataset, "method": method, "thresholds": thresholds}
                    | size_statistics(cell.results).as_row())
    return pd.DataFrame(rows)


def runs_table(cells: dict[CellKey, Cell]) -> pd.DataFrame:
    rows = [
        {
            "run_id": r.run_id,
            "dataset": r.dataset,
            "method": r.method,
            "thresholds": r.thresholds_label,
            "seed": r.seed,
            "hyperarea": r.hyperarea,
            "hypervolume_rect": r.hypervolume_rect,
            "front_size": len(r.front),
            "best_accuracy": r.best_accuracy,
            "mean_tree_size": r.mean_tree_size,
            "nodes_evaluated": r.nodes_evaluated,
        }
        for _, cell in sorted(cells.items())
        for r in cell.results
    ]
    return pd.DataFrame(rows)


def _write(table: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format="%.6g")
    return path


def report(
    manifest_path: Path | str,
    method_a: str,
    method_b: str,
    out_dir: Path | str,
    *,
    against: Sequence[str] = (),
) -> dict[str, Path]:
    manifest = load_manifest(manifest_path)
    methods = {method_a, method_b, *against}
    cells = load_cells(manifest, methods)
    pairs = pair_cells(cells, method_a, method_b)
    if not pairs:
        raise ReportError(f"no comparable cells between {method_a} and {method_b}")

    out = Path(out_dir)
    stem = f"{method_a}_vs_{method_b}"
    written = {
        "hyperarea": _write(hyperarea_table(pairs), out / f"{stem}__hyperarea.csv"),
        "unique": _write(unique_table(pairs), out / f"{stem}__unique.csv"),
        "sizes": _write(sizes_table(cells), out / f"{stem}__sizes.csv"),
        "runs": _write(runs_table(cells), out / f"{stem}__runs.csv"),
    }
    if against:
        written["wins"] = _write(wins_table(cells, method_a, against), out / f"{method_a}__wins.csv")
    logger.info("report %s: %d cell pairs -> %s", stem, len(pairs), out)
    return written


# =========================
# Datos para gráficos
# =========================

def _points_frame(points: Iterable[tuple[float, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(points), columns=["x", "y"])


def plot_data(
    manifest_path: Path | str,
    dataset: str,
    method_a: str,
    method_b: str,
    out_dir: Path | str,
    *,
    thresholds: str = NO_THRESHOLDS,
    exclusive: bool = False,
) -> dict[str, Path]:
    """Frentes PO por método (x=TPR, y=TNR) y, con `exclusive`, los puntos exclusivos."""
    manifest = load_manifest(manifest_path)
    cells = load_cells(manifest, {method_a, method_b})
    cell_a = _counterpart(cells, dataset, method_a, thresholds)
    cell_b = _counterpart(cells, dataset, method_b, thresholds)
    if cell_a is None or cell_b is None:
        raise ReportError(f"{dataset}: no runs for {method_a} and {method_b} at thresholds {thresholds}")

    out = Path(out_dir)
    written = {
        f"po_{method_a}": _write(_points_frame(cell_a.po_front().as_floats()), out / f"{dataset}__po__{method_a}.csv"),
        f"po_{method_b}": _write(_points_frame(cell_b.po_front().as_floats()), out / f"{dataset}__po__{method_b}.csv"),
    }
    if exclusive:
        only_a, only_b = exclusive_points(cell_a.fronts, cell_b.fronts)
        written[f"only_{method_a}"] = _write(_points_frame(only_a), out / f"{dataset}__only__{method_a}.csv")
        written[f"only_{method_b}"] = _write(_points_frame(only_b), out / f"{dataset}__only__{method_b}.csv")
    return written
