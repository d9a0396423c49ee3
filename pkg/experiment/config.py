# experiment/config.py
"""
Configuración de un experimento (una celda del diseño factorial) y su
lectura desde archivos planos `clave = valor`.

Los archivos de grilla usan la misma sintaxis, pero cada valor puede ser
una lista separada por comas; la campaña expande el producto cartesiano.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from django.conf import settings

from datasets.catalog import ALL_DATASETS
from emo.selection import SCHEME_NSGA2, SCHEMES
from gp_core.exceptions import ConfigurationError
from gp_core.operators import VariationParams
from semantic_variants.services import (
    SEMANTIC_VARIANTS,
    SSC_MAX_TRIALS_DEFAULT,
    VARIANT_BASELINE,
    VARIANT_SDO,
    VariantConfig,
)
from semantics.distances import LBSS_VALUES, UBSS_VALUES, SemanticThresholds

SPLIT_SHARED = "shared"
SPLIT_PER_RUN = "per_run"
SPLIT_MODES = (SPLIT_SHARED, SPLIT_PER_RUN)

HV_TRAPEZOID = "trapezoid"
HV_RECTANGLE = "rectangle"
HV_KINDS = (HV_TRAPEZOID, HV_RECTANGLE)

DEFAULT_BASE_SEED = 20240101
DEFAULT_SPLIT_SEED = 7


@dataclass(frozen=True)
class ExperimentConfig:
    """Parámetros de una celda: (dataset, esquema, variante, umbrales) x corridas."""

    dataset: str
    scheme: str = SCHEME_NSGA2
    variant: str = VARIANT_BASELINE
    thresholds: Optional[SemanticThresholds] = None
    pop_size: int = 500
    generations: int = 50
    variation: VariationParams = field(default_factory=VariationParams)
    runs: int = 50
    base_seed: int = DEFAULT_BASE_SEED
    split_seed: int = DEFAULT_SPLIT_SEED
    output_dir: Optional[Path] = None
    split_mode: str = SPLIT_SHARED
    dataset_path: Optional[Path] = None
    ssc_max_trials: int = SSC_MAX_TRIALS_DEFAULT
    init_min_depth: int = 1
    init_max_depth: int = 5
    hypervolume_kind: str = HV_TRAPEZOID

    def __post_init__(self):
        if not self.dataset:
            raise ConfigurationError("dataset is required")
        if self.dataset not in ALL_DATASETS and self.dataset_path is None:
            raise ConfigurationError(
                f"unknown dataset {self.dataset!r} (expected one of {', '.join(ALL_DATASETS)} or a dataset_path)"
            )
        if self.pop_size < 1:
            raise ConfigurationError("pop_size must be >= 1")
        if self.generations < 0:
            raise ConfigurationError("generations must be >= 0")
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if self.split_mode not in SPLIT_MODES:
            raise ConfigurationError(f"split_mode must be one of {', '.join(SPLIT_MODES)}")
        if self.hypervolume_kind not in HV_KINDS:
            raise ConfigurationError(f"hypervolume_kind must be one of {', '.join(HV_KINDS)}")
        if not (1 <= self.init_min_depth <= self.init_max_depth):
            raise ConfigurationError(
                f"need 1 <= init_min_depth <= init_max_depth, got {self.init_min_depth}..{self.init_max_depth}"
            )
        for name in ("output_dir", "dataset_path"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, Path):
                object.__setattr__(self, name, Path(value))
        # valida esquema/variante/umbrales y normaliza baseline
        vcfg = self.variant_config()
        object.__setattr__(self, "thresholds", vcfg.thresholds)

    def variant_config(self, trace: bool = False) -> VariantConfig:
        return VariantConfig(
            variant=self.variant,
            thresholds=self.thresholds,
            ssc_max_trials=self.ssc_max_trials,
            base_scheme=self.scheme,
            trace=trace,
        )

    @property
    def method(self) -> str:
        return self.scheme if self.variant == VARIANT_BASELINE else f"{self.scheme}-{self.variant}"

    @property
    def thresholds_label(self) -> str:
        return "-" if self.thresholds is None else self.thresholds.label

    def run_id(self, run_index: int) -> str:
        return f"{self.dataset}__{self.method}__{self.thresholds_label}__r{run_index:02d}"

    def seed_for(self, run_index: int) -> int:
        """Semilla por corrida; agregar celdas nuevas no cambia las existentes."""
        key = "|".join(
            str(part)
            for part in (self.base_seed, self.dataset, self.scheme, self.variant, self.thresholds_label, run_index)
        )
        return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")

    def split_seed_for(self, run_index: int) -> int:
        if self.split_mode == SPLIT_SHARED:
            return self.split_seed
        key = f"{self.seed_for(run_index)}|split"
        return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")

    def result_path(self, run_index: int, root: Path | str | None = None) -> Path:
        base = Path(root) if root is not None else (self.output_dir or Path(settings.MOGP_RESULTS_DIR))
        return base / self.dataset / f"{self.run_id(run_index)}.jsonl"

    def as_dict(self) -> dict[str, Any]:
        """Eco plano de la configuración (va dentro de cada resultado)."""
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "thresholds":
                out["ubss"] = None if value is None else value.ubss
                out["lbss"] = None if value is None else value.lbss
            elif f.name == "variation":
                out.update(asdict(value))
            elif isinstance(value, Path):
                out[f.name] = str(value)
            else:
                out[f.name] = value
        return out


# =========================
# Archivos clave = valor
# =========================

_VARIATION_KEYS = {f.name for f in fields(VariationParams)}
_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)} - {"thresholds", "variation"}
KNOWN_KEYS = frozenset(_CONFIG_KEYS | _VARIATION_KEYS | {"ubss", "lbss"})

_INT_KEYS = {
    "pop_size", "generations", "runs", "base_seed", "split_seed", "ssc_max_trials",
    "init_min_depth", "init_max_depth", "tournament_size", "max_length", "max_depth", "mutation_max_depth",
}
_FLOAT_KEYS = {"crossover_rate", "mutation_rate", "internal_node_bias", "ubss", "lbss"}
_PATH_KEYS = {"output_dir", "dataset_path"}
_ABSENT = {"", "-", "none"}


def parse_config_text(text: str) -> dict[str, str]:
    """`clave = valor` por línea; `#` comenta hasta fin de línea."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected `key = value`, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicated key {key!r}")
        values[key] = value
    return values


def read_config_file(path: Path | str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    return parse_config_text(text)


def _coerce(key: str, raw: str) -> Any:
    value = raw.strip()
    if key in _PATH_KEYS:
        return None if value.lower() in _ABSENT else Path(value)
    if key in ("ubss", "lbss"):
        if value.lower() in _ABSENT:
            return None
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None
    return value


def config_from_mapping(values: Mapping[str, Any]) -> ExperimentConfig:
    """Arma un ExperimentConfig desde claves planas (strings o valores ya tipados)."""
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f"unknown keys: {', '.join(sorted(unknown))}")
    typed = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in values.items()}

    ubss, lbss = typed.pop("ubss", None), typed.pop("lbss", None)
    if ubss is None and lbss is not None:
        raise ConfigurationError("lbss given without ubss")
    thresholds = SemanticThresholds(ubss, lbss) if ubss is not None else None

    variation_kwargs = {k: typed.pop(k) for k in list(typed) if k in _VARIATION_KEYS}
    variation = VariationParams(**variation_kwargs)

    typed.setdefault("base_seed", settings.MOGP_BASE_SEED)
    typed.setdefault("split_seed", settings.MOGP_SPLIT_SEED)
    if "dataset" not in typed:
        raise ConfigurationError("dataset is required")
    return ExperimentConfig(thresholds=thresholds, variation=variation, **typed)


# =========================
# Grillas
# =========================

def expand_grid(values: Mapping[str, str]) -> list[ExperimentConfig]:
    """
    Producto cartesiano de las listas separadas por comas. En baseline los
    ejes de umbrales colapsan a una sola celda; el orden es el de la grilla.
    """
    keys = list(values)
    axes = [[item.strip() for item in str(values[k]).split(",")] for k in keys]
    configs: dict[ExperimentConfig, None] = {}
    for combo in itertools.product(*axes):
        cell = dict(zip(keys, combo))
        if cell.get("variant", VARIANT_BASELINE).strip() == VARIANT_BASELINE:
            cell.pop("ubss", None)
            cell.pop("lbss", None)
        configs.setdefault(config_from_mapping(cell), None)
    return list(configs)


def full_threshold_grid() -> list[SemanticThresholds]:
    """Las 16 combinaciones (UBSS, LBSS)."""
    return [SemanticThresholds(u, l) for u in UBSS_VALUES for l in LBSS_VALUES]


def full_campaign(datasets: Iterable[str] = ALL_DATASETS, runs: int = 50, **overrides) -> list[ExperimentConfig]:
    """2 baselines + 2 esquemas x 3 variantes x 16 umbrales, por dataset."""
    configs: list[ExperimentConfig] = []
    grid = full_threshold_grid()
    for name in datasets:
        base = ExperimentConfig(dataset=name, runs=runs, **overrides)
        configs.extend(replace(base, scheme=scheme) for scheme in SCHEMES)
        for scheme in SCHEMES:
            for variant in SEMANTIC_VARIANTS:
                configs.extend(replace(base, scheme=scheme, variant=variant, thresholds=t) for t in grid)
    return configs


def smoke_preset(**overrides) -> list[ExperimentConfig]:
    """pop 100, 20 generaciones, 15 corridas en yeast1: baseline vs SDO (ubss=0.5)."""
    params = dict(dataset="yeast1", pop_size=100, generations=20, runs=15) | overrides
    baseline = ExperimentConfig(**params)
    return [baseline, replace(baseline, variant=VARIANT_SDO, thresholds=SemanticThresholds(0.5))]


def total_runs(configs: Iterable[ExperimentConfig]) -> int:
    return sum(cfg.runs for cfg in configs)

