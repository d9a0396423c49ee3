# datasets/services.py
from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings

from datasets.catalog import DatasetSpec
from gp_core.exceptions import IngestionError, ParseError, SplitError

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"


# =========================
# Tipos
# =========================

@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Matriz de features (filas = ejemplos) + etiquetas booleanas
    (True = clase positiva, la minoritaria). Inmutable: los arrays quedan
    en solo lectura para compartirlos entre corridas.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=bool)
        if features.ndim != 2:
            raise IngestionError(f"{self.name}: features must be a 2-D matrix, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise IngestionError(f"{self.name}: {labels.shape[0]} labels for {features.shape[0]} rows")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def feature_count(self) -> int:
        return int(self.features.shape[1])

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self.labels))

    @property
    def negative_count(self) -> int:
        return len(self) - self.positive_count

    def subset(self, index: Sequence[int], name: Optional[str] = None) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(name or self.name, self.features[index], self.labels[index])

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SplitDataset:
    train: Dataset
    test: Dataset
    split_seed: int
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


# =========================
# Ingesta de archivos UCI
# =========================

def _read_raw(path: Path, spec: DatasetSpec) -> pd.DataFrame:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise IngestionError(f"raw file not found: {path}") from None
    # numeración del archivo crudo, antes de saltar líneas en blanco
    numbered = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not numbered:
        return pd.DataFrame()
    body = "\n".join(line for _, line in numbered)
    try:
        frame = pd.read_csv(StringIO(body), sep=spec.sep, header=None, dtype=str, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise ParseError(f"{path}: {e}") from e
    frame["_line"] = [n for n, _ in numbered]
    return frame



def _first_bad_line(frame: pd.DataFrame, mask: pd.Series) -> int:
    return int(frame.loc[mask, "_line"].iloc[0])


def _encode(frame: pd.DataFrame, path: Path, spec: DatasetSpec) -> tuple[pd.DataFrame, pd.Series]:
    """Devuelve (features numéricas, etiqueta cruda) de un archivo."""
    n_cols = frame.shape[1] - 1  # sin _line
    expected = spec.n_features + 1 + len(spec.drop_columns)
    if n_cols != expected:
        raise ParseError(f"{path}: expected {expected} columns for {spec.name}, found {n_cols}")

    label_pos = spec.label_column % n_cols
    dropped = {c % n_cols for c in spec.drop_columns}
    raw_labels = frame[label_pos].str.strip()

    missing = raw_labels.isna()
    if missing.any():
        raise ParseError(f"{path}: missing class label", _first_bad_line(frame, missing))
    if spec.known_labels is not None:
        unknown = ~raw_labels.isin(spec.known_labels)
        if unknown.any():
            line = _first_bad_line(frame, unknown)
            raise ParseError(f"{path}: unknown label {raw_labels[unknown].iloc[0]!r}", line)

    columns = {}
    for out_idx, col in enumerate(c for c in range(n_cols) if c != label_pos and c not in dropped):
        raw = frame[col].str.strip()
        if col in spec.categorical:
            values = raw.map(spec.categorical[col])
        else:
            values = pd.to_numeric(raw, errors="coerce")
        bad = values.isna()
        if bad.any():
            line = _first_bad_line(frame, bad)
            raise ParseError(f"{path}: bad value {raw[bad].iloc[0]!r} in column {col}", line)
        columns[f"f{out_idx}"] = values.astype(np.float64)
    return pd.DataFrame(columns), raw_labels


def ingest(raw_paths: Iterable[Path | str], spec: DatasetSpec, *, lenient: bool = False) -> Dataset:
    """
    Lee los archivos UCI tal como se distribuyen, mapea etiquetas a
    positivo/negativo y verifica los conteos esperados del catálogo.
    """
    feature_parts, label_parts = [], []
    for raw_path in raw_paths:
        path = Path(raw_path)
        frame = _read_raw(path, spec)
        if frame.empty:
            continue
        features, raw_labels = _encode(frame, path, spec)
        feature_parts.append(features)
        label_parts.append(raw_labels)

    if not feature_parts:
        raise IngestionError(f"{spec.name}: zero rows read")

    features = pd.concat(feature_parts, ignore_index=True)
    raw_labels = pd.concat(label_parts, ignore_index=True)
    positive = raw_labels.isin(spec.positive_labels)
    if spec.negative_labels is not None:
        keep = positive | raw_labels.isin(spec.negative_labels)
    else:
        keep = pd.Series(True, index=raw_labels.index)

    table = features[keep].copy()
    table[LABEL_COLUMN] = positive[keep].astype(np.int8)
    if spec.drop_duplicates:
        before = len(table)
        table = table.drop_duplicates(keep="first")
        if before != len(table):
            logger.info("ingest %s: dropped %d duplicated rows", spec.name, before - len(table))

    ds = Dataset(spec.name, table.drop(columns=[LABEL_COLUMN]).to_numpy(), table[LABEL_COLUMN].to_numpy() == 1)
    if len(ds) == 0:
        raise IngestionError(f"{spec.name}: zero rows after label mapping")
    _check_counts(ds, spec, lenient=lenient)
    _check_checksum(ds, spec, lenient=lenient)
    logger.info(
        "ingest %s: rows=%d positive=%d features=%d checksum=%s",
        spec.name, len(ds), ds.positive_count, ds.feature_count, ds.checksum(),
    )
    return ds


def _check_counts(ds: Dataset, spec: DatasetSpec, *, lenient: bool) -> None:
    if ds.positive_count > ds.negative_count:
        raise IngestionError(
            f"{spec.name}: positive class must be the minority "
            f"({ds.positive_count} positive vs {ds.negative_count} negative)"
        )
    if ds.positive_count == 0:
        raise IngestionError(f"{spec.name}: no positive examples")
    if (len(ds), ds.positive_count) == (spec.expected_total, spec.expected_positive):
        return
    msg = (
        f"{spec.name}: expected {spec.expected_total} rows / {spec.expected_positive} positive, "
        f"found {len(ds)} rows / {ds.positive_count} positive"
    )
    if not lenient:
        raise IngestionError(msg)
    logger.warning("%s (lenient ingest)", msg)


def _check_checksum(ds: Dataset, spec: DatasetSpec, *, lenient: bool) -> None:
    if spec.expected_checksum is None:
        return
    found = ds.checksum()
    if found == spec.expected_checksum:
        return
    msg = f"{spec.name}: checksum {found} does not match catalogue {spec.expected_checksum}"
    if not lenient:
        raise IngestionError(msg)
    logger.warning("%s (lenient ingest)", msg)


# =========================
# CSV canónico
# =========================

def canonical_path(name: str) -> Path:
    return Path(settings.MOGP_DATASETS_DIR) / f"{name}.csv"


def write_canonical(ds: Dataset, out_path: Path | str) -> Path:
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(ds.features, columns=[f"f{i}" for i in range(ds.feature_count)])
    frame[LABEL_COLUMN] = ds.labels.astype(np.int8)
    tmp = out.with_name(out.name + ".tmp")
    frame.to_csv(tmp, index=False, float_format="%.17g")
    os.replace(tmp, out)
    return out


def load_canonical(path: Path | str, name: Optional[str] = None) -> Dataset:
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise IngestionError(f"dataset file not found: {path} (run `manage.py ingest` first)") from None
    except pd.errors.EmptyDataError:
        raise IngestionError(f"{path}: empty dataset file") from None

    n_features = frame.shape[1] - 1
    expected = [f"f{i}" for i in range(n_features)] + [LABEL_COLUMN]
    if list(frame.columns) != expected:
        raise ParseError(f"{path}: header must be f0..f{n_features - 1},label", 1)
    if frame.empty:
        raise IngestionError(f"{path}: zero rows")

    bad_label = ~frame[LABEL_COLUMN].isin([0, 1])
    if bad_label.any():
        raise ParseError(f"{path}: label must be 0 or 1", int(np.flatnonzero(bad_label.to_numpy())[0]) + 2)
    features = frame[expected[:-1]].apply(pd.to_numeric, errors="coerce")
    bad_rows = features.isna().any(axis=1)
    if bad_rows.any():
        raise ParseError(f"{path}: non-numeric feature value", int(np.flatnonzero(bad_rows.to_numpy())[0]) + 2)

    return Dataset(name or path.stem, features.to_numpy(dtype=np.float64), frame[LABEL_COLUMN].to_numpy() == 1)


# =========================
# Split estratificado
# =========================

def stratified_split(ds: Dataset, seed: int) -> SplitDataset:
    """
    Mitad y mitad por clase. Si las dos clases son impares, una redondea
    hacia abajo y la otra hacia arriba, así |train| queda en total/2.
    """
    rng = np.random.default_rng(seed)
    train_parts = []
    odd_seen = 0
    for cls in (True, False):
        members = np.flatnonzero(ds.labels == cls)
        if members.size < 2:
            kind = "positive" if cls else "negative"
            raise SplitError(f"{ds.name}: class {kind} has {members.size} example(s), need at least 2")
        take = members.size // 2
        if members.size % 2:
            take += odd_seen % 2
            odd_seen += 1
        train_parts.append(rng.permutation(members)[:take])

    train_index = np.sort(np.concatenate(train_parts))
    test_mask = np.ones(len(ds), dtype=bool)
    test_mask[train_index] = False
    test_index = np.flatnonzero(test_mask)
    return SplitDataset(
        train=ds.subset(train_index, f"{ds.name}/train"),
        test=ds.subset(test_index, f"{ds.name}/test"),
        split_seed=seed,
        train_index=train_index,
        test_index=test_index,
    )
