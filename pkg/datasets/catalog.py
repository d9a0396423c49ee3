from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gp_core.exceptions import ConfigurationError

DATASET_ION = "ion"
DATASET_SPECT = "spect"
DATASET_YEAST1 = "yeast1"
DATASET_YEAST2 = "yeast2"
DATASET_ABAL1 = "abal1"
DATASET_ABAL2 = "abal2"

SEP_COMMA = ","
SEP_WHITESPACE = r"\s+"

YEAST_CLASSES = frozenset({"CYT", "NUC", "MIT", "ME3", "ME2", "ME1", "EXC", "VAC", "POX", "ERL"})
ABALONE_SEX = {"M": 0.0, "F": 1.0, "I": 2.0}


@dataclass(frozen=True)
class DatasetSpec:
    """
    Cómo leer el archivo UCI original y qué conteos esperar.

    label_column / drop_columns son posiciones en el archivo crudo.
    negative_labels = None => "todo lo que no es positivo".
    known_labels = None => no se valida el vocabulario de etiquetas.
    """

    name: str
    raw_files: tuple[str, ...]
    sep: str
    label_column: int
    positive_labels: frozenset[str]
    n_features: int
    expected_total: int
    expected_positive: int
    negative_labels: Optional[frozenset[str]] = None
    known_labels: Optional[frozenset[str]] = None
    drop_columns: tuple[int, ...] = ()
    categorical: dict[int, dict[str, float]] = field(default_factory=dict)
    drop_duplicates: bool = False
    # sha256 corto de Dataset.checksum(); None hasta la primera ingesta verificada
    expected_checksum: Optional[str] = None

    @property
    def expected_negative(self) -> int:
        return self.expected_total - self.expected_positive


DATASETS: dict[str, DatasetSpec] = {
    # 126 "b" (bad) de 351: la clase minoritaria es la positiva
    DATASET_ION: DatasetSpec(
        name=DATASET_ION,
        raw_files=("ionosphere.data",),
        sep=SEP_COMMA,
        label_column=-1,
        positive_labels=frozenset({"b"}),
        known_labels=frozenset({"b", "g"}),
        n_features=34,
        expected_total=351,
        expected_positive=126,
    ),
    # SPECT.train + SPECT.test; etiqueta en la primera columna
    DATASET_SPECT: DatasetSpec(
        name=DATASET_SPECT,
        raw_files=("SPECT.train", "SPECT.test"),
        sep=SEP_COMMA,
        label_column=0,
        positive_labels=frozenset({"0"}),
        known_labels=frozenset({"0", "1"}),
        n_features=22,
        expected_total=267,
        expected_positive=55,
    ),
    DATASET_YEAST1: DatasetSpec(
        name=DATASET_YEAST1,
        raw_files=("yeast.data",),
        sep=SEP_WHITESPACE,
        label_column=-1,
        positive_labels=frozenset({"MIT"}),
        known_labels=YEAST_CLASSES,
        drop_columns=(0,),  # nombre de la secuencia
        n_features=8,
        expected_total=1482,
        expected_positive=244,
        drop_duplicates=True,
    ),
    DATASET_YEAST2: DatasetSpec(
        name=DATASET_YEAST2,
        raw_files=("yeast.data",),
        sep=SEP_WHITESPACE,
        label_column=-1,
        positive_labels=frozenset({"ME3"}),
        known_labels=YEAST_CLASSES,
        drop_columns=(0,),
        n_features=8,
        expected_total=1482,
        expected_positive=163,
        drop_duplicates=True,
    ),
    # anillos 18 (42) contra anillos 9 (689); el resto de las filas no participa
    DATASET_ABAL1: DatasetSpec(
        name=DATASET_ABAL1,
        raw_files=("abalone.data",),
        sep=SEP_COMMA,
        label_column=-1,
        positive_labels=frozenset({"18"}),
        negative_labels=frozenset({"9"}),
        categorical={0: ABALONE_SEX},
        n_features=8,
        expected_total=731,
        expected_positive=42,
    ),
    DATASET_ABAL2: DatasetSpec(
        name=DATASET_ABAL2,
        raw_files=("abalone.data",),
        sep=SEP_COMMA,
        label_column=-1,
        positive_labels=frozenset({"19"}),
        categorical={0: ABALONE_SEX},
        n_features=8,
        expected_total=4177,
        expected_positive=32,
    ),
}

ALL_DATASETS = tuple(DATASETS)


def get_spec(name: str) -> DatasetSpec:
    try:
        return DATASETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown dataset {name!r} (expected one of {', '.join(ALL_DATASETS)})") from None
