from __future__ import annotations

import tempfile
from dataclasses import replace
from fractions import Fraction
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from datasets.catalog import DATASETS, get_spec
from datasets.classification import (
    ConfusionMatrix,
    Label,
    classify,
    confusion_from_outputs,
    objectives,
)
from datasets.services import Dataset, ingest, load_canonical, stratified_split, write_canonical
from gp_core.exceptions import ConfigurationError, IngestionError, ParseError, SplitError
from gp_core.trees import Function, Op, Terminal, parse_prefix


def write_lines(directory: Path, name: str, lines: list[str]) -> Path:
    path = directory / name
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def ion_lines(rng: np.random.Generator, n_bad: int = 126, n_good: int = 225) -> list[str]:
    labels = ["b"] * n_bad + ["g"] * n_good
    rng.shuffle(labels)
    return [",".join(f"{v:.5f}" for v in rng.uniform(-1, 1, 34)) + f",{lab}" for lab in labels]


def yeast_lines(rng: np.random.Generator) -> list[str]:
    labels = ["MIT"] * 244 + ["ME3"] * 163 + ["CYT"] * (1482 - 244 - 163)
    lines = []
    for i, lab in enumerate(labels):
        values = " ".join(f"{v:.4f}" for v in rng.uniform(0, 1, 8))
        lines.append(f"SEQ{i:05d}  {values}  {lab}")
    # dos filas repetidas con otro nombre de secuencia
    for src in (3, 700):
        _, *rest = lines[src].split()
        lines.append("DUP" + str(src) + "  " + "  ".join(rest))
    return lines


def abalone_lines(rng: np.random.Generator) -> list[str]:
    rings = [19] * 32 + [18] * 42 + [9] * 689 + [10] * (4177 - 32 - 42 - 689)
    rng.shuffle(rings)
    sexes = "MFI"
    return [
        f"{sexes[i % 3]}," + ",".join(f"{v:.4f}" for v in rng.uniform(0, 1, 7)) + f",{r}"
        for i, r in enumerate(rings)
    ]


def toy_dataset(n_pos: int, n_neg: int, n_features: int = 2, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    labels = np.array([True] * n_pos + [False] * n_neg)
    return Dataset("toy", rng.normal(size=(n_pos + n_neg, n_features)), labels)


class IngestTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.rng = np.random.default_rng(0)

    def tearDown(self):
        self.tmp.cleanup()

    def test_ionosphere_counts_and_polarity(self):
        lines = ion_lines(self.rng)
        ds = ingest([write_lines(self.dir, "ionosphere.data", lines)], get_spec("ion"))
        self.assertEqual((len(ds), ds.positive_count, ds.feature_count), (351, 126, 34))
        expected = np.array([line.endswith(",b") for line in lines])
        self.assertTrue(np.array_equal(ds.labels, expected))

    def test_yeast_duplicates_are_dropped(self):
        path = write_lines(self.dir, "yeast.data", yeast_lines(self.rng))
        for name, positives in (("yeast1", 244), ("yeast2", 163)):
            ds = ingest([path], get_spec(name))
            self.assertEqual((len(ds), ds.positive_count, ds.feature_count), (1482, positives, 8))

    def test_abalone_variants(self):
        path = write_lines(self.dir, "abalone.data", abalone_lines(self.rng))
        abal1 = ingest([path], get_spec("abal1"))
        self.assertEqual((len(abal1), abal1.positive_count), (731, 42))
        abal2 = ingest([path], get_spec("abal2"))
        self.assertEqual((len(abal2), abal2.positive_count, abal2.feature_count), (4177, 32, 8))
        # sexo M/F/I -> 0/1/2 en la primera columna
        self.assertEqual(abal2.features[:3, 0].tolist(), [0.0, 1.0, 2.0])

    def test_spect_concatenates_both_files(self):
        labels = ["0"] * 55 + ["1"] * 212
        self.rng.shuffle(labels)
        rows = [lab + "," + ",".join(str(int(b)) for b in self.rng.integers(0, 2, 22)) for lab in labels]
        train = write_lines(self.dir, "SPECT.train", rows[:80])
        test = write_lines(self.dir, "SPECT.test", rows[80:])
        ds = ingest([train, test], get_spec("spect"))
        self.assertEqual((len(ds), ds.positive_count, ds.feature_count), (267, 55, 22))

    def test_empty_file(self):
        with self.assertRaises(IngestionError):
            ingest([write_lines(self.dir, "ionosphere.data", [])], get_spec("ion"))

    def test_unknown_label_reports_line_number(self):
        lines = ion_lines(self.rng)
        lines[9] = lines[9][:-1] + "x"
        with self.assertRaises(ParseError) as ctx:
            ingest([write_lines(self.dir, "ionosphere.data", lines)], get_spec("ion"))
        self.assertEqual(ctx.exception.line_number, 10)
        self.assertIn("line 10", str(ctx.exception))

    def test_line_numbers_count_blank_lines(self):
        lines = ion_lines(self.rng)
        lines[9] = lines[9][:-1] + "x"
        lines[2:2] = ["", "   "]
        with self.assertRaises(ParseError) as ctx:
            ingest([write_lines(self.dir, "ionosphere.data", lines)], get_spec("ion"))
        self.assertEqual(ctx.exception.line_number, 12)
        self.assertIn("line 12", str(ctx.exception))

    def test_checksum_against_catalogue(self):
        lines = ion_lines(self.rng)
        path = write_lines(self.dir, "ionosphere.data", lines)
        golden = ingest([path], get_spec("ion")).checksum()
        spec = replace(get_spec("ion"), expected_checksum=golden)
        self.assertEqual(ingest([path], spec).checksum(), golden)

        # mismo conteo, un valor alterado
        first, rest = lines[0].split(",", 1)
        lines[0] = f"{float(first) + 0.5:.5f},{rest}"
        tampered = write_lines(self.dir, "tampered.data", lines)
        with self.assertRaises(IngestionError) as ctx:
            ingest([tampered], spec)
        self.assertIn("checksum", str(ctx.exception))
        with self.assertLogs("datasets.services", level="WARNING"):
            ingest([tampered], spec, lenient=True)

    def test_catalogue_checksums_are_short_hex_or_unset(self):
        for spec in DATASETS.values():
            if spec.expected_checksum is not None:
                self.assertRegex(spec.expected_checksum, r"^[0-9a-f]{16}$")

    def test_count_mismatch_strict_and_lenient(self):
        path = write_lines(self.dir, "ionosphere.data", ion_lines(self.rng, n_bad=120, n_good=225))
        with self.assertRaises(IngestionError) as ctx:
            ingest([path], get_spec("ion"))
        self.assertIn("expected 351 rows / 126 positive", str(ctx.exception))
        with self.assertLogs("datasets.services", level="WARNING"):
            ds = ingest([path], get_spec("ion"), lenient=True)
        self.assertEqual(ds.positive_count, 120)

    def test_unknown_dataset(self):
        with self.assertRaises(ConfigurationError):
            get_spec("iris")

    def test_catalog_negative_counts(self):
        self.assertEqual(DATASETS["ion"].expected_negative, 225)
        self.assertEqual(DATASETS["abal1"].expected_negative, 689)


class CanonicalCsvTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_write_then_load_preserves_data(self):
        ds = toy_dataset(4, 9, n_features=3)
        out = write_canonical(ds, self.dir / "toy.csv")
        self.assertEqual(out.read_text().splitlines()[0], "f0,f1,f2,label")
        loaded = load_canonical(out)
        self.assertEqual(loaded.name, "toy")
        self.assertTrue(np.array_equal(loaded.features, ds.features))
        self.assertTrue(np.array_equal(loaded.labels, ds.labels))
        self.assertEqual(loaded.checksum(), ds.checksum())

    def test_bad_header_and_labels(self):
        bad = write_lines(self.dir, "bad.csv", ["a,b,label", "1,2,0"])
        with self.assertRaises(ParseError):
            load_canonical(bad)
        bad = write_lines(self.dir, "bad2.csv", ["f0,label", "1.0,0", "2.0,3"])
        with self.assertRaises(ParseError) as ctx:
            load_canonical(bad)
        self.assertEqual(ctx.exception.line_number, 3)

    def test_missing_file(self):
        with self.assertRaises(IngestionError):
            load_canonical(self.dir / "nope.csv")

    def test_arrays_are_read_only(self):
        ds = toy_dataset(3, 5)
        with self.assertRaises(ValueError):
            ds.features[0, 0] = 1.0


class SplitTests(SimpleTestCase):
    def test_ionosphere_shaped_split(self):
        split = stratified_split(toy_dataset(126, 225), seed=7)
        self.assertEqual(split.train.positive_count, 63)
        self.assertEqual(split.train.negative_count, 112)
        self.assertEqual(len(split.train) + len(split.test), 351)

    def test_partition_and_balance(self):
        for n_pos, n_neg in ((5, 7), (6, 9), (55, 212), (4, 4)):
            ds = toy_dataset(n_pos, n_neg)
            split = stratified_split(ds, seed=1)
            total = n_pos + n_neg
            self.assertIn(len(split.train), (total // 2, (total + 1) // 2))
            self.assertEqual(set(split.train_index) & set(split.test_index), set())
            self.assertEqual(sorted(set(split.train_index) | set(split.test_index)), list(range(total)))
            self.assertLessEqual(abs(split.train.positive_count - n_pos / 2), 1)

    def test_determinism(self):
        ds = toy_dataset(20, 40)
        a, b = stratified_split(ds, 3), stratified_split(ds, 3)
        self.assertTrue(np.array_equal(a.train_index, b.train_index))
        c = stratified_split(ds, 4)
        self.assertFalse(np.array_equal(a.train_index, c.train_index))
        self.assertEqual(c.train.positive_count, a.train.positive_count)

    def test_tiny_class(self):
        with self.assertRaises(SplitError):
            stratified_split(toy_dataset(1, 10), seed=0)


class ClassificationTests(SimpleTestCase):
    def test_decision_rule(self):
        self.assertEqual(classify(0.0), Label.POSITIVE)
        self.assertEqual(classify(-0.0), Label.POSITIVE)
        self.assertEqual(classify(-0.0001), Label.NEGATIVE)
        self.assertEqual(classify(7.3), Label.POSITIVE)
        self.assertEqual(classify(float("nan")), Label.NEGATIVE)

    def test_constant_classifiers(self):
        ds = Dataset("toy", np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([True, False, False, True]))
        point, cm = objectives(Terminal(0), ds)
        self.assertEqual((point.tpr, point.tnr), (1, 0))
        self.assertEqual(cm, ConfusionMatrix(tp=2, fn=0, fp=2, tn=0))
        point, _ = objectives(Function(Op.SUB, Terminal(0), Function(Op.ADD, Terminal(0), Terminal(0))), ds)
        self.assertEqual((point.tpr, point.tnr), (0, 1))

    def test_hand_tally(self):
        X = np.array([[1.0, 2.0], [3.0, 1.0], [0.5, 0.5], [2.0, 5.0]])
        labels = np.array([True, True, False, False])
        # x0 - x1: [-1, 2, 0, -3] -> [neg, pos, pos, neg]
        point, cm = objectives(parse_prefix("(sub x0 x1)"), Dataset("toy", X, labels))
        self.assertEqual(cm.as_dict(), {"tp": 1, "fn": 1, "fp": 1, "tn": 1})
        self.assertEqual((point.tpr, point.tnr), (Fraction(1, 2), Fraction(1, 2)))
        self.assertEqual(cm.accuracy, Fraction(1, 2))

    def test_nan_outputs_are_negative(self):
        cm = confusion_from_outputs(np.array([np.nan, 1.0]), np.array([True, False]))
        self.assertEqual((cm.tp, cm.fn, cm.fp, cm.tn), (0, 1, 1, 0))


class IngestCommandTests(SimpleTestCase):
    def test_command_writes_canonical_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            raw = write_lines(Path(tmp), "ionosphere.data", ion_lines(np.random.default_rng(1)))
            out = Path(tmp) / "ion.csv"
            stdout = StringIO()
            call_command("ingest", "ion", str(raw), str(out), stdout=stdout)
            self.assertIn("rows=351 positive=126", stdout.getvalue())
            self.assertEqual(len(load_canonical(out)), 351)

    def test_data_errors_exit_with_code_2(self):
        with tempfile.TemporaryDirectory() as tmp:
            raw = write_lines(Path(tmp), "ionosphere.data", [])
            with self.assertRaises(CommandError) as ctx:
                call_command("ingest", "ion", str(raw), str(Path(tmp) / "ion.csv"))
            self.assertEqual(ctx.exception.returncode, 2)
