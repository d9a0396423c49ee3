from __future__ import annotations

import json
import shutil
import tempfile
from dataclasses import replace
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, tag

from datasets.catalog import ALL_DATASETS
from datasets.classification import ConfusionMatrix
from datasets.services import Dataset, SplitDataset, canonical_path, write_canonical
from experiment.campaign import CampaignManifest, ManifestEntry, load_manifest, run_campaign
from experiment.config import (
    KNOWN_KEYS,
    SPLIT_PER_RUN,
    ExperimentConfig,
    config_from_mapping,
    expand_grid,
    full_campaign,
    full_threshold_grid,
    parse_config_text,
    smoke_preset,
    total_runs,
)
from experiment.engine import _load_dataset, evolve, final_front, initial_population, run_one, split_for, RunStats
from experiment.management.commands.run import FLAG_KEYS
from experiment.reporting import plot_data, report
from gp_core.exceptions import ConfigurationError, IngestionError, ReportError
from gp_core.operators import VariationParams
from gp_core.trees import to_prefix
from metrics.indicators import hyperarea
from metrics.results import RunResult, read_result, write_result
from semantics.distances import SemanticThresholds


def toy_dataset(n: int = 60, n_pos: int = 18, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 3))
    labels = np.zeros(n, dtype=bool)
    labels[np.argsort(-X[:, 0])[:n_pos]] = True
    return Dataset("toy", X, labels)


def toy_config(path: Path, **overrides) -> ExperimentConfig:
    values = dict(dataset="toy", dataset_path=path, pop_size=12, generations=3, runs=3)
    values.update(overrides)
    return ExperimentConfig(**values)


class ToyDataMixin:
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._tmp = tempfile.TemporaryDirectory()
        cls.tmp = Path(cls._tmp.name)
        cls.data_path = write_canonical(toy_dataset(), cls.tmp / "toy.csv")

    @classmethod
    def tearDownClass(cls):
        _load_dataset.cache_clear()
        cls._tmp.cleanup()
        super().tearDownClass()


# =========================
# Configuración
# =========================

class ConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = ExperimentConfig(dataset="yeast1")
        self.assertEqual((cfg.pop_size, cfg.generations, cfg.runs), (500, 50, 50))
        self.assertEqual(cfg.variation, VariationParams())
        self.assertEqual((cfg.init_min_depth, cfg.init_max_depth), (1, 5))
        self.assertEqual(cfg.method, "nsga2")
        self.assertEqual(cfg.run_id(0), "yeast1__nsga2__-__r00")

    def test_parse_text(self):
        text = """
        # celda SDO
        dataset = yeast1
        variant = sdo   # tercer criterio
        ubss = 0.5
        lbss = -
        pop_size = 100
        crossover_rate = 0.7
        mutation_rate = 0.3
        """
        cfg = config_from_mapping(parse_config_text(text))
        self.assertEqual(cfg.thresholds, SemanticThresholds(0.5, None))
        self.assertEqual(cfg.pop_size, 100)
        self.assertEqual((cfg.variation.crossover_rate, cfg.variation.mutation_rate), (0.7, 0.3))
        self.assertEqual(cfg.method, "nsga2-sdo")
        self.assertEqual(cfg.run_id(3), "yeast1__nsga2-sdo__ubss=0.5,lbss=-__r03")

    def test_parse_errors(self):
        with self.assertRaises(ConfigurationError):
            parse_config_text("dataset = yeast1\ncolour = blue\n")
        with self.assertRaises(ConfigurationError):
            parse_config_text("dataset = yeast1\ndataset = ion\n")
        with self.assertRaises(ConfigurationError):
            parse_config_text("dataset yeast1\n")
        with self.assertRaises(ConfigurationError):
            config_from_mapping({"dataset": "yeast1", "pop_size": "many"})

    def test_invalid_configs(self):
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(dataset="iris")
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(dataset="yeast1", variant="scd")
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(dataset="yeast1", scheme="moead")
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(dataset="yeast1", split_mode="sometimes")
        with self.assertRaises(ConfigurationError):
            config_from_mapping({"dataset": "yeast1", "variant": "sdo", "lbss": "0.01"})

    def test_baseline_drops_thresholds(self):
        cfg = ExperimentConfig(dataset="ion", thresholds=SemanticThresholds(0.5, 0.01))
        self.assertIsNone(cfg.thresholds)
        self.assertEqual(cfg.thresholds_label, "-")

    def test_seeds(self):
        cfg = ExperimentConfig(dataset="spect", variant="ssc", thresholds=SemanticThresholds(1.0, 0.1))
        self.assertEqual(cfg.seed_for(4), cfg.seed_for(4))
        self.assertEqual(len({cfg.seed_for(i) for i in range(50)}), 50)
        # el tamaño de población no entra en la semilla
        self.assertEqual(replace(cfg, pop_size=10).seed_for(4), cfg.seed_for(4))
        self.assertNotEqual(replace(cfg, variant="sdo").seed_for(4), cfg.seed_for(4))
        self.assertNotEqual(replace(cfg, base_seed=cfg.base_seed + 1).seed_for(4), cfg.seed_for(4))

    def test_split_modes(self):
        shared = ExperimentConfig(dataset="ion", split_seed=11)
        self.assertEqual({shared.split_seed_for(i) for i in range(5)}, {11})
        per_run = replace(shared, split_mode=SPLIT_PER_RUN)
        self.assertEqual(len({per_run.split_seed_for(i) for i in range(5)}), 5)

    def test_as_dict_echoes_every_key(self):
        echo = ExperimentConfig(dataset="ion").as_dict()
        self.assertEqual(set(echo), set(KNOWN_KEYS))
        self.assertIsNone(echo["ubss"])
        self.assertEqual(config_from_mapping(echo), ExperimentConfig(dataset="ion"))

    def test_expand_grid(self):
        values = parse_config_text(
            "dataset = yeast1, ion\n"
            "variant = baseline, sdo\n"
            "ubss = 0.5, 1.0\n"
            "lbss = -, 0.01\n"
        )
        configs = expand_grid(values)
        # por dataset: 1 baseline + 4 celdas SDO
        self.assertEqual(len(configs), 10)
        self.assertEqual(sum(c.variant == "baseline" for c in configs), 2)
        self.assertEqual(len(set(configs)), 10)

    def test_full_grid(self):
        grid = full_threshold_grid()
        self.assertEqual(len(grid), 16)
        self.assertEqual(len(set(grid)), 16)
        configs = full_campaign()
        self.assertEqual(len(configs), 6 * 98)
        self.assertEqual(total_runs(configs), 29_400)
        self.assertEqual({c.dataset for c in configs}, set(ALL_DATASETS))

    def test_smoke_preset(self):
        base, sdo = smoke_preset()
        self.assertEqual((base.dataset, base.pop_size, base.generations, base.runs), ("yeast1", 100, 20, 15))
        self.assertEqual((base.method, sdo.method), ("nsga2", "nsga2-sdo"))
        self.assertEqual(sdo.thresholds, SemanticThresholds(0.5))


# =========================
# Motor
# =========================

class EngineTests(ToyDataMixin, SimpleTestCase):
    def test_same_run_twice_is_identical(self):
        cfg = toy_config(self.data_path)
        a = run_one(cfg, 1, trace=False)
        b = run_one(cfg, 1, trace=False)
        self.assertEqual(a, b)
        self.assertEqual(a.to_json_line(), b.to_json_line())

    def test_result_shape(self):
        cfg = toy_config(self.data_path)
        r = run_one(cfg, 0, trace=False)
        self.assertEqual(len(r.per_generation_sizes), cfg.generations + 1)
        self.assertAlmostEqual(r.mean_tree_size, float(np.mean(r.per_generation_sizes)))
        self.assertGreaterEqual(r.nodes_evaluated, cfg.pop_size * (cfg.generations + 1))
        self.assertTrue(0.0 <= r.hyperarea <= 1.0)
        self.assertEqual(r.hypervolume, r.hyperarea)
        self.assertGreater(len(r.front), 0)
        self.assertEqual(r.run_id, cfg.run_id(0))
        self.assertEqual(r.config["pop_size"], 12)

    def test_zero_generations_reports_initial_population(self):
        cfg = toy_config(self.data_path, generations=0)
        r = run_one(cfg, 0, trace=False)
        self.assertEqual(len(r.per_generation_sizes), 1)

        split = split_for(cfg, 0)
        pop = initial_population(cfg, split.train, np.random.default_rng(cfg.seed_for(0)), RunStats())
        self.assertEqual(r.hyperarea, hyperarea(final_front(pop, split.test)))

    def test_rectangle_kind(self):
        r = run_one(toy_config(self.data_path, hypervolume_kind="rectangle"), 0, trace=False)
        self.assertEqual(r.hypervolume, r.hypervolume_rect)

    def test_every_variant_keeps_population_size(self):
        t = SemanticThresholds(0.5, 0.01)
        for scheme in ("nsga2", "spea2"):
            for variant in ("baseline", "ssc", "scd", "sdo"):
                cfg = toy_config(self.data_path, scheme=scheme, variant=variant, thresholds=t)
                split = split_for(cfg, 0)
                archive, stats = evolve(cfg, split, seed=3)
                self.assertEqual(len(archive), cfg.pop_size, (scheme, variant))
                self.assertEqual(archive.generation, cfg.generations)
                self.assertEqual(len(stats.per_generation_sizes), cfg.generations + 1)

    def test_mislabeled_test_half_does_not_change_evolution(self):
        cfg = toy_config(self.data_path, variant="sdo", thresholds=SemanticThresholds(0.5))
        split = split_for(cfg, 0)
        canary = SplitDataset(
            train=split.train,
            test=Dataset(split.test.name, split.test.features, ~split.test.labels),
            split_seed=split.split_seed,
            train_index=split.train_index,
            test_index=split.test_index,
        )
        a, stats_a = evolve(cfg, split, seed=99)
        b, stats_b = evolve(cfg, canary, seed=99)
        self.assertEqual([to_prefix(i.genotype) for i in a], [to_prefix(i.genotype) for i in b])
        self.assertEqual([i.train_objectives for i in a], [i.train_objectives for i in b])
        self.assertEqual(stats_a, stats_b)

    def test_trace_logs_one_line_per_generation(self):
        cfg = toy_config(self.data_path, variant="sdo", thresholds=SemanticThresholds(0.5))
        with self.assertLogs("semantic_variants.trace", "INFO") as logs:
            run_one(cfg, 0, trace=True)
        self.assertEqual(len(logs.output), cfg.generations)
        self.assertTrue(all("variant=sdo hist=" in line for line in logs.output))

    def test_scd_trace_logs_every_generation(self):
        cfg = toy_config(self.data_path, variant="scd", thresholds=SemanticThresholds(0.5))
        with self.assertLogs("semantic_variants.trace", "INFO") as logs:
            run_one(cfg, 0, trace=True)
        self.assertEqual(len(logs.output), cfg.generations)
        self.assertTrue(all("variant=scd hist=" in line for line in logs.output))

    def test_dataset_mismatch_fails_before_evolving(self):
        cfg = toy_config(self.data_path, dataset="ion")
        with self.assertRaises(ConfigurationError):
            run_one(cfg, 0, trace=False)

    def test_missing_dataset_file(self):
        cfg = toy_config(self.tmp / "nope.csv")
        with self.assertRaises(IngestionError):
            run_one(cfg, 0, trace=False)

    def test_run_index_out_of_range(self):
        with self.assertRaises(ConfigurationError):
            run_one(toy_config(self.data_path), 3, trace=False)


# =========================
# Campaña
# =========================

class CampaignTests(ToyDataMixin, SimpleTestCase):
    def configs(self) -> list[ExperimentConfig]:
        base = toy_config(self.data_path, pop_size=8, generations=1)
        return [base, replace(base, variant="sdo", thresholds=SemanticThresholds(0.5))]

    def test_six_runs_and_resume(self):
        root = self.tmp / "campaign"
        manifest = run_campaign(self.configs(), 1, root=root)
        files = sorted(root.glob("**/*.jsonl"))
        self.assertEqual(len(files), 6)
        self.assertEqual(len(manifest.entries), 6)
        self.assertEqual(manifest.counts()["ok"], 6)
        self.assertTrue((root / "manifest.json").exists())
        self.assertEqual(len(load_manifest(root).entries), 6)

        victim = files[2]
        before = victim.read_text()
        victim.unlink()
        again = run_campaign(self.configs(), 1, root=root)
        self.assertEqual(len(again.executed), 1)
        self.assertEqual(again.counts()["resumed"], 5)
        self.assertEqual(victim.read_text(), before)

    def test_failures_are_recorded_not_raised(self):
        root = self.tmp / "broken"
        cfg = toy_config(self.tmp / "missing.csv", runs=2)
        with self.assertLogs("experiment.campaign", "ERROR"):
            manifest = run_campaign([cfg], 1, root=root)
        self.assertEqual(len(manifest.failed), 2)
        self.assertIn("IngestionError", manifest.failed[0].error)
        payload = json.loads((root / "manifest.json").read_text())
        self.assertEqual(payload["counts"]["failed"], 2)


# =========================
# Reportes
# =========================

def planted(run_id: str, dataset: str, scheme: str, variant: str, index: int, value: float) -> RunResult:
    return RunResult(
        run_id=run_id,
        run_index=index,
        seed=index,
        dataset=dataset,
        scheme=scheme,
        variant=variant,
        ubss=None,
        lbss=None,
        front=(ConfusionMatrix(tp=index + 1, fn=9 - index, fp=5, tn=5),),
        hyperarea=value,
        hypervolume_rect=value,
        hypervolume=value,
        mean_tree_size=10.0 + index,
        per_generation_sizes=(10.0 + index,),
        nodes_evaluated=100,
        best_accuracy=0.5,
    )


class ReportTests(ToyDataMixin, SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        base = toy_config(cls.data_path, pop_size=8, generations=1)
        cls.root = cls.tmp / "results"
        run_campaign([base, replace(base, variant="sdo", thresholds=SemanticThresholds(0.5))], 1, root=cls.root)

    def test_self_comparison(self):
        written = report(self.root, "nsga2", "nsga2", self.tmp / "self")
        table = pd.read_csv(written["hyperarea"])
        self.assertEqual(list(table["verdict"]), ["="])
        unique = pd.read_csv(written["unique"])
        self.assertTrue((unique[["mean_a", "mean_b", "pooled_a", "pooled_b"]] == 0).all().all())

    def test_variant_against_baseline(self):
        written = report(self.root, "nsga2-sdo", "nsga2", self.tmp / "sdo", against=["nsga2"])
        table = pd.read_csv(written["hyperarea"])
        self.assertEqual(list(table["thresholds"]), ["ubss=0.5,lbss=-"])
        unique = pd.read_csv(written["unique"])
        self.assertEqual(list(unique["thresholds"]), ["ubss=0.5,lbss=-", "avg"])
        wins = pd.read_csv(written["wins"])
        self.assertEqual(list(wins["competitors"]), [1])
        self.assertEqual(len(pd.read_csv(written["runs"])), 6)

    def test_missing_run_is_reported(self):
        root = self.tmp / "incomplete"
        shutil.copytree(self.root, root)
        manifest = load_manifest(root)
        gone = manifest.entries[0]
        manifest.result_path(gone).unlink()
        with self.assertRaises(ReportError) as ctx:
            report(root, "nsga2-sdo", "nsga2", self.tmp / "x")
        self.assertEqual(ctx.exception.missing_run_ids, [gone.run_id])

    def test_unknown_method(self):
        with self.assertRaises(ReportError):
            report(self.root, "spea2", "nsga2", self.tmp / "y")

    def test_plot_data(self):
        written = plot_data(
            self.root, "toy", "nsga2-sdo", "nsga2", self.tmp / "plots",
            thresholds="ubss=0.5,lbss=-", exclusive=True,
        )
        self.assertEqual(len(written), 4)
        for path in written.values():
            self.assertEqual(list(pd.read_csv(path).columns), ["x", "y"])

    def test_planted_verdict_grid(self):
        root = self.tmp / "planted"
        samples = {
            # dataset: (A, B)
            "ion": ([0.90, 0.91, 0.92, 0.93, 0.94], [0.50, 0.51, 0.52, 0.53, 0.54]),
            "spect": ([0.20, 0.21, 0.22, 0.23, 0.24], [0.60, 0.61, 0.62, 0.63, 0.64]),
            "yeast1": ([0.1, 0.3, 0.5, 0.7, 0.9], [0.2, 0.4, 0.6, 0.8, 1.0]),
        }
        entries = []
        for dataset, pair in samples.items():
            for scheme, values in zip(("spea2", "nsga2"), pair):
                for i, value in enumerate(values):
                    run_id = f"{dataset}__{scheme}__-__r{i:02d}"
                    rel = f"{dataset}/{run_id}.jsonl"
                    write_result(planted(run_id, dataset, scheme, "baseline", i, value), root / rel)
                    entries.append(ManifestEntry(run_id, dataset, scheme, "-", i, i, rel, "ok"))
        CampaignManifest(root=root, entries=entries).write()

        table = pd.read_csv(report(root, "spea2", "nsga2", self.tmp / "planted_out")["hyperarea"])
        verdicts = dict(zip(table["dataset"], table["verdict"]))
        self.assertEqual(verdicts, {"ion": "+", "spect": "-", "yeast1": "="})
        ion = table[table["dataset"] == "ion"].iloc[0]
        self.assertAlmostEqual(ion["mean_a"], 0.92)
        self.assertAlmostEqual(ion["p_value"], 2 / 252, places=6)


# =========================
# Comandos
# =========================

class CommandTests(ToyDataMixin, SimpleTestCase):
    def test_run_command(self):
        out = StringIO()
        results = self.tmp / "cmd_results"
        call_command(
            "run", "--dataset", "toy", "--dataset-path", str(self.data_path), "--output-dir", str(results),
            "--pop-size", "8", "--generations", "1", "--runs", "2", "--run-index", "1", stdout=out,
        )
        self.assertIn("OK run nsga2 -: runs=1", out.getvalue())
        files = list(results.glob("toy/*.jsonl"))
        self.assertEqual([f.name for f in files], ["toy__nsga2__-__r01.jsonl"])
        self.assertEqual(read_result(files[0]).run_index, 1)

    def test_run_flags_cover_every_config_key(self):
        self.assertEqual(set(FLAG_KEYS), set(KNOWN_KEYS))

    def test_run_command_variation_flags(self):
        results = self.tmp / "flag_results"
        call_command(
            "run", "--dataset", "toy", "--dataset-path", str(self.data_path), "--output-dir", str(results),
            "--pop-size", "8", "--generations", "1", "--runs", "1",
            "--internal-node-bias", "0.5", "--mutation-max-depth", "2", stdout=StringIO(),
        )
        (path,) = results.glob("toy/*.jsonl")
        config = read_result(path).config
        self.assertEqual((config["internal_node_bias"], config["mutation_max_depth"]), (0.5, 2))

    def test_run_command_with_config_file(self):
        conf = self.tmp / "sdo.conf"
        conf.write_text(
            f"dataset = toy\ndataset_path = {self.data_path}\noutput_dir = {self.tmp / 'conf_results'}\n"
            "variant = sdo\nubss = 0.5\nlbss = -\npop_size = 8\ngenerations = 1\nruns = 1\n"
        )
        out = StringIO()
        call_command("run", "--config", str(conf), stdout=out)
        self.assertIn("OK run nsga2-sdo ubss=0.5,lbss=-", out.getvalue())

    def test_run_command_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("run", "--dataset", "yeast1", "--variant", "scd", stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_campaign_command_with_grid(self):
        grid = self.tmp / "grid.conf"
        grid.write_text(
            f"dataset = toy\ndataset_path = {self.data_path}\n"
            "variant = baseline, scd\nubss = 0.5\nlbss = -, 0.01\npop_size = 8\ngenerations = 1\nruns = 2\n"
        )
        out = StringIO()
        call_command("campaign", "--grid", str(grid), "--results-dir", str(self.tmp / "grid_results"), stdout=out)
        self.assertIn("campaign: configs=3 runs=6", out.getvalue())
        self.assertIn("OK campaign", out.getvalue())

    def test_campaign_dry_run_of_full_grid(self):
        out = StringIO()
        call_command("campaign", "--full-grid", "--dry-run", stdout=out)
        self.assertIn("runs=29400", out.getvalue())

    def test_campaign_command_incomplete(self):
        grid = self.tmp / "broken.conf"
        grid.write_text(f"dataset = toy\ndataset_path = {self.tmp / 'missing.csv'}\nruns = 1\npop_size = 4\n")
        with self.assertLogs("experiment.campaign", "ERROR"), self.assertRaises(CommandError) as ctx:
            call_command("campaign", "--grid", str(grid), "--results-dir", str(self.tmp / "broken_results"),
                         stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 3)

    def test_report_without_manifest(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("report", str(self.tmp / "nowhere"), "nsga2", "spea2", stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


@tag("smoke")
class SmokeCampaignTests(SimpleTestCase):
    def test_sdo_not_worse_than_baseline_on_yeast1(self):
        if not canonical_path("yeast1").exists():
            self.skipTest("yeast1.csv not ingested")
        with tempfile.TemporaryDirectory() as tmp:
            manifest = run_campaign(smoke_preset(), root=Path(tmp))
            self.assertFalse(manifest.failed)
            by_method: dict[str, list[float]] = {}
            for entry in manifest.entries:
                by_method.setdefault(entry.method, []).append(read_result(manifest.result_path(entry)).hyperarea)
        self.assertGreaterEqual(np.mean(by_method["nsga2-sdo"]), np.mean(by_method["nsga2"]))
