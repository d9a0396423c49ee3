from __future__ import annotations

from django.conf import settings
from django.core.management.base import BaseCommand

from experiment.cli import command_errors
from experiment.config import config_from_mapping, read_config_file
from experiment.engine import run_one
from metrics.results import write_result

# flag de línea de comandos -> clave de config
FLAG_KEYS = (
    "dataset", "scheme", "variant", "ubss", "lbss", "pop_size", "generations", "runs",
    "base_seed", "split_seed", "split_mode", "dataset_path", "output_dir", "ssc_max_trials",
    "init_min_depth", "init_max_depth", "hypervolume_kind",
    "crossover_rate", "mutation_rate", "internal_node_bias", "tournament_size", "max_length", "max_depth",
    "mutation_max_depth",
)


class Command(BaseCommand):
    help = "Ejecuta las corridas de UNA configuración (flags o archivo clave = valor) y guarda un JSON por corrida."

    def add_arguments(self, parser):
        parser.add_argument("--config", help="archivo clave = valor; los flags lo pisan")
        for key in FLAG_KEYS:
            parser.add_argument(f"--{key.replace('_', '-')}", dest=key)
        parser.add_argument("--run-index", type=int, action="append", dest="run_indexes",
                            help="solo esta corrida (repetible); default: todas")
        parser.add_argument("--trace", action="store_true", help="log semántico por generación")

    def handle(self, *args, **options):
        with command_errors():
            values = read_config_file(options["config"]) if options["config"] else {}
            values.update({k: options[k] for k in FLAG_KEYS if options.get(k) is not None})
            cfg = config_from_mapping(values)
            trace = options["trace"] or settings.MOGP_TRACE_SEMANTICS

            indexes = options["run_indexes"] or list(range(cfg.runs))
            for run_index in indexes:
                result = run_one(cfg, run_index, trace=trace)
                path = write_result(result, cfg.result_path(run_index))
                self.stdout.write(
                    f"{result.run_id} hyperarea={result.hyperarea:.4f} front={len(result.front)} "
                    f"mean_size={result.mean_tree_size:.2f} -> {path}"
                )

        self.stdout.write(self.style.SUCCESS(f"OK run {cfg.method} {cfg.thresholds_label}: runs={len(indexes)}"))
