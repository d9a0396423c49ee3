from __future__ import annotations

from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from experiment.campaign import run_campaign
from experiment.cli import EXIT_INCOMPLETE, EXIT_USAGE, command_errors
from experiment.config import expand_grid, full_campaign, read_config_file, smoke_preset, total_runs
from metrics.results import read_result

PRESET_SMOKE = "smoke"


class Command(BaseCommand):
    help = "Corre una campaña (grilla, preset smoke o grilla completa) con joblib; reanudable."

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--grid", help="archivo clave = valor con listas separadas por comas")
        source.add_argument("--preset", choices=[PRESET_SMOKE])
        source.add_argument("--full-grid", action="store_true", help="6 datasets x 98 celdas")
        parser.add_argument("--runs", type=int, help="corridas por celda (pisa la grilla)")
        parser.add_argument("--parallelism", type=int, default=None,
                            help=f"procesos (default MOGP_PARALLELISM={settings.MOGP_PARALLELISM})")
        parser.add_argument("--results-dir", default=None)
        parser.add_argument("--trace", action="store_true")
        parser.add_argument("--dry-run", action="store_true", help="solo muestra cuántas corridas hay")

    def handle(self, *args, **options):
        with command_errors():
            overrides = {"runs": options["runs"]} if options["runs"] else {}
            if options["grid"]:
                values = read_config_file(options["grid"])
                values.update({k: str(v) for k, v in overrides.items()})
                configs = expand_grid(values)
            elif options["preset"] == PRESET_SMOKE:
                configs = smoke_preset(**overrides)
            else:
                configs = full_campaign(**overrides)

            self.stdout.write(f"campaign: configs={len(configs)} runs={total_runs(configs)}")
            if options["dry_run"]:
                return
            if options["parallelism"] is not None and options["parallelism"] < 1:
                raise CommandError("--parallelism must be >= 1", returncode=EXIT_USAGE)

            root = Path(options["results_dir"] or settings.MOGP_RESULTS_DIR)
            manifest = run_campaign(configs, options["parallelism"], root=root, trace=options["trace"])

        counts = manifest.counts()
        self.stdout.write(
            f"campaign: ok={counts['ok']} resumed={counts['resumed']} failed={counts['failed']} -> {manifest.path}"
        )
        if options["preset"] == PRESET_SMOKE and not manifest.failed:
            self._smoke_summary(manifest, configs)
        if manifest.failed:
            raise CommandError(
                f"{len(manifest.failed)} run(s) failed, see {manifest.path}", returncode=EXIT_INCOMPLETE
            )
        self.stdout.write(self.style.SUCCESS("OK campaign"))

    def _smoke_summary(self, manifest, configs) -> None:
        by_method: dict[str, list[float]] = {}
        for entry in manifest.entries:
            by_method.setdefault(entry.method, []).append(read_result(manifest.result_path(entry)).hyperarea)
        baseline, sdo = (configs[0].method, configs[1].method)
        mean_base = float(np.mean(by_method[baseline]))
        mean_sdo = float(np.mean(by_method[sdo]))
        verdict = "PASS" if mean_sdo >= mean_base else "FAIL"
        self.stdout.write(f"smoke: {baseline}={mean_base:.4f} {sdo}={mean_sdo:.4f} sign-check={verdict}")
