from __future__ import annotations

from django.core.management.base import BaseCommand

from experiment.cli import command_errors
from experiment.reporting import NO_THRESHOLDS, plot_data


class Command(BaseCommand):
    help = "Exporta CSV x,y de frentes PO por método y de puntos encontrados por un solo método."

    def add_arguments(self, parser):
        parser.add_argument("manifest")
        parser.add_argument("dataset")
        parser.add_argument("method_a")
        parser.add_argument("method_b")
        parser.add_argument("--thresholds", default=NO_THRESHOLDS, help='p.ej. "ubss=0.5,lbss=-"')
        parser.add_argument("--exclusive", action="store_true")
        parser.add_argument("--out", default="plots")

    def handle(self, *args, **options):
        with command_errors():
            written = plot_data(
                options["manifest"], options["dataset"], options["method_a"], options["method_b"], options["out"],
                thresholds=options["thresholds"], exclusive=options["exclusive"],
            )
        for name, path in written.items():
            self.stdout.write(f"{name}: {path}")
        self.stdout.write(self.style.SUCCESS("OK plot_data"))
