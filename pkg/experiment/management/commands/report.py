from __future__ import annotations

from django.core.management.base import BaseCommand

from experiment.cli import command_errors
from experiment.reporting import report


class Command(BaseCommand):
    help = "Compara dos métodos de una campaña: hyperarea (Wilcoxon), frente PO, soluciones únicas, tamaños."

    def add_arguments(self, parser):
        parser.add_argument("manifest", help="manifest.json o el directorio de resultados")
        parser.add_argument("method_a", help="p.ej. nsga2-sdo")
        parser.add_argument("method_b", help="p.ej. nsga2")
        parser.add_argument("--against", nargs="+", default=[], help="competidores para el conteo de victorias de A")
        parser.add_argument("--out", default="reports")

    def handle(self, *args, **options):
        with command_errors():
            written = report(
                options["manifest"], options["method_a"], options["method_b"], options["out"],
                against=options["against"],
            )
        for name, path in written.items():
            self.stdout.write(f"{name}: {path}")
        self.stdout.write(self.style.SUCCESS(f"OK report {options['method_a']} vs {options['method_b']}"))
