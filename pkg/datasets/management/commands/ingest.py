from __future__ import annotations

from django.core.management.base import BaseCommand, CommandError

from datasets.catalog import ALL_DATASETS, get_spec
from datasets.services import canonical_path, ingest, write_canonical
from gp_core.exceptions import ConfigurationError, DataError


class Command(BaseCommand):
    help = "Convierte un archivo UCI original al CSV canónico (f0..fn-1,label) y verifica los conteos."

    def add_arguments(self, parser):
        parser.add_argument("name", choices=ALL_DATASETS)
        parser.add_argument("raw", help="archivo UCI tal como se distribuye")
        parser.add_argument("out", nargs="?", help="CSV de salida (default: MOGP_DATASETS_DIR/<name>.csv)")
        parser.add_argument("--also", action="append", default=[], help="archivo extra a concatenar (SPECT.test)")
        parser.add_argument("--lenient", action="store_true", help="conteos distintos al catálogo solo avisan")

    def handle(self, *args, **options):
        name = options["name"]
        try:
            spec = get_spec(name)
            ds = ingest([options["raw"], *options["also"]], spec, lenient=options["lenient"])
        except ConfigurationError as e:
            raise CommandError(str(e), returncode=1)
        except DataError as e:
            raise CommandError(str(e), returncode=2)

        out = write_canonical(ds, options["out"] or canonical_path(name))
        self.stdout.write(self.style.SUCCESS(
            f"OK ingest {name}: rows={len(ds)} positive={ds.positive_count} "
            f"features={ds.feature_count} checksum={ds.checksum()} -> {out}"
        ))
