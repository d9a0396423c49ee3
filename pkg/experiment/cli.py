# experiment/cli.py
from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator

from django.core.management.base import CommandError

from gp_core.exceptions import ConfigurationError, ContractViolation, DataError, ReportError

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INCOMPLETE = 3


@contextmanager
def command_errors() -> Iterator[None]:
    """Traduce errores del dominio a CommandError con el código de salida."""
    try:
        yield
    except (ConfigurationError, ContractViolation) as e:
        raise CommandError(str(e), returncode=EXIT_USAGE)
    except DataError as e:
        raise CommandError(str(e), returncode=EXIT_DATA)
    except ReportError as e:
        raise CommandError(str(e), returncode=EXIT_INCOMPLETE)
