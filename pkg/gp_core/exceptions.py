from __future__ import annotations

from typing import Iterable


class MogpError(Exception):
    """Base de todos los errores del proyecto."""


class ConfigurationError(MogpError, ValueError):
    pass


class ContractViolation(MogpError, ValueError):
    pass


class DataError(MogpError):
    pass


class IngestionError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SplitError(DataError):
    pass


class ReportError(MogpError):
    def __init__(self, message: str, missing_run_ids: Iterable[str] = ()):
        self.missing_run_ids = sorted(missing_run_ids)
        if self.missing_run_ids:
            message = f"{message}: {', '.join(self.missing_run_ids)}"
        super().__init__(message)
