"""Exception hierarchy. Each error carries the CLI exit code it maps to."""
from __future__ import annotations

from typing import Any, Optional

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class NabasinError(Exception):
    exit_code: int = EXIT_NUMERIC


class ParameterError(NabasinError, ValueError):
    exit_code = EXIT_SCHEMA


class DomainError(NabasinError):
    pass


class UnsupportedDirection(NabasinError):
    pass


class EscapedToInfinity(NabasinError):
    """Orbit left the floating range. `points` holds the finite prefix."""

    def __init__(self, last_index: int, points: Optional[list] = None):
        super().__init__(f"orbit overflow after step {last_index}")
        self.last_index = last_index
        self.points = points or []


class NumericOverflow(NabasinError):
    pass


class ExpansionViolation(NabasinError):
    pass


class HypothesisViolation(NabasinError):
    pass


class ConvergenceError(NabasinError):
    def __init__(self, message: str, table: Optional[list[dict[str, Any]]] = None):
        super().__init__(message)
        self.table = table or []


class SearchFailure(NabasinError):
    def __init__(self, message: str, inequality: str = ""):
        super().__init__(message)
        self.inequality = inequality


class NotInBasin(NabasinError):
    pass


class Inconclusive(NabasinError):
    pass


class ScenarioError(NabasinError):
    exit_code = EXIT_SCHEMA

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ArtifactError(NabasinError):
    exit_code = EXIT_IO
