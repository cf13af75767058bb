"""
Simulator error hierarchy.
Everything derives from ValueError so callers that only know about
ValueError keep working.
"""
from typing import Any, Dict, List, Optional


class SimulatorError(ValueError):
    """Base class for every error raised by the simulator."""


class DomainError(SimulatorError):
    """A value lies outside the mathematical domain of an operation."""


class ShapeError(SimulatorError):
    """Array or network dimensions do not line up."""


class ReplayNotReadyError(SimulatorError):
    """The replay memory holds fewer transitions than requested."""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(f"replay memory holds {available} transitions, {requested} requested")


class ConfigParseError(SimulatorError):
    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ConfigValidationError(SimulatorError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"invalid value for {field}: {message}")


class ModelFileError(SimulatorError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ResultsFileError(SimulatorError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class SweepError(SimulatorError):
    """One or more sweep cells failed; every other cell still ran."""

    def __init__(self, failures: List[Dict[str, Any]], rows: Optional[list] = None):
        self.failures = failures
        self.rows = rows or []
        cells = ", ".join(
            f"{f['algorithm']}/D={f['d2d_count']}/seed={f['seed']}: {f['error']}" for f in failures
        )
        super().__init__(f"{len(failures)} sweep cell(s) failed: {cells}")
