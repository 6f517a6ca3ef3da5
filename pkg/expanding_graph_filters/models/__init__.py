"""Models package with all schema definitions and errors."""

from .errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    EmptyStreamError,
    GraphFilterError,
    InvariantViolation,
    StreamParseError,
    StreamSchemaError,
    UndefinedMetricError,
)
from .schemas import (
    AuditReport,
    ExperimentResult,
    RunFailure,
    RunResult,
    Selection,
    StepRecord,
    WriteResult,
)

__all__ = [
    "AuditReport",
    "ExperimentResult",
    "RunFailure",
    "RunResult",
    "Selection",
    "StepRecord",
    "WriteResult",
    "ConfigurationError",
    "DimensionError",
    "DivergenceError",
    "EmptyStreamError",
    "GraphFilterError",
    "InvariantViolation",
    "StreamParseError",
    "StreamSchemaError",
    "UndefinedMetricError",
]
