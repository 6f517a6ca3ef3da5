"""Exception hierarchy shared across the package."""


class GraphFilterError(Exception):
    """Base class for all package errors."""


class DimensionError(GraphFilterError, ValueError):
    """Operand lengths or shapes disagree (includes stale shift matrices)."""


class InvariantViolation(GraphFilterError, ValueError):
    """A weight, probability, or simplex invariant does not hold."""


class ConfigurationError(GraphFilterError, ValueError):
    """Invalid configuration, e.g. filter order 0 or a missing bound series."""


class DivergenceError(GraphFilterError, ArithmeticError):
    """An online learner produced a non-finite or exploding prediction."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class StreamParseError(GraphFilterError, ValueError):
    """A CSV row could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        location = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class StreamSchemaError(GraphFilterError, ValueError):
    """Stream records are well formed but inconsistent with each other."""


class EmptyStreamError(StreamSchemaError):
    """A stream file holds no records."""


class UndefinedMetricError(GraphFilterError, ValueError):
    """A metric is undefined for the given input (e.g. NRMSE of a constant truth)."""
