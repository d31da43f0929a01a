"""Exception hierarchy shared by every ccbr module."""


class CCBRError(Exception):
    """Base class for all errors raised by ccbr."""


class ConfigError(CCBRError, ValueError):
    """Invalid or infeasible configuration value."""


class LoadError(CCBRError, OSError):
    """A required input file is missing or unreadable."""


class ParseError(CCBRError, ValueError):
    """Malformed row in an input file."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ValidationError(CCBRError, ValueError):
    """A dataset or model invariant does not hold."""


class UnsupportedInputError(CCBRError, ValueError):
    """The dataset lacks the signal an operation needs."""


class ShapeError(CCBRError, ValueError):
    """Array dimensions do not agree."""


class FitError(CCBRError, ValueError):
    """A model cannot be fitted to the given data."""


class DegenerateLabelsError(FitError):
    """Too few distinct classes, or an empty class."""


class DegenerateTargetError(FitError):
    """Target has fewer distinct values than quantization levels."""


class UndefinedMetricError(CCBRError, ValueError):
    """Metric is undefined for the given data (e.g. constant target)."""


class SchemaError(CCBRError, ValueError):
    """A JSON document or report lacks a required field."""
