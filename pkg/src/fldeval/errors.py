"""Exception taxonomy used across the package.

Every error raised by the public API derives from FldError so callers
(and the CLI exit-code mapping) can distinguish configuration mistakes,
malformed data, and numerical failures.
"""

from __future__ import annotations


class FldError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FldError):
    """Invalid option or parameter value."""


class DataError(FldError):
    """Input data violates a precondition (shape, emptiness, non-finite)."""


class DimensionError(FldError):
    """Feature dimensions of two inputs do not agree."""


class FormatError(FldError):
    """A file does not conform to its declared format.

    Carries the byte offset (binary inputs) or line number (text inputs)
    where the problem was found, when known.
    """

    def __init__(self, message: str, *, offset: int | None = None,
                 line: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        elif line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class NumericalError(FldError):
    """A computation produced a non-finite or otherwise invalid value."""

    def __init__(self, message: str, *, component: int | None = None):
        if component is not None:
            message = f"{message} (component {component})"
        super().__init__(message)
        self.component = component


class FitError(FldError):
    """Optimization diverged. Carries the objective trace up to failure."""

    def __init__(self, message: str, *, trace=None):
        super().__init__(message)
        self.trace = trace
