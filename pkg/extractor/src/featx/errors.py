"""Exception taxonomy for the extractor.

Everything raised by the public API derives from ExtractorError so the
CLI can map failures onto exit codes without pattern-matching messages.
"""

from __future__ import annotations


class ExtractorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ExtractorError):
    """Invalid option or parameter value."""


class DataError(ExtractorError):
    """Input directory or its contents violate a precondition."""


class WeightsError(ExtractorError):
    """Pretrained backbone weights could not be obtained."""
