"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES), so solver and
pipeline errors stay classifiable from shell scripts.
"""

from __future__ import annotations


class QuboClustError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QuboClustError):
    """A vector or matrix has the wrong length or shape."""


class DomainError(QuboClustError):
    """A value lies outside its allowed domain (non-binary bit, bad label, non-finite coordinate)."""


class ConfigurationError(QuboClustError):
    """A solver/builder configuration is inconsistent or unsatisfiable."""


class SizeLimitError(QuboClustError):
    """An exhaustive operation was asked to enumerate beyond its guard limit."""


class DegeneracyError(QuboClustError):
    """A pipeline could not make progress; carries the partial result."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
