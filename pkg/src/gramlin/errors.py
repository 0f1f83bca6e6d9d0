"""Exception types shared across the package."""

from __future__ import annotations


class GramlinError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(GramlinError):
    """Raised when an input matrix is malformed (NaN entries, ragged rows, bad file)."""


class FormatError(GramlinError):
    """Raised when a serialized container or matrix file cannot be parsed."""


class DimensionError(GramlinError):
    """Raised when operand shapes or index ranges do not line up."""
