"""
errors.py
--------------------
Exception types the CLI maps onto exit codes.

Numerical operations keep raising plain ValueError for bad arguments; the
classes here mark the categories that decide how a command exits.
"""


class HspgError(Exception):
    """Base class for hspg_ops errors."""


class UsageError(HspgError):
    """Bad command line (exit code 1)."""


class ConfigError(HspgError, ValueError):
    """Inconsistent solver or experiment configuration (exit code 1)."""


class DataError(HspgError):
    """Unusable input data (exit code 2)."""


class LibsvmFormatError(DataError, ValueError):
    """Malformed LIBSVM line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmptyDatasetError(DataError, ValueError):
    """Dataset without a single instance."""


class VerificationError(HspgError):
    """A property suite failed (exit code 3)."""
