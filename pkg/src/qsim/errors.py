"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration errors exit 1,
ingestion/IO errors exit 2, internal invariant violations exit 3.
"""


class QsimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QsimError):
    """An invalid parameter value or incompatible shapes."""


class IngestionError(QsimError):
    """Bad input data: non-finite entries or malformed records."""


class StreamTruncationError(IngestionError):
    """A stream ran out of vectors before an experiment could finish."""


class InvariantViolation(QsimError):
    """An internal consistency check failed; indicates a bug, not bad input."""
