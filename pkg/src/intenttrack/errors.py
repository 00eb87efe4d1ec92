"""Exception taxonomy shared across the package.

Callers can catch :class:`IntentTrackError` to handle any library failure;
the subclasses distinguish bad shapes, numerical breakdown, violated
preconditions, and degenerate filter states. The CLI maps these onto its
exit codes.
"""

from __future__ import annotations


class IntentTrackError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(IntentTrackError):
    """Array arguments have incompatible or non-conforming shapes."""


class NumericError(IntentTrackError):
    """A computation failed numerically (non-finite values, singular solve)."""


class ContractViolationError(IntentTrackError):
    """A documented precondition was violated by the caller."""


class FilterDegenerateError(NumericError):
    """Every particle weight collapsed to zero; the filter cannot continue."""


class ConfigError(IntentTrackError):
    """A run configuration is missing, malformed, or inconsistent."""


class DataError(IntentTrackError):
    """An input data file is missing or does not match the expected schema."""
