"""Exception types shared across the library."""

from __future__ import annotations


class ObskitError(Exception):
    """Base class for all library-specific errors."""


class ZeroRange(ObskitError):
    """Target coincides with the observer: range below the configured floor.

    Bearing and range rate are undefined at zero range.
    """

    def __init__(self, message: str, target_index: int | None = None,
                 time: float | None = None):
        super().__init__(message)
        self.target_index = target_index
        self.time = time


class NonPositiveRange(ObskitError):
    """Range-history construction produced a non-positive range.

    The requested ambiguity parameters are infeasible on this window.
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NonPositiveAlpha(ObskitError):
    """Bearing-preserving scale factor must stay strictly positive."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class DegenerateSystem(ObskitError):
    """Least-squares system has fewer rows than unknowns; no estimate possible."""


class ParseError(ObskitError):
    """Scenario file is unreadable or not valid JSON."""


class ValidationError(ObskitError):
    """Scenario content violates an invariant.

    ``field`` holds the dotted path of the offending entry, e.g. ``time.end``
    or ``targets[1].coeffs``.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
