"""Exception taxonomy for the benchmark harness.

Every error raised by this package derives from :class:`TempusError` so
callers can catch the whole family at once.  Errors that mark a single
forecast attempt as failed (rather than the run as invalid) derive from
:class:`ForecastError` or :class:`AdapterError`; the pipeline converts
those into missing result cells instead of aborting.
"""

from __future__ import annotations


class TempusError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(TempusError):
    """A task, frame, or manifest violates a structural invariant.

    The message names the first violated invariant.
    """


class InsufficientHistory(TempusError):
    """The series is too short for the requested window layout."""

    def __init__(self, n_timestamps: int, required: int) -> None:
        self.n_timestamps = n_timestamps
        self.required = required
        super().__init__(
            f"series has {n_timestamps} timestamps but the window layout "
            f"requires at least {required}"
        )


class ShapeMismatch(TempusError):
    """Two arrays that must agree in shape do not."""


class UndefinedMetric(TempusError):
    """The metric's denominator vanishes; the value is reported as missing."""


class ForecastError(TempusError):
    """Base class for per-attempt forecaster failures (missing cell, not a crash)."""


class InvalidPeriod(ForecastError):
    """A seasonal period is outside its admissible range for the given context."""


class NonPositiveData(ForecastError):
    """A method's data-sign requirement is violated.

    Multiplicative smoothing needs strictly positive values; intermittent
    demand needs non-negative values.
    """


class NumericalFailure(ForecastError):
    """A fit produced a non-finite forecast value."""


class SingularFit(ForecastError):
    """A least-squares fit has a rank-deficient design matrix."""


class NonConvergence(ForecastError):
    """An iterative fit hit its iteration cap before meeting tolerance."""


class AllAssignmentsFailed(TempusError):
    """Every hyperparameter assignment in the grid failed during tuning."""


class UnknownModel(TempusError):
    """A model id does not name a known forecaster or pivot row."""


class ParseError(TempusError):
    """A CSV cell could not be parsed."""

    def __init__(self, line: int, column: str, reason: str) -> None:
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column!r}: {reason}")


class NonMonotonicTimestamps(TempusError):
    """Timestamps are not strictly increasing."""

    def __init__(self, line: int) -> None:
        self.line = line
        super().__init__(f"timestamp at line {line} does not increase")


class AdapterError(TempusError):
    """Base class for external-adapter failures (missing cell, not a crash)."""


class AdapterTimeout(AdapterError):
    """The adapter did not answer within the per-request timeout."""


class AdapterCrash(AdapterError):
    """The adapter process exited while a request was outstanding."""

    def __init__(self, exit_code: int | None, stderr: str) -> None:
        self.exit_code = exit_code
        self.stderr = stderr
        super().__init__(f"adapter exited with code {exit_code}: {stderr.strip()[:500]}")


class MalformedResponse(AdapterError):
    """The adapter wrote a line that is not a valid response."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(reason)
