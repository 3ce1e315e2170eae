"""Task model and rolling-window planning.

Integer positions 0..T-1 are the canonical internal time axis; timestamps
carried by a :class:`SeriesFrame` are metadata used for parsing, display,
and monotonicity checks.  All window bounds are half-open ``[start, end)``
position intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientHistory, SchemaError

VALUE_KINDS = ("continuous", "count", "categorical", "binary")

DEFAULT_TUNE_WINDOWS = 3
DEFAULT_TEST_WINDOWS = 3


@dataclass(frozen=True, eq=False)
class SeriesFrame:
    """A multivariate series: timestamps, target channels, covariate channels.

    timestamps are integers or ISO-8601 strings and must be strictly
    increasing; targets is (n_targets, T) with no NaNs; covariates is
    (n_covariates, T) and may have zero rows.  Violations surface through
    :func:`validate_task`.
    """

    timestamps: tuple
    targets: np.ndarray
    covariates: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=np.float64))
        cov = self.covariates
        if cov is None:
            cov = np.empty((0, len(self.timestamps)), dtype=np.float64)
        object.__setattr__(self, "covariates", np.asarray(cov, dtype=np.float64))

    @property
    def n_timestamps(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """One forecasting task: a series plus its evaluation geometry."""

    task_id: str
    context_len: int
    horizon: int
    data: SeriesFrame
    value_kinds: tuple[str, ...] = ()
    frequency_label: str = ""

    def __post_init__(self) -> None:
        if not self.value_kinds:
            n = self.data.targets.shape[0] if self.data.targets.ndim == 2 else 1
            object.__setattr__(self, "value_kinds", ("continuous",) * n)
        else:
            object.__setattr__(self, "value_kinds", tuple(self.value_kinds))

    @property
    def n_targets(self) -> int:
        return int(self.data.targets.shape[0])

    @property
    def n_covariates(self) -> int:
        return int(self.data.covariates.shape[0])


@dataclass(frozen=True, eq=False)
class ForecastMatrix:
    """Validated forecast values, shape (n_targets, horizon), finite only."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise SchemaError(f"forecast values must be 2-D, got ndim={values.ndim}")
        if not np.isfinite(values).all():
            raise SchemaError("forecast values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Window:
    """One rolling window: fit context immediately followed by an eval segment."""

    context_start: int
    context_end: int
    eval_start: int
    eval_end: int

    def __post_init__(self) -> None:
        if self.context_end != self.eval_start:
            raise SchemaError("eval_start must equal context_end")


@dataclass(frozen=True)
class WindowPlan:
    """Tune and test windows laid out end-anchored with stride == horizon."""

    context_len: int
    horizon: int
    tune_windows: tuple[Window, ...] = field(default=())
    test_windows: tuple[Window, ...] = field(default=())

    @property
    def stride(self) -> int:
        return self.horizon


def validate_task(task: TaskSpec) -> TaskSpec:
    """Check every task invariant; raise SchemaError naming the first violation."""
    if not isinstance(task.task_id, str) or not task.task_id:
        raise SchemaError("task_id must be a non-empty string")
    if int(task.context_len) < 1:
        raise SchemaError(f"context_len must be >= 1, got {task.context_len}")
    if int(task.horizon) < 1:
        raise SchemaError(f"horizon must be >= 1, got {task.horizon}")

    frame = task.data
    targets = frame.targets
    if targets.ndim != 2:
        raise SchemaError(f"targets must be 2-D (n_targets, T), got ndim={targets.ndim}")
    n_targets, n_timestamps = targets.shape
    if n_targets < 1:
        raise SchemaError("n_targets must be >= 1")

    if len(task.value_kinds) != n_targets:
        raise SchemaError(
            f"value_kinds has {len(task.value_kinds)} entries for {n_targets} targets"
        )
    for i, kind in enumerate(task.value_kinds):
        if kind not in VALUE_KINDS:
            raise SchemaError(f"value_kinds[{i}] = {kind!r} is not one of {VALUE_KINDS}")

    if len(frame.timestamps) != n_timestamps:
        raise SchemaError(
            f"timestamps has {len(frame.timestamps)} entries for {n_timestamps} columns"
        )
    for j in range(1, len(frame.timestamps)):
        prev, cur = frame.timestamps[j - 1], frame.timestamps[j]
        if type(prev) is not type(cur):
            raise SchemaError(f"timestamps mix types at position {j}")
        if not prev < cur:
            raise SchemaError(f"timestamps must be strictly increasing at position {j}")

    if np.isnan(targets).any():
        bad = int(np.argwhere(np.isnan(targets))[0][0])
        raise SchemaError(f"targets contain NaN (target index {bad})")

    cov = frame.covariates
    if cov.ndim != 2:
        raise SchemaError(f"covariates must be 2-D (n_covariates, T), got ndim={cov.ndim}")
    if cov.shape[0] > 0 and cov.shape[1] != n_timestamps:
        raise SchemaError(
            f"covariates have {cov.shape[1]} columns but there are {n_timestamps} timestamps"
        )

    for i, kind in enumerate(task.value_kinds):
        row = targets[i]
        if kind in ("count", "categorical"):
            if not np.array_equal(row, np.floor(row)) or (row < 0).any():
                raise SchemaError(
                    f"value_kinds[{i}] = {kind!r} requires non-negative integers "
                    f"(target index {i})"
                )
        elif kind == "binary":
            if not np.isin(row, (0.0, 1.0)).all():
                raise SchemaError(
                    f"value_kinds[{i}] = 'binary' requires values in {{0, 1}} "
                    f"(target index {i})"
                )
    return task


def plan_windows(
    n_timestamps: int,
    context_len: int,
    horizon: int,
    n_tune: int,
    n_test: int,
) -> WindowPlan:
    """Lay out n_tune + n_test windows end-anchored on the series.

    Evaluation segments tile the last (n_tune + n_test) * horizon positions
    without gaps, tune windows strictly before test windows; each context is
    the context_len positions immediately preceding its eval segment.
    """
    if context_len < 1 or horizon < 1:
        raise ValueError("context_len and horizon must be >= 1")
    if n_test < 1:
        raise ValueError(f"n_test must be >= 1, got {n_test}")
    if n_tune < 0:
        raise ValueError(f"n_tune must be >= 0, got {n_tune}")

    required = context_len + horizon * (n_tune + n_test)
    if n_timestamps < required:
        raise InsufficientHistory(n_timestamps, required)

    first_eval = n_timestamps - horizon * (n_tune + n_test)
    windows = []
    for k in range(n_tune + n_test):
        eval_start = first_eval + k * horizon
        windows.append(
            Window(
                context_start=eval_start - context_len,
                context_end=eval_start,
                eval_start=eval_start,
                eval_end=eval_start + horizon,
            )
        )
    return WindowPlan(
        context_len=context_len,
        horizon=horizon,
        tune_windows=tuple(windows[:n_tune]),
        test_windows=tuple(windows[n_tune:]),
    )


def default_window_counts(
    n_timestamps: int,
    context_len: int,
    horizon: int,
    n_tune: int = DEFAULT_TUNE_WINDOWS,
    n_test: int = DEFAULT_TEST_WINDOWS,
) -> tuple[int, int]:
    """Shrink the requested window counts to fit the series.

    Tune windows go first (down to 0), then test windows, never below one
    test window.  Raises InsufficientHistory when even (0, 1) does not fit.
    """
    while n_tune > 0 and n_timestamps < context_len + horizon * (n_tune + n_test):
        n_tune -= 1
    while n_test > 1 and n_timestamps < context_len + horizon * n_test:
        n_test -= 1
    if n_timestamps < context_len + horizon * n_test:
        raise InsufficientHistory(n_timestamps, context_len + horizon)
    return n_tune, n_test
