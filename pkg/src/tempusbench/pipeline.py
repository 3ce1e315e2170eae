"""Grid-search tuning and rolling-window evaluation.

Tuning minimizes MAE averaged over the tune windows (the same
metrics.mae code path used everywhere) and breaks ties by grid order.
Evaluation averages each metric over the test windows; a model failure
on any test window, or an undefined metric on any window, makes that
aggregate missing.  Every window boundary is recorded in a
machine-checkable audit log, and a single cell's failure never aborts
the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import forecasters, metrics
from .aggregate import ErrorPivot
from .core import (
    TaskSpec,
    WindowPlan,
    default_window_counts,
    plan_windows,
    validate_task,
)
from .errors import (
    AdapterError,
    AllAssignmentsFailed,
    ForecastError,
    InsufficientHistory,
    ShapeMismatch,
    TempusError,
)
from .extern import AdapterClient
from .forecasters import HyperAssignment, HyperGrid

# Failures that mark one forecast attempt as missing rather than aborting the run.
FORECAST_FAILURES = (ForecastError, AdapterError, InsufficientHistory, ShapeMismatch)

# A forecaster callable: (context, horizon, assignment, covariates_past,
# covariates_future) -> (n_targets, horizon) array.
Forecaster = Callable[..., np.ndarray]


@dataclass(frozen=True)
class TuneResult:
    model_id: str
    chosen: HyperAssignment
    validation_mae: float | None
    per_assignment_mae: tuple[float | None, ...]
    n_windows_used: int

    @property
    def skipped(self) -> bool:
        return self.n_windows_used == 0


@dataclass(frozen=True, eq=False)
class EvalResult:
    task_id: str
    model_id: str
    chosen: HyperAssignment | None
    metrics: dict[str, float | None]
    per_window: tuple[dict[str, float | None], ...]
    failures: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class ModelEntry:
    """One benchmark entry: a native model id or an external adapter command."""

    model_id: str
    command: tuple[str, ...] | None = None
    timeout: float = 120.0

    @property
    def is_native(self) -> bool:
        return self.command is None


@dataclass(frozen=True)
class RunConfig:
    run_id: str = "run"
    seed: int = 0
    n_tune: int = 3
    n_test: int = 3


@dataclass(frozen=True, eq=False)
class BenchmarkResult:
    run_id: str
    pivots: dict[str, ErrorPivot]
    tune_results: dict[tuple[str, str], TuneResult]
    eval_results: dict[tuple[str, str], EvalResult]
    audit: tuple[dict, ...] = field(default=())


def _native_forecaster(context, horizon, assignment, covariates_past, covariates_future):
    # native models are univariate: covariates are ignored by design
    return forecasters.forecast(
        assignment.model_id, context, horizon, assignment.as_dict()
    )


def _forecast_window(task, window, horizon, assignment, forecaster) -> np.ndarray:
    frame = task.data
    context = frame.targets[:, window.context_start : window.context_end]
    cov_past = frame.covariates[:, window.context_start : window.context_end]
    cov_future = frame.covariates[:, window.eval_start : window.eval_end]
    values = forecaster(context, horizon, assignment, cov_past, cov_future)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (task.n_targets, horizon):
        raise ShapeMismatch(
            f"forecast shape {values.shape} != ({task.n_targets}, {horizon})"
        )
    return values


def tune(
    task: TaskSpec,
    model_id: str,
    grid: HyperGrid,
    plan: WindowPlan,
    forecaster: Forecaster | None = None,
    audit: list[dict] | None = None,
    run_id: str = "",
) -> TuneResult:
    """Average MAE per assignment over the tune windows; pick the first minimum.

    An assignment that fails on any tune window is excluded (its MAE is
    recorded missing).  With zero tune windows, tuning is skipped and the
    first grid element is returned flagged (n_windows_used = 0).
    """
    forecaster = forecaster or _native_forecaster
    if len(grid.assignments) == 0:
        raise AllAssignmentsFailed(f"grid for {model_id!r} is empty")

    if len(plan.tune_windows) == 0:
        return TuneResult(
            model_id=model_id,
            chosen=grid.assignments[0],
            validation_mae=None,
            per_assignment_mae=(None,) * len(grid.assignments),
            n_windows_used=0,
        )

    per_assignment: list[float | None] = []
    for assignment in grid.assignments:
        window_maes = []
        for index, window in enumerate(plan.tune_windows):
            try:
                values = _forecast_window(task, window, plan.horizon, assignment, forecaster)
            except FORECAST_FAILURES as exc:
                window_maes = None
                _record_failure(audit, run_id, task, model_id, "tune", index, exc, assignment)
                break
            actual = task.data.targets[:, window.eval_start : window.eval_end]
            value = metrics.mae(values, actual)
            window_maes.append(value)
            _record_window(
                audit, run_id, task, model_id, "tune", index, window, assignment,
                {"mae": value},
            )
        per_assignment.append(
            None if window_maes is None else sum(window_maes) / len(window_maes)
        )

    best_index = None
    for index, value in enumerate(per_assignment):
        if value is None:
            continue
        if best_index is None or value < per_assignment[best_index]:
            best_index = index
    if best_index is None:
        raise AllAssignmentsFailed(
            f"all {len(grid.assignments)} assignments failed for {model_id!r}"
        )
    return TuneResult(
        model_id=model_id,
        chosen=grid.assignments[best_index],
        validation_mae=per_assignment[best_index],
        per_assignment_mae=tuple(per_assignment),
        n_windows_used=len(plan.tune_windows),
    )


def evaluate(
    task: TaskSpec,
    model_id: str,
    chosen: HyperAssignment,
    plan: WindowPlan,
    forecaster: Forecaster | None = None,
    audit: list[dict] | None = None,
    run_id: str = "",
) -> EvalResult:
    """All metrics averaged over the test windows with the chosen assignment.

    Never raises for a failing model: per-window failures are recorded and
    surface as missing aggregates (a single failed window blanks the cell).
    """
    forecaster = forecaster or _native_forecaster
    per_window: list[dict[str, float | None]] = []
    failures: list[tuple[int, str]] = []
    for index, window in enumerate(plan.test_windows):
        try:
            values = _forecast_window(task, window, plan.horizon, chosen, forecaster)
        except FORECAST_FAILURES as exc:
            failures.append((index, f"{type(exc).__name__}: {exc}"))
            _record_failure(audit, run_id, task, model_id, "test", index, exc, chosen)
            continue
        actual = task.data.targets[:, window.eval_start : window.eval_end]
        context = task.data.targets[:, window.context_start : window.context_end]
        window_metrics: dict[str, float | None] = {}
        for metric_id in metrics.METRIC_IDS:
            try:
                window_metrics[metric_id] = metrics.compute_metric(
                    metric_id, values, actual, context
                )
            except metrics.UndefinedMetric:
                window_metrics[metric_id] = None
        per_window.append(window_metrics)
        _record_window(
            audit, run_id, task, model_id, "test", index, window, chosen, window_metrics
        )

    averaged: dict[str, float | None] = {}
    for metric_id in metrics.METRIC_IDS:
        if failures:
            averaged[metric_id] = None
            continue
        values = [w[metric_id] for w in per_window]
        if any(v is None for v in values):
            averaged[metric_id] = None
        else:
            averaged[metric_id] = sum(values) / len(values)
    return EvalResult(
        task_id=task.task_id,
        model_id=model_id,
        chosen=chosen,
        metrics=averaged,
        per_window=tuple(per_window),
        failures=tuple(failures),
    )


def _grid_from_declaration(model_id: str, declared: dict[str, list]) -> HyperGrid:
    """Expand an adapter's declared hyper_grid (name -> value list) lexicographically."""
    names = sorted(declared)
    assignments: list[HyperAssignment] = []

    def expand(prefix: list[tuple[str, Any]], remaining: list[str]) -> None:
        if not remaining:
            assignments.append(HyperAssignment(model_id=model_id, params=tuple(prefix)))
            return
        name = remaining[0]
        for value in declared[name]:
            expand(prefix + [(name, value)], remaining[1:])

    expand([], names)
    return HyperGrid(model_id=model_id, assignments=tuple(assignments))


def run_benchmark(
    tasks: list[TaskSpec],
    models: list[ModelEntry],
    config: RunConfig = RunConfig(),
) -> BenchmarkResult:
    """Plan, tune, and evaluate every (task, model) cell; assemble metric pivots.

    Cells are computed independently and assembled keyed by (model, task),
    so scheduling cannot change results.  Failures at any stage become
    missing cells plus an audit failure record.
    """
    for task in tasks:
        validate_task(task)
    seen = set()
    for task in tasks:
        if task.task_id in seen:
            raise TempusError(f"duplicate task id {task.task_id!r}")
        seen.add(task.task_id)
    seen = set()
    for entry in models:
        if entry.model_id in seen:
            raise TempusError(f"duplicate model id {entry.model_id!r}")
        seen.add(entry.model_id)

    audit: list[dict] = []
    tune_results: dict[tuple[str, str], TuneResult] = {}
    eval_results: dict[tuple[str, str], EvalResult] = {}
    cell_metrics: dict[str, dict[str, dict[str, float | None]]] = {
        metric_id: {entry.model_id: {} for entry in models}
        for metric_id in metrics.METRIC_IDS
    }

    for task in tasks:
        try:
            n_tune, n_test = default_window_counts(
                task.data.n_timestamps, task.context_len, task.horizon,
                config.n_tune, config.n_test,
            )
            plan = plan_windows(
                task.data.n_timestamps, task.context_len, task.horizon, n_tune, n_test
            )
        except InsufficientHistory as exc:
            for entry in models:
                _record_failure(audit, config.run_id, task, entry.model_id, "plan", None, exc)
            continue

        for entry in models:
            _run_cell(task, entry, plan, config, audit, tune_results, eval_results)

    for metric_id in metrics.METRIC_IDS:
        for (task_id, model_id), result in eval_results.items():
            cell_metrics[metric_id][model_id][task_id] = result.metrics[metric_id]

    task_ids = tuple(task.task_id for task in tasks)
    model_ids = tuple(entry.model_id for entry in models)
    pivots = {
        metric_id: ErrorPivot.from_mapping(
            metric_id, model_ids, task_ids, cell_metrics[metric_id]
        )
        for metric_id in metrics.METRIC_IDS
    }
    return BenchmarkResult(
        run_id=config.run_id,
        pivots=pivots,
        tune_results=tune_results,
        eval_results=eval_results,
        audit=tuple(audit),
    )


def _run_cell(task, entry, plan, config, audit, tune_results, eval_results) -> None:
    key = (task.task_id, entry.model_id)
    client = None
    try:
        if entry.is_native:
            grid = forecasters.default_grid(entry.model_id, task)
            forecaster = _native_forecaster
        else:
            client = AdapterClient(entry.command, timeout=entry.timeout)
            capabilities = client.handshake()
            declared = capabilities.get("hyper_grid")
            send_covariates = bool(capabilities.get("supports_covariates"))
            if declared:
                grid = _grid_from_declaration(entry.model_id, declared)
            else:
                grid = HyperGrid(
                    model_id=entry.model_id,
                    assignments=(HyperAssignment(model_id=entry.model_id),),
                )

            def forecaster(context, horizon, assignment, cov_past, cov_future):
                return client.forecast(
                    task_id=task.task_id,
                    context=context,
                    horizon=horizon,
                    params=assignment.as_dict(),
                    covariates_past=cov_past if send_covariates else None,
                    covariates_future=cov_future if send_covariates else None,
                )

        if not entry.is_native and len(grid.assignments) == 1 and not grid.assignments[0].params:
            # adapters that declare no hyperparameters skip tuning
            tune_result = TuneResult(
                model_id=entry.model_id,
                chosen=grid.assignments[0],
                validation_mae=None,
                per_assignment_mae=(None,),
                n_windows_used=0,
            )
        else:
            tune_result = tune(
                task, entry.model_id, grid, plan, forecaster, audit, config.run_id
            )
        tune_results[key] = tune_result
        eval_results[key] = evaluate(
            task, entry.model_id, tune_result.chosen, plan, forecaster, audit, config.run_id
        )
    except (AllAssignmentsFailed, *FORECAST_FAILURES) as exc:
        _record_failure(audit, config.run_id, task, entry.model_id, "tune", None, exc)
    finally:
        if client is not None:
            client.close()


def _record_window(audit, run_id, task, model_id, role, index, window, assignment, values) -> None:
    if audit is None:
        return
    audit.append(
        {
            "record": "window",
            "run_id": run_id,
            "task_id": task.task_id,
            "model_id": model_id,
            "role": role,
            "window_index": index,
            "context_start": window.context_start,
            "context_end": window.context_end,
            "eval_start": window.eval_start,
            "eval_end": window.eval_end,
            "assignment": {"model_id": assignment.model_id, "params": assignment.as_dict()},
            "metrics": values,
        }
    )


def _record_failure(audit, run_id, task, model_id, stage, index, exc, assignment=None) -> None:
    if audit is None:
        return
    record = {
        "record": "failure",
        "run_id": run_id,
        "task_id": task.task_id,
        "model_id": model_id,
        "stage": stage,
        "window_index": index,
        "error": type(exc).__name__,
        "message": str(exc),
    }
    if assignment is not None:
        record["assignment"] = {
            "model_id": assignment.model_id,
            "params": assignment.as_dict(),
        }
    audit.append(record)


def check_leakage(audit_records) -> list[dict]:
    """Scan an audit log for tune/test overlap per (task, model).

    A violation is any cell whose maximum tuning timestamp (context or
    eval) is not strictly below its minimum test eval timestamp.
    """
    bounds: dict[tuple[str, str], dict[str, int | None]] = {}
    for record in audit_records:
        if record.get("record") != "window":
            continue
        key = (record["task_id"], record["model_id"])
        entry = bounds.setdefault(key, {"max_tune": None, "min_test": None})
        if record["role"] == "tune":
            last = record["eval_end"] - 1
            if entry["max_tune"] is None or last > entry["max_tune"]:
                entry["max_tune"] = last
        elif record["role"] == "test":
            first = record["eval_start"]
            if entry["min_test"] is None or first < entry["min_test"]:
                entry["min_test"] = first
    violations = []
    for (task_id, model_id), entry in sorted(bounds.items()):
        if entry["max_tune"] is None or entry["min_test"] is None:
            continue
        if not entry["max_tune"] < entry["min_test"]:
            violations.append(
                {
                    "task_id": task_id,
                    "model_id": model_id,
                    "max_tune_timestamp": entry["max_tune"],
                    "min_test_timestamp": entry["min_test"],
                }
            )
    return violations
