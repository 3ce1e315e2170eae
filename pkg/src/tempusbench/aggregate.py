"""Win-rate and skill-score aggregation over a models-by-tasks error pivot.

Missing cells are first-class: a model with no valid pairwise comparison
(or no task shared with the baseline) gets a missing aggregate, never a
fake 0.  Ratios are clipped to [0.01, 100] before the log, and the
geometric mean is taken in log space so large pivots cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, UnknownModel

CLIP_LOW = 0.01
CLIP_HIGH = 100.0


@dataclass(frozen=True, eq=False)
class ErrorPivot:
    """One metric's error matrix: models down the rows, tasks across the columns.

    cells is (len(models), len(tasks)) float64 with NaN marking a missing
    value; every present value must be finite and >= 0.
    """

    metric_id: str
    models: tuple[str, ...]
    tasks: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        cells = np.asarray(self.cells, dtype=np.float64)
        object.__setattr__(self, "cells", cells)
        if len(set(self.models)) != len(self.models):
            raise SchemaError("model ids must be unique")
        if len(set(self.tasks)) != len(self.tasks):
            raise SchemaError("task ids must be unique")
        if cells.shape != (len(self.models), len(self.tasks)):
            raise SchemaError(
                f"cells shape {cells.shape} != ({len(self.models)}, {len(self.tasks)})"
            )
        present = ~np.isnan(cells)
        if not np.isfinite(cells[present]).all():
            raise SchemaError("present cells must be finite")
        if (cells[present] < 0).any():
            raise SchemaError("present cells must be >= 0")

    @classmethod
    def from_mapping(
        cls,
        metric_id: str,
        models,
        tasks,
        mapping: dict[str, dict[str, float | None]],
    ) -> "ErrorPivot":
        """Build from {model: {task: value-or-None}}; absent keys are missing."""
        models = tuple(models)
        tasks = tuple(tasks)
        cells = np.full((len(models), len(tasks)), np.nan)
        for i, model in enumerate(models):
            row = mapping.get(model, {})
            for j, task in enumerate(tasks):
                value = row.get(task)
                if value is not None:
                    cells[i, j] = value
        return cls(metric_id=metric_id, models=models, tasks=tasks, cells=cells)

    def model_index(self, model: str) -> int:
        try:
            return self.models.index(model)
        except ValueError:
            raise UnknownModel(f"model {model!r} not in pivot") from None

    def value(self, model: str, task: str) -> float | None:
        i = self.model_index(model)
        try:
            j = self.tasks.index(task)
        except ValueError:
            raise UnknownModel(f"task {task!r} not in pivot") from None
        cell = self.cells[i, j]
        return None if np.isnan(cell) else float(cell)


@dataclass(frozen=True)
class ModelAggregate:
    model_id: str
    win_rate: float | None
    skill_score: float | None
    n_valid_comparisons: int
    n_valid_tasks_vs_baseline: int


@dataclass(frozen=True)
class AggregateReport:
    metric_id: str
    baseline: str
    rows: tuple[ModelAggregate, ...]
    ranking: tuple[str, ...]

    def row(self, model_id: str) -> ModelAggregate:
        for row in self.rows:
            if row.model_id == model_id:
                return row
        raise UnknownModel(f"model {model_id!r} not in report")


def win_rate(pivot: ErrorPivot, model: str) -> float | None:
    """Share of pairwise comparisons the model wins; ties count 0.5.

    A comparison (task, opponent) is valid only when both cells are
    present; with zero valid comparisons the rate is missing.
    """
    i = pivot.model_index(model)
    cells = pivot.cells
    wins = 0.0
    valid = 0
    for j in range(len(pivot.models)):
        if j == i:
            continue
        for b in range(len(pivot.tasks)):
            mine, theirs = cells[i, b], cells[j, b]
            if np.isnan(mine) or np.isnan(theirs):
                continue
            valid += 1
            if mine < theirs:
                wins += 1.0
            elif mine == theirs:
                wins += 0.5
    if valid == 0:
        return None
    return wins / valid


def _clipped_log_ratios(pivot: ErrorPivot, model: str, baseline: str) -> list[float]:
    i = pivot.model_index(model)
    k = pivot.model_index(baseline)
    logs = []
    for b in range(len(pivot.tasks)):
        mine, base = pivot.cells[i, b], pivot.cells[k, b]
        if np.isnan(mine) or np.isnan(base):
            continue
        if base == 0.0:
            ratio = 1.0 if mine == 0.0 else CLIP_HIGH
        else:
            ratio = mine / base
        ratio = min(max(ratio, CLIP_LOW), CLIP_HIGH)
        logs.append(math.log(ratio))
    return logs


def skill_score(pivot: ErrorPivot, model: str, baseline: str) -> float | None:
    """1 minus the geometric mean of clipped error ratios vs the baseline.

    Missing when the model and baseline share no task.  The clip bounds
    confine the result to [-99, 0.99]; a zero baseline cell contributes
    ratio 1 when the model is also 0, else the upper clip.
    """
    logs = _clipped_log_ratios(pivot, model, baseline)
    if not logs:
        return None
    geomean = math.exp(sum(logs) / len(logs))
    # exp(log(.)) rounding can stray a few ulps outside the clip box;
    # pin the geometric mean back so the score stays inside [-99, 0.99]
    geomean = min(max(geomean, CLIP_LOW), CLIP_HIGH)
    return 1.0 - geomean


def _rank_key(row: ModelAggregate):
    return (
        row.win_rate is None,
        -(row.win_rate or 0.0),
        row.skill_score is None,
        -(row.skill_score or 0.0),
        row.model_id,
    )


def aggregate_all(pivot: ErrorPivot, baseline: str) -> AggregateReport:
    """Win rate and skill score for every model, ranked.

    Ranking is by win rate descending; ties break by skill score then
    model id, with missing aggregates ordered last.
    """
    pivot.model_index(baseline)
    rows = []
    for model in pivot.models:
        i = pivot.model_index(model)
        n_comparisons = 0
        for j in range(len(pivot.models)):
            if j == i:
                continue
            both = ~np.isnan(pivot.cells[i]) & ~np.isnan(pivot.cells[j])
            n_comparisons += int(both.sum())
        logs = _clipped_log_ratios(pivot, model, baseline)
        rows.append(
            ModelAggregate(
                model_id=model,
                win_rate=win_rate(pivot, model),
                skill_score=skill_score(pivot, model, baseline),
                n_valid_comparisons=n_comparisons,
                n_valid_tasks_vs_baseline=len(logs),
            )
        )
    ranking = tuple(row.model_id for row in sorted(rows, key=_rank_key))
    return AggregateReport(
        metric_id=pivot.metric_id,
        baseline=baseline,
        rows=tuple(rows),
        ranking=ranking,
    )
