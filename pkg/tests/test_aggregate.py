from __future__ import annotations

import math

import numpy as np
import pytest

from tempusbench import aggregate as agg
from tempusbench.aggregate import AggregateReport, ErrorPivot
from tempusbench.errors import SchemaError, UnknownModel

from oracles import brute_skill, brute_win_rate


def pivot_of(cells, models=None, tasks=None, metric_id="mae"):
    cells = np.asarray(cells, dtype=np.float64)
    models = tuple(models or (f"m{i}" for i in range(cells.shape[0])))
    tasks = tuple(tasks or (f"t{j}" for j in range(cells.shape[1])))
    return ErrorPivot(metric_id=metric_id, models=models, tasks=tasks, cells=cells)


def random_pivot(rng, n_models=5, n_tasks=6, missing=0.1, ties=0.05):
    cells = rng.uniform(0.1, 10.0, size=(n_models, n_tasks))
    tie_mask = rng.random((n_models, n_tasks)) < ties
    for i, j in zip(*np.nonzero(tie_mask)):
        other = int(rng.integers(0, n_models))
        cells[i, j] = cells[other, j]
    cells[rng.random((n_models, n_tasks)) < missing] = np.nan
    return pivot_of(cells)


def cells_as_lists(pivot):
    out = []
    for row in pivot.cells:
        out.append([None if np.isnan(v) else float(v) for v in row])
    return out


def test_pivot_validation():
    with pytest.raises(SchemaError):
        pivot_of([[1.0, 2.0]], models=("a",), tasks=("t0",))
    with pytest.raises(SchemaError):
        pivot_of([[1.0], [2.0]], models=("a", "a"), tasks=("t0",))
    with pytest.raises(SchemaError):
        pivot_of([[-1.0]])
    with pytest.raises(SchemaError):
        pivot_of([[np.inf]])
    # NaN means missing and is fine
    pivot_of([[np.nan]])


def test_pivot_mapping_round_trip():
    pivot = ErrorPivot.from_mapping(
        "mae",
        ("a", "b"),
        ("t0", "t1"),
        {"a": {"t0": 1.0, "t1": 2.0}, "b": {"t0": 3.0}},
    )
    assert pivot.value("a", "t1") == 2.0
    assert pivot.value("b", "t1") is None
    with pytest.raises(UnknownModel):
        pivot.value("c", "t0")
    with pytest.raises(UnknownModel):
        pivot.value("a", "t9")


def test_win_rate_hand_example():
    # model a beats b on t0, ties on t1, loses on t2: 1.5 of 3
    pivot = pivot_of([[1.0, 2.0, 5.0], [4.0, 2.0, 3.0]], models=("a", "b"))
    assert agg.win_rate(pivot, "a") == 0.5
    assert agg.win_rate(pivot, "b") == 0.5


def test_win_rate_missing_pairs_excluded():
    pivot = pivot_of(
        [[1.0, np.nan], [2.0, 3.0], [np.nan, np.nan]], models=("a", "b", "c")
    )
    # a vs b on t0 only: one win out of one comparison
    assert agg.win_rate(pivot, "a") == 1.0
    assert agg.win_rate(pivot, "b") == 0.0
    assert agg.win_rate(pivot, "c") is None


def test_skill_score_identity_and_sign():
    pivot = pivot_of([[1.0, 1.0], [2.0, 2.0], [0.5, 0.5]], models=("base", "worse", "better"))
    assert agg.skill_score(pivot, "base", "base") == 0.0
    assert agg.skill_score(pivot, "worse", "base") == pytest.approx(-1.0, rel=1e-12)
    assert agg.skill_score(pivot, "better", "base") == pytest.approx(0.5, rel=1e-12)


def test_skill_score_zero_baseline_rules():
    pivot = pivot_of([[0.0], [0.0], [3.0]], models=("base", "alsozero", "nonzero"))
    assert agg.skill_score(pivot, "alsozero", "base") == 0.0
    # nonzero error against a zero baseline pins at the upper clip
    assert agg.skill_score(pivot, "nonzero", "base") == -99.0


def test_skill_score_clip_bounds():
    pivot = pivot_of([[1.0], [1e9], [1e-9]], models=("base", "awful", "stellar"))
    low = agg._clipped_log_ratios(pivot, "stellar", "base")
    high = agg._clipped_log_ratios(pivot, "awful", "base")
    assert low == [math.log(0.01)]
    assert high == [math.log(100.0)]
    # scores saturate exactly at the bounds implied by the ratio clips
    assert agg.skill_score(pivot, "awful", "base") == -99.0
    assert agg.skill_score(pivot, "stellar", "base") == 0.99


def test_skill_score_missing_when_no_shared_tasks():
    pivot = pivot_of([[1.0, np.nan], [np.nan, 2.0]], models=("base", "other"))
    assert agg.skill_score(pivot, "other", "base") is None


def test_matches_brute_force_on_random_pivots():
    rng = np.random.default_rng(31)
    for _ in range(30):
        pivot = random_pivot(rng)
        lists = cells_as_lists(pivot)
        for i, model in enumerate(pivot.models):
            expected = brute_win_rate(lists, i)
            got = agg.win_rate(pivot, model)
            assert got == expected  # sums of {0, 0.5, 1} are exact
            expected_skill = brute_skill(lists, i, 0)
            got_skill = agg.skill_score(pivot, model, pivot.models[0])
            if expected_skill is None:
                assert got_skill is None
            else:
                assert got_skill == pytest.approx(expected_skill, rel=1e-12)


def test_self_skill_is_exactly_zero():
    rng = np.random.default_rng(37)
    for _ in range(20):
        pivot = random_pivot(rng)
        for model in pivot.models:
            row = pivot.cells[pivot.model_index(model)]
            if np.isnan(row).all():
                assert agg.skill_score(pivot, model, model) is None
            else:
                assert agg.skill_score(pivot, model, model) == 0.0


def test_aggregate_all_ranking():
    pivot = pivot_of(
        [[2.0, 2.0], [1.0, 1.0], [3.0, 3.0]],
        models=("base", "good", "bad"),
    )
    report = agg.aggregate_all(pivot, "base")
    assert isinstance(report, AggregateReport)
    assert report.ranking == ("good", "base", "bad")
    row = report.row("good")
    assert row.win_rate == 1.0
    assert row.n_valid_comparisons == 4
    assert row.n_valid_tasks_vs_baseline == 2
    with pytest.raises(UnknownModel):
        report.row("nobody")
    with pytest.raises(UnknownModel):
        agg.aggregate_all(pivot, "nobody")


def test_aggregate_all_tie_breaks():
    # equal win rates: skill decides; equal skill: model id decides
    pivot = pivot_of(
        [[1.0, 4.0], [4.0, 1.0], [4.0, 1.0]],
        models=("base", "zeta", "alpha"),
    )
    report = agg.aggregate_all(pivot, "base")
    assert [row.win_rate for row in report.rows] == [0.5, 0.5, 0.5]
    # every skill is 0 here (ratios 4 and 1/4 cancel in log space)
    assert [row.skill_score for row in report.rows] == [0.0, 0.0, 0.0]
    assert report.ranking == ("alpha", "base", "zeta")


def test_aggregate_all_missing_rows_rank_last():
    pivot = pivot_of(
        [[1.0, 1.0], [2.0, 2.0], [np.nan, np.nan]],
        models=("base", "mid", "ghost"),
    )
    report = agg.aggregate_all(pivot, "base")
    assert report.ranking[-1] == "ghost"
    ghost = report.row("ghost")
    assert ghost.win_rate is None
    assert ghost.skill_score is None
    assert ghost.n_valid_comparisons == 0
    assert ghost.n_valid_tasks_vs_baseline == 0
