from __future__ import annotations

import numpy as np
import pytest

from tempusbench import metrics
from tempusbench.errors import ShapeMismatch, UndefinedMetric

from oracles import LOOP_METRICS, loop_mae, loop_mase, loop_mse


def test_mae_examples():
    assert metrics.mae([1.0, 3.0], [2.0, 5.0]) == 1.5
    assert metrics.mae([[1.0], [2.0]], [[1.0], [4.0]]) == 1.0
    same = np.arange(12.0).reshape(3, 4)
    assert metrics.mae(same, same) == 0.0


def test_mse_rmse_examples():
    assert metrics.mse([1.0, 3.0], [2.0, 5.0]) == 2.5
    assert metrics.rmse([1.0, 3.0], [2.0, 5.0]) == pytest.approx(
        np.sqrt(2.5), rel=1e-15
    )
    assert metrics.mse([0.0], [3.0]) == 9.0
    assert metrics.rmse([0.0], [3.0]) == 3.0
    same = np.ones((2, 3))
    assert metrics.mse(same, same) == 0.0


def test_mape_examples():
    assert metrics.mape([110.0], [100.0]) == pytest.approx(10.0, rel=1e-12)
    assert metrics.mape([2.0, 4.0], [2.0, 4.0]) == 0.0
    with pytest.raises(UndefinedMetric):
        metrics.mape([1.0, 1.0], [2.0, 0.0])


def test_mase_examples():
    # context differences average to 1, so the scaled error is just |5 - 4|
    assert metrics.mase([5.0], [4.0], [1.0, 2.0, 3.0]) == 1.0
    assert metrics.mase([2.0, 3.0], [2.0, 3.0], [1.0, 2.0, 4.0]) == 0.0
    with pytest.raises(UndefinedMetric):
        metrics.mase([1.0], [2.0], [7.0, 7.0, 7.0])
    with pytest.raises(UndefinedMetric):
        metrics.mase([1.0], [2.0], [7.0])


def test_mase_scales_per_target_row():
    forecast = [[5.0], [5.0]]
    actual = [[4.0], [4.0]]
    context = [[1.0, 2.0, 3.0], [1.0, 3.0, 5.0]]  # scales 1 and 2
    expected = (1.0 / 1.0 + 1.0 / 2.0) / 2.0
    assert metrics.mase(forecast, actual, context) == expected
    with pytest.raises(ShapeMismatch):
        metrics.mase(forecast, actual, [[1.0, 2.0, 3.0]])


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        metrics.mae([1.0, 2.0], [1.0])
    with pytest.raises(ShapeMismatch):
        metrics.mse([[1.0, 2.0]], [[1.0], [2.0]])


def test_compute_metric_dispatch():
    f, a, c = [1.0, 3.0], [2.0, 5.0], [1.0, 2.0, 4.0]
    assert metrics.compute_metric("mae", f, a) == metrics.mae(f, a)
    assert metrics.compute_metric("mase", f, a, c) == metrics.mase(f, a, c)
    with pytest.raises(ValueError):
        metrics.compute_metric("mase", f, a)
    with pytest.raises(ValueError):
        metrics.compute_metric("smape", f, a)


def test_matches_loop_oracles_on_random_inputs():
    rng = np.random.default_rng(7)
    for trial in range(60):
        n = int(rng.integers(1, 4))
        h = int(rng.integers(1, 9))
        l = int(rng.integers(2, 13))
        forecast = rng.normal(size=(n, h))
        actual = rng.normal(size=(n, h))
        context = rng.normal(size=(n, l))
        if trial % 6 == 0:
            actual[rng.integers(0, n), rng.integers(0, h)] = 0.0
        if trial % 7 == 0:
            context[rng.integers(0, n), :] = 2.25
        fl, al, cl = forecast.tolist(), actual.tolist(), context.tolist()
        for metric_id, oracle in LOOP_METRICS.items():
            expected = oracle(fl, al, cl)
            if expected is None:
                with pytest.raises(UndefinedMetric):
                    metrics.compute_metric(metric_id, forecast, actual, context)
            else:
                got = metrics.compute_metric(metric_id, forecast, actual, context)
                assert got == pytest.approx(expected, rel=1e-12)


def test_scale_equivariance_and_invariance():
    rng = np.random.default_rng(11)
    forecast = rng.uniform(1.0, 5.0, size=(2, 5))
    actual = rng.uniform(1.0, 5.0, size=(2, 5))
    context = rng.uniform(1.0, 5.0, size=(2, 9))
    for c in (0.5, 3.0, 1000.0):
        assert metrics.mae(c * forecast, c * actual) == pytest.approx(
            c * metrics.mae(forecast, actual), rel=1e-9
        )
        assert metrics.rmse(c * forecast, c * actual) == pytest.approx(
            c * metrics.rmse(forecast, actual), rel=1e-9
        )
        assert metrics.mse(c * forecast, c * actual) == pytest.approx(
            c * c * metrics.mse(forecast, actual), rel=1e-9
        )
        assert metrics.mape(c * forecast, c * actual) == pytest.approx(
            metrics.mape(forecast, actual), rel=1e-9
        )
        assert metrics.mase(c * forecast, c * actual, c * context) == pytest.approx(
            metrics.mase(forecast, actual, context), rel=1e-9
        )


def test_one_dimensional_inputs_accepted():
    assert metrics.mae([1.0, 2.0], [2.0, 4.0]) == loop_mae([[1.0, 2.0]], [[2.0, 4.0]])
    assert metrics.mse([1.0], [4.0]) == loop_mse([[1.0]], [[4.0]])
    assert metrics.mase([1.0], [2.0], [0.0, 2.0]) == loop_mase(
        [[1.0]], [[2.0]], [[0.0, 2.0]]
    )
