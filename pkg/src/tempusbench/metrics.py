"""Point-forecast error metrics.

All metrics take the forecast matrix and the realized values as
(n_targets, horizon) arrays and return a scalar averaged over every cell.
A vanishing denominator raises :class:`UndefinedMetric`; callers report
that as a missing value, never as 0 or infinity.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, UndefinedMetric

METRIC_IDS = ("mae", "mse", "rmse", "mape", "mase")


def _pair(forecast, actual) -> tuple[np.ndarray, np.ndarray]:
    f = np.atleast_2d(np.asarray(forecast, dtype=np.float64))
    a = np.atleast_2d(np.asarray(actual, dtype=np.float64))
    if f.shape != a.shape:
        raise ShapeMismatch(f"forecast shape {f.shape} != actual shape {a.shape}")
    return f, a


def mae(forecast, actual) -> float:
    """Mean absolute error over all n_targets * horizon cells."""
    f, a = _pair(forecast, actual)
    return float(np.mean(np.abs(f - a)))


def mse(forecast, actual) -> float:
    """Mean squared error over all cells."""
    f, a = _pair(forecast, actual)
    return float(np.mean((f - a) ** 2))


def rmse(forecast, actual) -> float:
    """Square root of the mean squared error."""
    return float(np.sqrt(mse(forecast, actual)))


def mape(forecast, actual) -> float:
    """Mean absolute percentage error, in percent.

    Undefined when any realized value is exactly zero.
    """
    f, a = _pair(forecast, actual)
    if (a == 0.0).any():
        raise UndefinedMetric("mape is undefined: a realized value is zero")
    return float(100.0 * np.mean(np.abs(f - a) / np.abs(a)))


def mase(forecast, actual, context) -> float:
    """Mean absolute scaled error.

    Each target's absolute errors are scaled by that target's in-sample
    naive-step size: the mean absolute first difference of its context.
    Undefined when any target's context is constant (or shorter than 2).
    """
    f, a = _pair(forecast, actual)
    c = np.atleast_2d(np.asarray(context, dtype=np.float64))
    if c.shape[0] != f.shape[0]:
        raise ShapeMismatch(
            f"context has {c.shape[0]} targets but forecast has {f.shape[0]}"
        )
    if c.shape[1] < 2:
        raise UndefinedMetric("mase is undefined: context shorter than 2")
    scale = np.mean(np.abs(np.diff(c, axis=1)), axis=1)
    if (scale == 0.0).any():
        raise UndefinedMetric("mase is undefined: a target's context is constant")
    return float(np.mean(np.abs(f - a) / scale[:, None]))


def compute_metric(metric_id: str, forecast, actual, context=None) -> float:
    """Dispatch by metric id; mase is the only metric that needs the context."""
    if metric_id == "mae":
        return mae(forecast, actual)
    if metric_id == "mse":
        return mse(forecast, actual)
    if metric_id == "rmse":
        return rmse(forecast, actual)
    if metric_id == "mape":
        return mape(forecast, actual)
    if metric_id == "mase":
        if context is None:
            raise ValueError("mase requires the context")
        return mase(forecast, actual, context)
    raise ValueError(f"unknown metric id {metric_id!r}")
