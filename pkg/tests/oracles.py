"""Independent reference implementations used to cross-check the package.

Everything here is written with plain Python loops and scalar arithmetic,
deliberately avoiding the vectorized code paths under test.  Functions
return None where the package raises UndefinedMetric or reports a missing
value, so tests can compare the defined/undefined flags as well.
"""

from __future__ import annotations

import math


def loop_mae(forecast, actual):
    n, h = len(forecast), len(forecast[0])
    total = 0.0
    for i in range(n):
        for j in range(h):
            total += abs(forecast[i][j] - actual[i][j])
    return total / (n * h)


def loop_mse(forecast, actual):
    n, h = len(forecast), len(forecast[0])
    total = 0.0
    for i in range(n):
        for j in range(h):
            total += (forecast[i][j] - actual[i][j]) ** 2
    return total / (n * h)


def loop_rmse(forecast, actual):
    return math.sqrt(loop_mse(forecast, actual))


def loop_mape(forecast, actual):
    n, h = len(forecast), len(forecast[0])
    total = 0.0
    for i in range(n):
        for j in range(h):
            if actual[i][j] == 0.0:
                return None
            total += abs(forecast[i][j] - actual[i][j]) / abs(actual[i][j])
    return 100.0 * total / (n * h)


def loop_mase(forecast, actual, context):
    n, h = len(forecast), len(forecast[0])
    scales = []
    for row in context:
        if len(row) < 2:
            return None
        diffs = [abs(row[k + 1] - row[k]) for k in range(len(row) - 1)]
        scale = sum(diffs) / len(diffs)
        if scale == 0.0:
            return None
        scales.append(scale)
    total = 0.0
    for i in range(n):
        for j in range(h):
            total += abs(forecast[i][j] - actual[i][j]) / scales[i]
    return total / (n * h)


LOOP_METRICS = {
    "mae": lambda f, a, c: loop_mae(f, a),
    "mse": lambda f, a, c: loop_mse(f, a),
    "rmse": lambda f, a, c: loop_rmse(f, a),
    "mape": lambda f, a, c: loop_mape(f, a),
    "mase": loop_mase,
}


def brute_win_rate(cells, i):
    """cells is a list of rows with None for missing; model index i."""
    n_models = len(cells)
    n_tasks = len(cells[0])
    wins = 0.0
    valid = 0
    for j in range(n_models):
        if j == i:
            continue
        for b in range(n_tasks):
            mine, theirs = cells[i][b], cells[j][b]
            if mine is None or theirs is None:
                continue
            valid += 1
            if mine < theirs:
                wins += 1.0
            elif mine == theirs:
                wins += 0.5
    if valid == 0:
        return None
    return wins / valid


def brute_skill(cells, i, k, clip_low=0.01, clip_high=100.0):
    """Product-form geometric mean, the opposite of the log-space code path."""
    ratios = []
    for b in range(len(cells[0])):
        mine, base = cells[i][b], cells[k][b]
        if mine is None or base is None:
            continue
        if base == 0.0:
            ratio = 1.0 if mine == 0.0 else clip_high
        else:
            ratio = mine / base
        ratios.append(min(max(ratio, clip_low), clip_high))
    if not ratios:
        return None
    product = 1.0
    for ratio in ratios:
        product *= ratio
    return 1.0 - product ** (1.0 / len(ratios))


def seasonal_pick(context_row, horizon, period):
    """Index arithmetic for the repeat-last-cycle forecast, 1-indexed."""
    l = len(context_row)
    out = []
    for j in range(1, horizon + 1):
        k = math.ceil(j / period)
        out.append(context_row[l + j - period * k - 1])
    return out


def ses_level(series, alpha):
    level = series[0]
    for value in series[1:]:
        level = level + alpha * (value - level)
    return level
