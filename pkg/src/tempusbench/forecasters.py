"""Native classical forecasters and their default hyperparameter grids.

Every forecaster is a pure fit-and-forecast function over a context matrix
of shape (n_targets, context_len); targets are forecast channel by channel
with shared hyperparameters, and no forecaster uses randomness, so equal
inputs give bit-identical outputs.  A 1-D context is accepted as a single
channel and yields a 1-D forecast.

Smoothing recursions are written in error-correction form (level plus
alpha times the one-step error), which is algebraically identical to the
convex-combination form and exactly stable at constant fixed points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import (
    InsufficientHistory,
    InvalidPeriod,
    NonPositiveData,
    NumericalFailure,
    SingularFit,
    NonConvergence,
    UnknownModel,
)

MODEL_IDS = (
    "seasonal_naive",
    "croston",
    "ses",
    "holt_winters_add",
    "holt_winters_mul",
    "theta",
    "arima",
    "drift",
)

# "holt_winters" expands to both variants in one grid.
GRID_IDS = MODEL_IDS + ("holt_winters",)

SEASONAL_PERIODS = (1, 4, 7, 12, 24, 52, 168)

SMOOTHING_ALPHAS = (0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0)


@dataclass(frozen=True)
class HyperAssignment:
    """One hyperparameter assignment: a model id plus name->value pairs.

    params are stored sorted by name so equal assignments compare and hash
    equal regardless of construction order.
    """

    model_id: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(sorted(self.params)))

    @classmethod
    def make(cls, model_id: str, **params: Any) -> "HyperAssignment":
        return cls(model_id=model_id, params=tuple(params.items()))

    def as_dict(self) -> dict[str, Any]:
        return dict(self.params)


@dataclass(frozen=True)
class HyperGrid:
    """A deterministically ordered list of assignments for one model id."""

    model_id: str
    assignments: tuple[HyperAssignment, ...]

    def __post_init__(self) -> None:
        if len(set(self.assignments)) != len(self.assignments):
            raise ValueError(f"duplicate assignments in grid for {self.model_id}")

    def __len__(self) -> int:
        return len(self.assignments)


def _as_context(context) -> tuple[np.ndarray, bool]:
    arr = np.asarray(context, dtype=np.float64)
    squeeze = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"context must be (n_targets, context_len), got shape {arr.shape}")
    return arr, squeeze


def _finish(rows: list[np.ndarray], squeeze: bool) -> np.ndarray:
    out = np.vstack(rows)
    if not np.isfinite(out).all():
        raise NumericalFailure("forecast contains non-finite values")
    return out[0] if squeeze else out


def seasonal_naive_forecast(context, horizon: int, period: int) -> np.ndarray:
    """Repeat the last observed full cycle of length `period`.

    Step j takes the context value at 1-indexed position l + j - period*ceil(j/period),
    which always lands inside the last cycle.
    """
    ctx, squeeze = _as_context(context)
    l = ctx.shape[1]
    if period < 1 or period > l:
        raise InvalidPeriod(f"period {period} outside [1, {l}]")
    idx = np.array(
        [l + j - period * math.ceil(j / period) - 1 for j in range(1, horizon + 1)],
        dtype=np.intp,
    )
    return _finish([ctx[:, idx]], squeeze)


def _ses_level(series: np.ndarray, alpha: float) -> float:
    level = series[0]
    for value in series[1:]:
        level = level + alpha * (value - level)
    return float(level)


def ses_forecast(context, horizon: int, alpha: float) -> np.ndarray:
    """Simple exponential smoothing: the final level repeated over the horizon."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    ctx, squeeze = _as_context(context)
    rows = [np.full(horizon, _ses_level(row, alpha)) for row in ctx]
    return _finish(rows, squeeze)


def croston_forecast(context, horizon: int, alpha: float) -> np.ndarray:
    """Croston's intermittent-demand method.

    Paired SES recursions over demand size and inter-demand interval,
    updated only at non-zero demands; the interval counter resets to 1
    after each demand.  Forecast is size/interval repeated.  An all-zero
    series forecasts 0.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    ctx, squeeze = _as_context(context)
    if (ctx < 0).any():
        raise NonPositiveData("croston requires non-negative demands")

    rows = []
    for row in ctx:
        size = None
        interval = None
        steps_since_demand = 0
        for position, value in enumerate(row, start=1):
            steps_since_demand += 1
            if value == 0.0:
                continue
            if size is None:
                size = value
                interval = float(position)
            else:
                size = size + alpha * (value - size)
                interval = interval + alpha * (steps_since_demand - interval)
            steps_since_demand = 0
        point = 0.0 if size is None else size / interval
        rows.append(np.full(horizon, point))
    return _finish(rows, squeeze)


def holt_winters_forecast(
    context,
    horizon: int,
    variant: str,
    alpha: float,
    beta: float,
    gamma: float,
    period: int,
) -> np.ndarray:
    """Triple exponential smoothing, additive or multiplicative seasonality.

    Initialization consumes the first season: level = mean of season one,
    trend = (mean of season two - mean of season one) / period, seasonal
    components from season one; recursions run from position period + 1.
    """
    if variant not in ("additive", "multiplicative"):
        raise ValueError(f"variant must be additive or multiplicative, got {variant!r}")
    for name, value in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    ctx, squeeze = _as_context(context)
    l = ctx.shape[1]
    if period < 2 or period > l // 2:
        raise InvalidPeriod(f"period {period} outside [2, {l // 2}]")
    multiplicative = variant == "multiplicative"
    if multiplicative and (ctx <= 0).any():
        raise NonPositiveData("multiplicative seasonality requires values > 0")

    rows = []
    for row in ctx:
        first = row[:period]
        second = row[period : 2 * period]
        level = float(np.mean(first))
        trend = float((np.mean(second) - np.mean(first)) / period)
        # season[t] for t = 1..l, 1-indexed; init fills t = 1..period
        season = np.empty(l + 1)
        season[1 : period + 1] = first / level if multiplicative else first - level
        for t in range(period + 1, l + 1):
            value = row[t - 1]
            prior = level + trend
            if multiplicative:
                level_new = alpha * (value / season[t - period]) + (1 - alpha) * prior
            else:
                level_new = alpha * (value - season[t - period]) + (1 - alpha) * prior
            trend = beta * (level_new - level) + (1 - beta) * trend
            if multiplicative:
                season[t] = gamma * (value / level_new) + (1 - gamma) * season[t - period]
            else:
                season[t] = gamma * (value - level_new) + (1 - gamma) * season[t - period]
            level = level_new

        out = np.empty(horizon)
        for j in range(1, horizon + 1):
            seasonal = season[l - period + ((j - 1) % period) + 1]
            if multiplicative:
                out[j - 1] = (level + j * trend) * seasonal
            else:
                out[j - 1] = level + j * trend + seasonal
        rows.append(out)
    return _finish(rows, squeeze)


def theta_forecast(context, horizon: int, alpha: float) -> np.ndarray:
    """Theta method with coefficient fixed at 2.

    Line one extrapolates the OLS linear trend; line two applies SES to
    the trend-doubled series z_t = 2*y_t - trend_t; the forecast is the
    elementwise mean of the two lines.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    ctx, squeeze = _as_context(context)
    l = ctx.shape[1]
    if l < 2:
        raise InsufficientHistory(l, 2)

    t = np.arange(1, l + 1, dtype=np.float64)
    t_mean = float(np.mean(t))
    denom = float(np.sum((t - t_mean) ** 2))
    rows = []
    for row in ctx:
        y_mean = float(np.mean(row))
        slope = float(np.sum((t - t_mean) * (row - y_mean))) / denom
        intercept = y_mean - slope * t_mean
        trend = intercept + slope * t
        z_level = _ses_level(2.0 * row - trend, alpha)
        steps = np.arange(l + 1, l + horizon + 1, dtype=np.float64)
        line_one = intercept + slope * steps
        rows.append((line_one + z_level) / 2.0)
    return _finish(rows, squeeze)


def drift_forecast(context, horizon: int) -> np.ndarray:
    """Line through the first and last context values, extrapolated."""
    ctx, squeeze = _as_context(context)
    l = ctx.shape[1]
    if l < 2:
        raise InsufficientHistory(l, 2)
    steps = np.arange(1, horizon + 1, dtype=np.float64)
    slope = (ctx[:, -1] - ctx[:, 0]) / (l - 1)
    rows = [ctx[i, -1] + steps * slope[i] for i in range(ctx.shape[0])]
    return _finish(rows, squeeze)


def _nelder_mead(fn, x0: np.ndarray, step: float, max_iter: int, tol: float):
    """Deterministic simplex minimizer; returns (best_x, converged)."""
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += step
    values = np.array([fn(x) for x in simplex])
    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[-1] - values[0] <= tol * max(1.0, abs(values[0])):
            return simplex[0], True
        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + (centroid - simplex[-1])
        f_reflected = fn(reflected)
        if f_reflected < values[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            f_expanded = fn(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            contracted = centroid + 0.5 * (simplex[-1] - centroid)
            f_contracted = fn(contracted)
            if f_contracted < values[-1]:
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = fn(simplex[i])
    order = np.argsort(values, kind="stable")
    return simplex[order][0], False


_COEF_BOX = 0.99
_ARIMA_MAX_ITER = 500
_ARIMA_TOL = 1e-8


def _css_residuals(w: np.ndarray, c: float, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """One-step residuals conditioned on the first p observations; pre-sample shocks are 0."""
    p, q = phi.size, theta.size
    m = w.size
    eps = np.zeros(m)
    for t in range(p, m):
        pred = c
        for i in range(p):
            pred += phi[i] * w[t - 1 - i]
        for k in range(q):
            if t - 1 - k >= 0:
                pred += theta[k] * eps[t - 1 - k]
        eps[t] = w[t] - pred
    return eps


def arima_fit_forecast(
    context,
    horizon: int,
    p: int,
    d: int,
    q: int,
    with_constant: bool = False,
) -> np.ndarray:
    """Difference d times, fit an ARMA(p, q) with optional constant, forecast, integrate.

    Pure AR fits use closed-form least squares; fits with moving-average
    terms minimize the conditional sum of squares with a simplex search
    (coefficients boxed to [-0.99, 0.99], future shocks set to 0).
    """
    if p not in (0, 1, 2) or q not in (0, 1, 2):
        raise ValueError(f"p and q must be in {{0, 1, 2}}, got p={p}, q={q}")
    if d not in (0, 1):
        raise ValueError(f"d must be 0 or 1, got {d}")
    ctx, squeeze = _as_context(context)
    l = ctx.shape[1]
    if l - d <= p + q + 1:
        raise InsufficientHistory(l, p + q + 2 + d)

    rows = []
    for row in ctx:
        w = np.diff(row, n=d) if d else row.copy()
        m = w.size
        if q == 0:
            c, phi = _fit_pure_ar(w, p, with_constant)
            theta = np.zeros(0)
        else:
            c, phi, theta = _fit_css(w, p, q, with_constant)
        eps = _css_residuals(w, c, phi, theta)

        w_ext = list(w)
        for j in range(horizon):
            t = m + j
            pred = c
            for i in range(p):
                pred += phi[i] * w_ext[t - 1 - i]
            for k in range(q):
                idx = t - 1 - k
                if 0 <= idx < m:
                    pred += theta[k] * eps[idx]
            w_ext.append(pred)
        fore = np.array(w_ext[m:])
        if d:
            fore = row[-1] + np.cumsum(fore)
        rows.append(fore)
    return _finish(rows, squeeze)


def _fit_pure_ar(w: np.ndarray, p: int, with_constant: bool) -> tuple[float, np.ndarray]:
    m = w.size
    if p == 0 and not with_constant:
        return 0.0, np.zeros(0)
    columns = []
    if with_constant:
        columns.append(np.ones(m - p))
    for i in range(1, p + 1):
        columns.append(w[p - i : m - i])
    design = np.column_stack(columns)
    target = w[p:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise SingularFit(f"rank {rank} < {design.shape[1]} parameters")
    if with_constant:
        return float(coef[0]), coef[1:]
    return 0.0, coef


def _fit_css(w: np.ndarray, p: int, q: int, with_constant: bool):
    """Conditional-sum-of-squares fit for models with moving-average terms."""
    n_coef = p + q
    offset = 1 if with_constant else 0

    def unpack(params: np.ndarray):
        c = params[0] if with_constant else 0.0
        phi = params[offset : offset + p]
        theta = params[offset + p :]
        return c, phi, theta

    def objective(params: np.ndarray) -> float:
        clipped = params.copy()
        clipped[offset:] = np.clip(clipped[offset:], -_COEF_BOX, _COEF_BOX)
        c, phi, theta = unpack(clipped)
        eps = _css_residuals(w, c, phi, theta)
        css = float(np.sum(eps[p:] ** 2))
        # quadratic penalty steers the simplex back inside the box
        excess = params[offset:] - clipped[offset:]
        return css + 1e6 * float(np.sum(excess**2))

    start = np.zeros(offset + n_coef)
    if with_constant:
        start[0] = float(np.mean(w))
    best, converged = _nelder_mead(
        objective, start, step=0.25, max_iter=_ARIMA_MAX_ITER, tol=_ARIMA_TOL
    )
    if not converged:
        raise NonConvergence(f"simplex hit the {_ARIMA_MAX_ITER}-iteration cap")
    best[offset:] = np.clip(best[offset:], -_COEF_BOX, _COEF_BOX)
    c, phi, theta = unpack(best)
    return float(c), phi.copy(), theta.copy()


def forecast(model_id: str, context, horizon: int, params: dict[str, Any] | None = None) -> np.ndarray:
    """Dispatch to a native forecaster by model id with a params mapping."""
    params = dict(params or {})
    if model_id == "seasonal_naive":
        return seasonal_naive_forecast(context, horizon, period=int(params["L"]))
    if model_id == "ses":
        return ses_forecast(context, horizon, alpha=params["alpha"])
    if model_id == "croston":
        return croston_forecast(context, horizon, alpha=params["alpha"])
    if model_id in ("holt_winters_add", "holt_winters_mul"):
        variant = "additive" if model_id.endswith("add") else "multiplicative"
        return holt_winters_forecast(
            context,
            horizon,
            variant=variant,
            alpha=params["alpha"],
            beta=params["beta"],
            gamma=params["gamma"],
            period=int(params["L"]),
        )
    if model_id == "theta":
        return theta_forecast(context, horizon, alpha=params["alpha"])
    if model_id == "arima":
        return arima_fit_forecast(
            context,
            horizon,
            p=int(params["p"]),
            d=int(params["d"]),
            q=int(params["q"]),
            with_constant=bool(params.get("with_constant", False)),
        )
    if model_id == "drift":
        return drift_forecast(context, horizon)
    raise UnknownModel(f"unknown model id {model_id!r}")


def default_grid(model_id: str, task) -> HyperGrid:
    """Build the fixed search grid for a model id on a given task.

    Grids depend only on the task's context length and, for multiplicative
    seasonality, on whether all target values are positive.  Assignment
    order is lexicographic over sorted parameter names then values, with
    the additive variant before the multiplicative one.
    """
    context_len = int(task.context_len)
    all_positive = bool((task.data.targets > 0).all())

    if model_id == "seasonal_naive":
        assignments = [
            HyperAssignment.make("seasonal_naive", L=L)
            for L in SEASONAL_PERIODS
            if 1 <= L <= context_len
        ]
    elif model_id in ("croston", "ses", "theta"):
        assignments = [HyperAssignment.make(model_id, alpha=a) for a in SMOOTHING_ALPHAS]
    elif model_id in ("holt_winters", "holt_winters_add", "holt_winters_mul"):
        if model_id == "holt_winters":
            variants = ["holt_winters_add"]
            if all_positive:
                variants.append("holt_winters_mul")
        else:
            variants = [model_id]
            if model_id == "holt_winters_mul" and not all_positive:
                variants = []
        periods = [L for L in SEASONAL_PERIODS if 2 <= L <= context_len // 2]
        assignments = [
            HyperAssignment.make(variant, L=L, alpha=a, beta=b, gamma=g)
            for variant in variants
            for L, a, b, g in itertools.product(
                periods, (0.1, 0.3, 0.5), (0.0, 0.1, 0.3), (0.1, 0.3, 0.5)
            )
        ]
    elif model_id == "arima":
        assignments = [
            HyperAssignment.make("arima", d=d, p=p, q=q, with_constant=constant)
            for d, p, q, constant in itertools.product(
                (0, 1), (0, 1, 2), (0, 1), (False, True)
            )
            if (p, d, q) != (0, 0, 0)
        ]
    elif model_id == "drift":
        assignments = [HyperAssignment.make("drift")]
    else:
        raise UnknownModel(f"unknown model id {model_id!r}")

    assignments.sort(key=lambda a: (a.model_id, a.params))
    return HyperGrid(model_id=model_id, assignments=tuple(assignments))
