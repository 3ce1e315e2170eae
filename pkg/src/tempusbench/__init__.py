"""tempusbench: an evaluation harness for time-series point forecasters.

The package evaluates forecasting models on rolling windows cut from the
end of each series, tunes hyperparameters on held-out validation windows,
scores point forecasts with standard error metrics, and aggregates results
across tasks into win rates and skill scores against a baseline model.
External forecasters plug in over a line-delimited JSON protocol.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .aggregate import (
    AggregateReport,
    ErrorPivot,
    ModelAggregate,
    aggregate_all,
    skill_score,
    win_rate,
)
from .core import (
    DEFAULT_TEST_WINDOWS,
    DEFAULT_TUNE_WINDOWS,
    ForecastMatrix,
    SeriesFrame,
    TaskSpec,
    Window,
    WindowPlan,
    default_window_counts,
    plan_windows,
    validate_task,
)
from .errors import (
    AdapterCrash,
    AdapterError,
    AdapterTimeout,
    AllAssignmentsFailed,
    ForecastError,
    InsufficientHistory,
    InvalidPeriod,
    MalformedResponse,
    NonConvergence,
    NonMonotonicTimestamps,
    NonPositiveData,
    NumericalFailure,
    ParseError,
    SchemaError,
    ShapeMismatch,
    SingularFit,
    TempusError,
    UndefinedMetric,
    UnknownModel,
)
from .extern import AdapterClient, ForecastRequest, ForecastResponse, call_adapter
from .forecasters import HyperAssignment, HyperGrid, MODEL_IDS, default_grid, forecast
from .io_cli import (
    CsvSchema,
    Manifest,
    ReportBundle,
    load_csv,
    load_manifest,
    read_pivot_csv,
    write_pivot_csv,
    write_reports,
    write_series_csv,
)
from .metrics import METRIC_IDS, compute_metric, mae, mape, mase, mse, rmse
from .pipeline import (
    BenchmarkResult,
    EvalResult,
    ModelEntry,
    RunConfig,
    TuneResult,
    check_leakage,
    evaluate,
    run_benchmark,
    tune,
)
from .synth import FAMILIES, GenOutput, GenSpec, derive_seed, exponential_noise, generate

__all__ = [
    "__version__",
    "AdapterClient",
    "AdapterCrash",
    "AdapterError",
    "AdapterTimeout",
    "AggregateReport",
    "AllAssignmentsFailed",
    "BenchmarkResult",
    "CsvSchema",
    "DEFAULT_TEST_WINDOWS",
    "DEFAULT_TUNE_WINDOWS",
    "ErrorPivot",
    "EvalResult",
    "FAMILIES",
    "ForecastError",
    "ForecastMatrix",
    "ForecastRequest",
    "ForecastResponse",
    "GenOutput",
    "GenSpec",
    "HyperAssignment",
    "HyperGrid",
    "InsufficientHistory",
    "InvalidPeriod",
    "METRIC_IDS",
    "MODEL_IDS",
    "MalformedResponse",
    "Manifest",
    "ModelAggregate",
    "ModelEntry",
    "NonConvergence",
    "NonMonotonicTimestamps",
    "NonPositiveData",
    "NumericalFailure",
    "ParseError",
    "ReportBundle",
    "RunConfig",
    "SchemaError",
    "SeriesFrame",
    "ShapeMismatch",
    "SingularFit",
    "TaskSpec",
    "TempusError",
    "TuneResult",
    "UndefinedMetric",
    "UnknownModel",
    "Window",
    "WindowPlan",
    "aggregate_all",
    "call_adapter",
    "check_leakage",
    "compute_metric",
    "default_grid",
    "default_window_counts",
    "derive_seed",
    "evaluate",
    "exponential_noise",
    "forecast",
    "generate",
    "load_csv",
    "load_manifest",
    "mae",
    "mape",
    "mase",
    "mse",
    "plan_windows",
    "read_pivot_csv",
    "rmse",
    "run_benchmark",
    "skill_score",
    "tune",
    "validate_task",
    "win_rate",
    "write_pivot_csv",
    "write_reports",
    "write_series_csv",
]
