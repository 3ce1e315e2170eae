"""Dataset ingestion, run manifests, report emission, and the CLI.

File conventions: manifests are JSON; series and pivots are RFC-4180-style
CSV with a header row, decimal points, and no thousands separators.
Floats are serialized with 17 significant digits so every written value
parses back to the identical double and re-serializes to identical bytes.
Missing cells serialize as empty fields, never as "NaN".

Exit codes: 0 success, 1 validation/usage errors, 2 partial failures
(a run completed but some pivot cells are missing).  The TEMPUS_SEED
environment variable overrides the manifest seed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, forecasters, metrics, synth
from .aggregate import AggregateReport, ErrorPivot, aggregate_all
from .core import SeriesFrame, TaskSpec, validate_task
from .errors import (
    NonMonotonicTimestamps,
    ParseError,
    SchemaError,
    TempusError,
    UnknownModel,
)
from .extern import AdapterClient, DEFAULT_TIMEOUT, protocol_schema_path
from .pipeline import BenchmarkResult, ModelEntry, RunConfig, run_benchmark
from .synth import GenSpec, GenOutput

SEED_ENV_VAR = "TEMPUS_SEED"


def format_number(value: float) -> str:
    """17 significant digits: exact parse round-trip, stable re-serialization."""
    return format(float(value), ".17g")


# ---------------------------------------------------------------------------
# CSV series IO


@dataclass(frozen=True)
class CsvSchema:
    timestamp_column: str = "ts"
    target_columns: tuple[str, ...] = ("y",)
    covariate_columns: tuple[str, ...] = ()


def _parse_timestamp(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def load_csv(path, schema: CsvSchema = CsvSchema()) -> SeriesFrame:
    """Parse a series CSV; line numbers are 1-based and include the header."""
    if not schema.target_columns:
        raise SchemaError("schema must name at least one target column")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, schema.timestamp_column, "file is empty") from None
        positions: dict[str, int] = {}
        for column in (
            schema.timestamp_column,
            *schema.target_columns,
            *schema.covariate_columns,
        ):
            if column not in header:
                raise ParseError(1, column, "column not present in header")
            positions[column] = header.index(column)

        timestamps = []
        targets: list[list[float]] = [[] for _ in schema.target_columns]
        covariates: list[list[float]] = [[] for _ in schema.covariate_columns]
        previous = None
        for line, row in enumerate(reader, start=2):
            def cell(column: str) -> str:
                index = positions[column]
                if index >= len(row):
                    raise ParseError(line, column, "row has too few fields")
                return row[index]

            ts = _parse_timestamp(cell(schema.timestamp_column))
            if previous is not None:
                if type(ts) is not type(previous):
                    raise ParseError(
                        line, schema.timestamp_column, "mixed timestamp types"
                    )
                if not previous < ts:
                    raise NonMonotonicTimestamps(line)
            previous = ts
            timestamps.append(ts)

            for store, column in zip(targets, schema.target_columns):
                text = cell(column).strip()
                if not text:
                    raise ParseError(line, column, "empty target cell")
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(line, column, f"not a number: {text!r}") from None
                if np.isnan(value):
                    raise ParseError(line, column, "NaN target cell")
                store.append(value)
            for store, column in zip(covariates, schema.covariate_columns):
                text = cell(column).strip()
                if not text:
                    raise ParseError(line, column, "empty covariate cell")
                try:
                    store.append(float(text))
                except ValueError:
                    raise ParseError(line, column, f"not a number: {text!r}") from None

    if not timestamps:
        raise ParseError(2, schema.timestamp_column, "file has no data rows")
    return SeriesFrame(
        timestamps=tuple(timestamps),
        targets=np.array(targets, dtype=np.float64),
        covariates=np.array(covariates, dtype=np.float64) if covariates else None,
    )


def write_series_csv(path, frame: SeriesFrame, schema: CsvSchema = CsvSchema()) -> None:
    """Inverse of load_csv for in-range values."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            [schema.timestamp_column, *schema.target_columns, *schema.covariate_columns]
        )
        for index, ts in enumerate(frame.timestamps):
            row = [str(ts)]
            row.extend(format_number(v) for v in frame.targets[:, index])
            row.extend(format_number(v) for v in frame.covariates[:, index])
            writer.writerow(row)


def write_generated_csv(path, output: GenOutput, with_base: bool = False) -> None:
    """Export a generated series; --with-base adds the decomposition columns."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = ["ts", "y"]
        if with_base:
            header.append("y_base")
            if output.alpha_drawn is not None:
                header.append("alpha")
        writer.writerow(header)
        for index in range(output.t.size):
            row = [str(int(output.t[index])), format_number(output.y[index])]
            if with_base:
                row.append(format_number(output.y_base[index]))
                if output.alpha_drawn is not None:
                    row.append(format_number(output.alpha_drawn))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Pivot CSV IO


def write_pivot_csv(path, pivot: ErrorPivot) -> None:
    """Models as rows, tasks as columns, missing cells as empty fields."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["model", *pivot.tasks])
        for i, model in enumerate(pivot.models):
            row = [model]
            for j in range(len(pivot.tasks)):
                cell = pivot.cells[i, j]
                row.append("" if np.isnan(cell) else format_number(cell))
            writer.writerow(row)


def read_pivot_csv(path, metric_id: str | None = None) -> ErrorPivot:
    path = Path(path)
    if metric_id is None:
        metric_id = path.stem.removeprefix("pivot_")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "model", "file is empty") from None
        if not header or header[0] != "model":
            raise ParseError(1, "model", "first header field must be 'model'")
        tasks = tuple(header[1:])
        models = []
        rows = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(tasks) + 1:
                raise ParseError(line, "model", "row width does not match header")
            models.append(row[0])
            values = []
            for column, text in zip(tasks, row[1:]):
                if text == "":
                    values.append(np.nan)
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise ParseError(line, column, f"not a number: {text!r}") from None
            rows.append(values)
    return ErrorPivot(
        metric_id=metric_id,
        models=tuple(models),
        tasks=tasks,
        cells=np.array(rows, dtype=np.float64).reshape(len(models), len(tasks)),
    )


# ---------------------------------------------------------------------------
# Manifests


@dataclass(frozen=True, eq=False)
class Manifest:
    run_id: str
    seed: int
    output_dir: str
    baseline: str | None
    n_tune: int
    n_test: int
    tasks: tuple[TaskSpec, ...]
    models: tuple[ModelEntry, ...]
    config_hash: str
    path: Path


def _genspec_from_dict(raw: dict, fallback_seed: int) -> GenSpec:
    known = {"family", "num_points", "seed", "start_time", "noise_scale", "period"}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(f"unknown generator fields: {sorted(unknown)}")
    if "family" not in raw or "num_points" not in raw:
        raise SchemaError("generator requires family and num_points")
    return GenSpec(
        family=raw["family"],
        num_points=int(raw["num_points"]),
        seed=int(raw.get("seed", fallback_seed)),
        start_time=int(raw.get("start_time", 0)),
        noise_scale=float(raw.get("noise_scale", 0.0)),
        period=float(raw["period"]) if raw.get("period") is not None else None,
    )


def _load_task(entry: dict, manifest_dir: Path, seed: int) -> TaskSpec:
    if not isinstance(entry, dict) or "id" not in entry:
        raise SchemaError("each task needs an id")
    task_id = entry["id"]
    has_csv = "csv" in entry
    has_gen = "generator" in entry
    if has_csv == has_gen:
        raise SchemaError(
            f"task {task_id!r} must have exactly one of csv/generator"
        )
    for required in ("context_len", "horizon"):
        if required not in entry:
            raise SchemaError(f"task {task_id!r} is missing {required}")

    if has_csv:
        csv_path = manifest_dir / entry["csv"]
        if not csv_path.exists():
            raise SchemaError(f"task {task_id!r}: file not found: {csv_path}")
        schema = CsvSchema(
            timestamp_column=entry.get("timestamp_column", "ts"),
            target_columns=tuple(entry.get("target_columns", ("y",))),
            covariate_columns=tuple(entry.get("covariate_columns", ())),
        )
        frame = load_csv(csv_path, schema)
    else:
        spec = _genspec_from_dict(
            entry["generator"], fallback_seed=synth.derive_seed(seed, task_id)
        )
        output = synth.generate(spec)
        frame = SeriesFrame(
            timestamps=tuple(int(t) for t in output.t),
            targets=output.y.reshape(1, -1),
        )

    task = TaskSpec(
        task_id=task_id,
        context_len=int(entry["context_len"]),
        horizon=int(entry["horizon"]),
        data=frame,
        value_kinds=tuple(entry.get("value_kinds", ())),
        frequency_label=entry.get("frequency", ""),
    )
    return validate_task(task)


def _load_model(entry) -> ModelEntry:
    if isinstance(entry, str):
        entry = {"model_id": entry}
    if not isinstance(entry, dict) or "model_id" not in entry:
        raise SchemaError("each model needs a model_id")
    model_id = entry["model_id"]
    external = entry.get("external")
    if external is None:
        if model_id not in forecasters.GRID_IDS:
            raise SchemaError(
                f"unknown native model {model_id!r}; native ids are {forecasters.GRID_IDS}"
            )
        return ModelEntry(model_id=model_id)
    command = external.get("command")
    if not command or not isinstance(command, list):
        raise SchemaError(f"external model {model_id!r} needs a command list")
    return ModelEntry(
        model_id=model_id,
        command=tuple(str(part) for part in command),
        timeout=float(external.get("timeout", DEFAULT_TIMEOUT)),
    )


def load_manifest(path, env=os.environ) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"manifest not found: {path}")
    raw_bytes = path.read_bytes()
    config_hash = hashlib.sha256(raw_bytes).hexdigest()
    try:
        raw = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest is not valid JSON: {exc}") from None

    seed = int(raw.get("seed", 0))
    override = env.get(SEED_ENV_VAR)
    if override is not None:
        try:
            seed = int(override)
        except ValueError:
            raise SchemaError(f"{SEED_ENV_VAR} must be an integer, got {override!r}") from None

    tasks_raw = raw.get("tasks") or []
    models_raw = raw.get("models") or []
    if not tasks_raw:
        raise SchemaError("manifest has no tasks")
    if not models_raw:
        raise SchemaError("manifest has no models")

    tasks = tuple(_load_task(entry, path.parent, seed) for entry in tasks_raw)
    ids = [task.task_id for task in tasks]
    if len(set(ids)) != len(ids):
        raise SchemaError("task ids must be unique")
    models = tuple(_load_model(entry) for entry in models_raw)
    model_ids = [model.model_id for model in models]
    if len(set(model_ids)) != len(model_ids):
        raise SchemaError("model ids must be unique")

    tuning = raw.get("tuning") or {}
    return Manifest(
        run_id=raw.get("run_id") or f"run-{config_hash[:12]}",
        seed=seed,
        output_dir=raw.get("output_dir", "runs"),
        baseline=raw.get("baseline"),
        n_tune=int(tuning.get("n_tune", 3)),
        n_test=int(tuning.get("n_test", 3)),
        tasks=tasks,
        models=models,
        config_hash=config_hash,
        path=path,
    )


def pick_baseline(manifest_baseline: str | None, model_ids) -> str:
    """Manifest choice, else seasonal_naive when present, else the first model."""
    model_ids = list(model_ids)
    if manifest_baseline is not None:
        if manifest_baseline not in model_ids:
            raise UnknownModel(f"baseline {manifest_baseline!r} is not among the models")
        return manifest_baseline
    if "seasonal_naive" in model_ids:
        return "seasonal_naive"
    return model_ids[0]


# ---------------------------------------------------------------------------
# Report bundle


@dataclass(frozen=True, eq=False)
class ReportBundle:
    pivot_paths: dict[str, Path]
    leaderboard_path: Path
    summary_path: Path
    audit_path: Path
    metadata_path: Path
    missing_cells: int


def _mean_of_defined(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def _leaderboard_rows(aggregates: dict[str, AggregateReport]) -> list[dict]:
    metric_ids = list(aggregates)
    model_ids = [row.model_id for row in aggregates[metric_ids[0]].rows]
    rows = []
    for model_id in model_ids:
        per_metric = {m: aggregates[m].row(model_id) for m in metric_ids}
        win_rates = [per_metric[m].win_rate for m in metric_ids]
        skills = [per_metric[m].skill_score for m in metric_ids]
        rows.append(
            {
                "model": model_id,
                "win_rate": {m: per_metric[m].win_rate for m in metric_ids},
                "skill": {m: per_metric[m].skill_score for m in metric_ids},
                "win_rate_mean": _mean_of_defined(win_rates),
                "skill_mean": _mean_of_defined(skills),
            }
        )
    rows.sort(
        key=lambda r: (
            r["win_rate_mean"] is None,
            -(r["win_rate_mean"] or 0.0),
            r["skill_mean"] is None,
            -(r["skill_mean"] or 0.0),
            r["model"],
        )
    )
    return rows


def _write_leaderboard(handle, aggregates: dict[str, AggregateReport]) -> None:
    metric_ids = list(aggregates)
    rows = _leaderboard_rows(aggregates)
    writer = csv.writer(handle, lineterminator="\n")
    header = ["rank", "model"]
    for metric_id in metric_ids:
        header.extend([f"win_rate_{metric_id}", f"skill_{metric_id}"])
    header.extend(["win_rate_mean", "skill_mean"])
    writer.writerow(header)

    def fmt(value: float | None) -> str:
        return "" if value is None else format_number(value)

    for rank, row in enumerate(rows, start=1):
        record = [str(rank), row["model"]]
        for metric_id in metric_ids:
            record.extend([fmt(row["win_rate"][metric_id]), fmt(row["skill"][metric_id])])
        record.extend([fmt(row["win_rate_mean"]), fmt(row["skill_mean"])])
        writer.writerow(record)


def write_leaderboard_csv(path, aggregates: dict[str, AggregateReport]) -> None:
    """Rank, model, per-metric win rate and skill score, plus unweighted means."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        _write_leaderboard(handle, aggregates)


def _write_summary(path, result: BenchmarkResult, aggregates, baseline, missing_cells) -> None:
    metric_ids = list(aggregates)
    rows = _leaderboard_rows(aggregates)
    lines = [
        "# Benchmark summary",
        "",
        f"- run id: `{result.run_id}`",
        f"- baseline for skill scores: `{baseline}`",
        f"- tasks: {len(next(iter(result.pivots.values())).tasks)}",
        f"- models: {len(next(iter(result.pivots.values())).models)}",
        f"- metrics: {', '.join(metric_ids)}",
        f"- missing pivot cells: {missing_cells}",
        "",
        "## Leaderboard",
        "",
        "Mean columns are unweighted means over the per-metric aggregates.",
        "",
        "| rank | model | " + " | ".join(f"win_rate_{m}" for m in metric_ids) + " | win_rate_mean | skill_mean |",
        "|---" * (len(metric_ids) + 4) + "|",
    ]

    def fmt(value: float | None) -> str:
        return "" if value is None else f"{value:.4f}"

    for rank, row in enumerate(rows, start=1):
        cells = " | ".join(fmt(row["win_rate"][m]) for m in metric_ids)
        lines.append(
            f"| {rank} | {row['model']} | {cells} | {fmt(row['win_rate_mean'])} | {fmt(row['skill_mean'])} |"
        )
    lines += [
        "",
        "Native forecasters are univariate and ignore covariate channels;",
        "covariates are forwarded only to external adapters that declare support.",
        "",
    ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def write_reports(
    result: BenchmarkResult,
    aggregates: dict[str, AggregateReport],
    out_dir,
    baseline: str,
    seed: int,
    config_hash: str,
) -> ReportBundle:
    """Emit pivots, leaderboard, summary, audit log, and run metadata."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pivot_paths = {}
    missing_cells = 0
    for metric_id, pivot in result.pivots.items():
        pivot_path = out_dir / f"pivot_{metric_id}.csv"
        write_pivot_csv(pivot_path, pivot)
        pivot_paths[metric_id] = pivot_path
        missing_cells += int(np.isnan(pivot.cells).sum())

    leaderboard_path = out_dir / "leaderboard.csv"
    write_leaderboard_csv(leaderboard_path, aggregates)

    audit_path = out_dir / "audit.jsonl"
    with audit_path.open("w", encoding="utf-8") as handle:
        for record in result.audit:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    metadata_path = out_dir / "run_metadata.json"
    metadata = {
        "run_id": result.run_id,
        "config_hash": config_hash,
        "seed": seed,
        "baseline": baseline,
        "missing_cells": missing_cells,
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
        },
    }
    metadata_path.write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    summary_path = out_dir / "summary.md"
    _write_summary(summary_path, result, aggregates, baseline, missing_cells)

    return ReportBundle(
        pivot_paths=pivot_paths,
        leaderboard_path=leaderboard_path,
        summary_path=summary_path,
        audit_path=audit_path,
        metadata_path=metadata_path,
        missing_cells=missing_cells,
    )


# ---------------------------------------------------------------------------
# CLI


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # keep exit codes under our control
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tempusbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_generate = sub.add_parser("generate", help="generate a synthetic series CSV")
    p_generate.add_argument("genspec", help="JSON file with the generator parameters")
    p_generate.add_argument("out", help="output CSV path")
    p_generate.add_argument(
        "--with-base", action="store_true", help="include noise-free columns"
    )

    p_eval = sub.add_parser("eval", help="run a benchmark manifest")
    p_eval.add_argument("manifest", help="JSON manifest path")
    p_eval.add_argument("--out", help="output directory (overrides the manifest)")

    p_aggregate = sub.add_parser("aggregate", help="aggregate one pivot CSV")
    p_aggregate.add_argument("pivot", help="pivot CSV path")
    p_aggregate.add_argument("--baseline", default="seasonal_naive")
    p_aggregate.add_argument("--out", help="leaderboard CSV path (default: stdout)")

    p_report = sub.add_parser("report", help="rebuild leaderboard/summary from a run dir")
    p_report.add_argument("run_dir", help="directory produced by eval")

    p_check = sub.add_parser("adapter-check", help="probe an adapter for conformance")
    p_check.add_argument("--timeout", type=float, default=10.0)
    p_check.add_argument("adapter_command", nargs=argparse.REMAINDER)
    return parser


def _cmd_generate(args) -> int:
    spec_path = Path(args.genspec)
    if not spec_path.exists():
        raise SchemaError(f"genspec not found: {spec_path}")
    raw = json.loads(spec_path.read_text(encoding="utf-8"))
    spec = _genspec_from_dict(raw, fallback_seed=0)
    output = synth.generate(spec)
    write_generated_csv(args.out, output, with_base=args.with_base)
    return 0


def _cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    baseline = pick_baseline(manifest.baseline, [m.model_id for m in manifest.models])
    config = RunConfig(
        run_id=manifest.run_id,
        seed=manifest.seed,
        n_tune=manifest.n_tune,
        n_test=manifest.n_test,
    )
    result = run_benchmark(list(manifest.tasks), list(manifest.models), config)
    aggregates = {
        metric_id: aggregate_all(pivot, baseline)
        for metric_id, pivot in result.pivots.items()
    }
    out_root = Path(args.out) if args.out else manifest.path.parent / manifest.output_dir
    bundle = write_reports(
        result,
        aggregates,
        out_root / manifest.run_id,
        baseline,
        manifest.seed,
        manifest.config_hash,
    )
    print(f"wrote {bundle.leaderboard_path.parent}")
    return 2 if bundle.missing_cells else 0


def _cmd_aggregate(args) -> int:
    pivot = read_pivot_csv(args.pivot)
    aggregates = {pivot.metric_id: aggregate_all(pivot, args.baseline)}
    if args.out:
        write_leaderboard_csv(args.out, aggregates)
    else:
        _write_leaderboard(sys.stdout, aggregates)
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    metadata_path = run_dir / "run_metadata.json"
    if not metadata_path.exists():
        raise SchemaError(f"run metadata not found: {metadata_path}")
    metadata = json.loads(metadata_path.read_text(encoding="utf-8"))
    baseline = metadata["baseline"]
    pivots = {}
    for metric_id in metrics.METRIC_IDS:
        pivot_path = run_dir / f"pivot_{metric_id}.csv"
        if not pivot_path.exists():
            raise SchemaError(f"pivot not found: {pivot_path}")
        pivots[metric_id] = read_pivot_csv(pivot_path)
    aggregates = {
        metric_id: aggregate_all(pivot, baseline) for metric_id, pivot in pivots.items()
    }
    write_leaderboard_csv(run_dir / "leaderboard.csv", aggregates)
    print(f"rebuilt {run_dir / 'leaderboard.csv'}")
    return 0


def _cmd_adapter_check(args) -> int:
    command = list(args.adapter_command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise SchemaError("adapter-check requires the adapter command")
    client = AdapterClient(command, timeout=args.timeout)
    try:
        capabilities = client.handshake()
        print(json.dumps(capabilities, sort_keys=True))
        params = {}
        if capabilities["hyper_grid"]:
            params = {name: values[0] for name, values in capabilities["hyper_grid"].items()}
        values = client.forecast(
            task_id="adapter-check",
            context=[[1.0, 2.0, 3.0, 4.0]],
            horizon=2,
            params=params,
        )
        print(f"forecast ok: shape {values.shape}")
        print(f"schema: {protocol_schema_path()}")
        return 0
    finally:
        client.close()


def cli(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    handlers = {
        "generate": _cmd_generate,
        "eval": _cmd_eval,
        "aggregate": _cmd_aggregate,
        "report": _cmd_report,
        "adapter-check": _cmd_adapter_check,
    }
    try:
        return handlers[args.command](args)
    except TempusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
