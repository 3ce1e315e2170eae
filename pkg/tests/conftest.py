from __future__ import annotations

import re
import sys
from pathlib import Path

import numpy as np
import pytest

from tempusbench.core import SeriesFrame, TaskSpec

ADAPTERS = Path(__file__).parent / "adapters"

# one summary line per acceptance test, printed after the run
_ACCEPTANCE_LABELS = {
    1: "metric oracle equivalence",
    2: "aggregator brute-force equivalence",
    3: "ratio clip semantics",
    4: "tuner selects the true period",
    5: "leakage-free audit log",
    6: "constant-context fixed points",
    7: "metric scale properties",
    8: "generator statistics and determinism",
    9: "end-to-end byte-identical reruns",
    10: "reference adapter conformance",
}
_acceptance_results: dict[int, str] = {}


def adapter_command(name: str, *args: str) -> list[str]:
    return [sys.executable, str(ADAPTERS / f"{name}.py"), *args]


@pytest.fixture
def adapter_cmd():
    return adapter_command


def make_task(
    values,
    task_id: str = "task",
    context_len: int = 8,
    horizon: int = 4,
    covariates=None,
) -> TaskSpec:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    frame = SeriesFrame(
        timestamps=tuple(range(values.shape[1])),
        targets=values,
        covariates=covariates,
    )
    return TaskSpec(
        task_id=task_id, context_len=context_len, horizon=horizon, data=frame
    )


@pytest.fixture
def task_factory():
    return make_task


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if match:
        _acceptance_results[int(match.group(1))] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        outcome = _acceptance_results[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        label = _ACCEPTANCE_LABELS.get(number, "")
        terminalreporter.write_line(f"criterion {number:>2}: {status} - {label}")
