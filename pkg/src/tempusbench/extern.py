"""Client side of the line-delimited JSON subprocess protocol.

External forecasters run as child processes: the harness writes one JSON
request per line to the adapter's stdin and reads one JSON response per
line from its stdout.  Requests on a single process are strictly
sequential; parallelism comes from running multiple processes.  A crashed
process is restarted at most once per client; timeouts kill the process.

The wire format is versioned (protocol_version 1) and documented by the
JSON schema shipped alongside this module (see protocol_schema_path).
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import numpy as np

from .errors import (
    AdapterCrash,
    AdapterError,
    AdapterTimeout,
    MalformedResponse,
    ShapeMismatch,
)

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 120.0

_EOF = object()
_STDERR_CAP = 65536


def protocol_schema_path():
    """Filesystem path of the machine-readable wire-protocol schema."""
    return resources.files(__package__) / "protocol_schema.json"


@dataclass(frozen=True, eq=False)
class ForecastRequest:
    task_id: str
    context: Any
    horizon: int
    params: dict[str, Any] = field(default_factory=dict)
    covariates_past: Any = None
    covariates_future: Any = None
    protocol_version: int = PROTOCOL_VERSION

    def to_payload(self) -> dict:
        def listify(arr) -> list:
            if arr is None:
                return []
            return np.asarray(arr, dtype=np.float64).tolist()

        return {
            "op": "forecast",
            "protocol_version": self.protocol_version,
            "task_id": self.task_id,
            "context": listify(self.context),
            "covariates_past": listify(self.covariates_past),
            "covariates_future": listify(self.covariates_future),
            "horizon": int(self.horizon),
            "params": dict(self.params),
        }


@dataclass(frozen=True, eq=False)
class ForecastResponse:
    """Exactly one of values/error is set."""

    values: np.ndarray | None = None
    error: dict | None = None


def _parse_response(reply: dict, n_targets: int, horizon: int) -> ForecastResponse:
    has_values = "values" in reply
    has_error = "error" in reply
    if has_values == has_error:
        raise MalformedResponse("response must contain exactly one of values/error")
    if has_error:
        err = reply["error"]
        if not isinstance(err, dict) or "code" not in err:
            raise MalformedResponse("error record must be an object with a code")
        return ForecastResponse(error=err)
    try:
        values = np.asarray(reply["values"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedResponse(f"values are not a numeric matrix: {exc}") from None
    if values.ndim != 2 or values.shape != (n_targets, horizon):
        raise ShapeMismatch(
            f"adapter returned shape {values.shape}, expected ({n_targets}, {horizon})"
        )
    if not np.isfinite(values).all():
        raise MalformedResponse("values contain non-finite entries")
    return ForecastResponse(values=values)


class AdapterClient:
    """Manages one adapter process and its sequential request/response loop."""

    def __init__(self, command, timeout: float = DEFAULT_TIMEOUT) -> None:
        self.command = tuple(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue | None = None
        self._stderr_chunks: list[str] = []
        self._restarts_used = 0
        self._started = False
        self._lock = threading.Lock()

    # -- process lifecycle ---------------------------------------------------

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise AdapterCrash(None, f"could not start {self.command[0]}: {exc}") from None
        self._lines = queue.Queue()
        self._stderr_chunks = []
        threading.Thread(
            target=self._pump_stdout, args=(self._proc.stdout, self._lines), daemon=True
        ).start()
        threading.Thread(
            target=self._pump_stderr, args=(self._proc.stderr,), daemon=True
        ).start()
        self._started = True

    @staticmethod
    def _pump_stdout(stream, out: queue.Queue) -> None:
        try:
            for line in stream:
                out.put(line)
        except ValueError:
            pass
        out.put(_EOF)

    def _pump_stderr(self, stream) -> None:
        total = 0
        try:
            for line in stream:
                if total < _STDERR_CAP:
                    self._stderr_chunks.append(line)
                    total += len(line)
        except ValueError:
            pass

    def _stderr_text(self) -> str:
        return "".join(self._stderr_chunks)

    def _ensure_process(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        if self._started:
            if self._restarts_used >= 1:
                raise AdapterCrash(
                    self._proc.poll() if self._proc else None, self._stderr_text()
                )
            self._restarts_used += 1
        self._start()

    def _kill(self) -> None:
        if self._proc is None:
            return
        if self._proc.poll() is None:
            self._proc.kill()
        self._proc.wait()
        for stream in (self._proc.stdin, self._proc.stdout, self._proc.stderr):
            if stream:
                try:
                    stream.close()
                except OSError:
                    pass

    def close(self) -> None:
        self._kill()
        self._proc = None

    # -- request plumbing ----------------------------------------------------

    def _send_and_read(self, payload: dict) -> dict:
        proc = self._proc
        try:
            proc.stdin.write(json.dumps(payload, sort_keys=True) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            proc.wait()
            raise AdapterCrash(proc.returncode, self._stderr_text()) from None
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self._kill()
            raise AdapterTimeout(
                f"no response within {self.timeout} s from {self.command[0]}"
            ) from None
        if line is _EOF:
            proc.wait()
            raise AdapterCrash(proc.returncode, self._stderr_text())
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"invalid JSON from adapter: {exc}") from None
        if not isinstance(reply, dict):
            raise MalformedResponse("adapter response must be a JSON object")
        return reply

    def _request(self, payload: dict) -> dict:
        with self._lock:
            while True:
                self._ensure_process()
                try:
                    return self._send_and_read(payload)
                except AdapterCrash:
                    # spawn failures are not retried; crashes get one restart,
                    # performed by _ensure_process on the next loop pass
                    if not self._started or self._restarts_used >= 1:
                        raise

    # -- protocol operations ---------------------------------------------------

    def handshake(self) -> dict:
        """Send the hello message; return the adapter's capability record."""
        reply = self._request({"op": "hello", "protocol_version": PROTOCOL_VERSION})
        declared = reply.get("protocol_version", PROTOCOL_VERSION)
        if declared != PROTOCOL_VERSION:
            raise MalformedResponse(
                f"unsupported protocol version {declared!r}, expected {PROTOCOL_VERSION}"
            )
        if "name" not in reply or not isinstance(reply["name"], str):
            raise MalformedResponse("capability record must declare a name")
        grid = reply.get("hyper_grid")
        if grid is not None:
            if not isinstance(grid, dict) or not all(
                isinstance(v, list) and v for v in grid.values()
            ):
                raise MalformedResponse("hyper_grid must map names to non-empty lists")
        return {
            "name": reply["name"],
            "supports_covariates": bool(reply.get("supports_covariates", False)),
            "hyper_grid": grid,
        }

    def call(self, request: ForecastRequest) -> ForecastResponse:
        """One forecast round trip; adapter-reported errors come back in the response."""
        context = np.atleast_2d(np.asarray(request.context, dtype=np.float64))
        reply = self._request(request.to_payload())
        return _parse_response(reply, context.shape[0], request.horizon)

    def forecast(
        self,
        task_id: str,
        context,
        horizon: int,
        params: dict | None = None,
        covariates_past=None,
        covariates_future=None,
    ) -> np.ndarray:
        """Forecast values or raise; adapter error records raise AdapterError."""
        response = self.call(
            ForecastRequest(
                task_id=task_id,
                context=np.atleast_2d(np.asarray(context, dtype=np.float64)),
                horizon=horizon,
                params=params or {},
                covariates_past=covariates_past,
                covariates_future=covariates_future,
            )
        )
        if response.error is not None:
            code = response.error.get("code", "unknown")
            message = response.error.get("message", "")
            raise AdapterError(f"adapter error {code}: {message}")
        return response.values


def call_adapter(
    command, request: ForecastRequest, timeout: float = DEFAULT_TIMEOUT
) -> ForecastResponse:
    """Spawn an adapter, perform one forecast round trip, and clean up."""
    client = AdapterClient(command, timeout=timeout)
    try:
        return client.call(request)
    finally:
        client.close()
