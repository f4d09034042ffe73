"""Candidate program executors.

Two implementations of the same contract: an in-process executor used
as a fast test double, and a client for the subprocess sandbox shim.
Both run a candidate module, optionally call an entry point with
structured arguments or feed a stdin blob, and count executed source
lines of the candidate itself.

The in-process executor offers no isolation: it shares the interpreter,
enforces its time limit only at traced line events of pure Python code,
and serializes runs behind a lock because it swaps sys.stdin/stdout.
Anything hostile belongs in the subprocess shim.
"""

from __future__ import annotations

import contextlib
import io
import json
import subprocess
import sys
import threading
import time
import traceback
from dataclasses import dataclass
from typing import Any, Protocol

from .core import sanitize_value

CANDIDATE_FILENAME = "<candidate>"
STDERR_TAIL_CHARS = 2000

STATUS_OK = "ok"
STATUS_EXCEPTION = "exception"
STATUS_TIMEOUT = "timeout"
STATUS_LOAD_ERROR = "load_error"
STATUS_PROTOCOL_ERROR = "protocol_error"


@dataclass
class ExecRequest:
    """One candidate run: module source plus how to drive it."""

    source: str
    entry_point: str | None = None
    args: dict[str, Any] | None = None
    stdin_text: str | None = None
    time_ms: int = 10_000
    memory_mb: int = 512
    trace: bool = True


@dataclass
class RunResult:
    """Low-level outcome mirroring the shim wire response."""

    status: str
    value: Any = None
    value_present: bool = False
    stdout: str = ""
    stderr_tail: str = ""
    steps: int = 0


class Executor(Protocol):
    def run(self, request: ExecRequest) -> RunResult:
        ...


class _TraceTimeout(BaseException):
    # BaseException so a candidate's `except Exception` cannot swallow it.
    pass


def _stderr_tail(captured: str, exc: BaseException | None) -> str:
    parts = [captured]
    if exc is not None:
        line = None
        for frame in traceback.extract_tb(exc.__traceback__):
            if frame.filename == CANDIDATE_FILENAME:
                line = frame.lineno
        loc = f" (line {line})" if line is not None else ""
        parts.append(f"{type(exc).__name__}: {exc}{loc}")
    return "\n".join(p for p in parts if p)[-STDERR_TAIL_CHARS:]


class InProcessExecutor:
    """Runs candidates inside the current interpreter. NOT a sandbox."""

    def __init__(self) -> None:
        self._lock = threading.Lock()

    def run(self, request: ExecRequest) -> RunResult:
        with self._lock:
            return self._run(request)

    def _run(self, request: ExecRequest) -> RunResult:
        try:
            code_obj = compile(request.source, CANDIDATE_FILENAME, "exec")
        except SyntaxError as exc:
            return RunResult(STATUS_LOAD_ERROR, stderr_tail=_stderr_tail("", exc))

        deadline = time.monotonic() + request.time_ms / 1000.0
        steps = 0

        def tracer(frame, event, arg):  # noqa: ANN001
            nonlocal steps
            if frame.f_code.co_filename != CANDIDATE_FILENAME:
                return None
            if time.monotonic() > deadline:
                raise _TraceTimeout()
            if event == "line":
                steps += 1
            return tracer

        namespace: dict[str, Any] = {"__name__": "__main__"}
        out_buf, err_buf = io.StringIO(), io.StringIO()
        old_stdin = sys.stdin
        sys.stdin = io.StringIO(request.stdin_text or "")
        if request.trace:
            sys.settrace(tracer)
        try:
            with contextlib.redirect_stdout(out_buf), contextlib.redirect_stderr(err_buf):
                try:
                    exec(code_obj, namespace)
                except _TraceTimeout:
                    return RunResult(STATUS_TIMEOUT, stdout=out_buf.getvalue(), steps=steps)
                except MemoryError:
                    return RunResult(
                        STATUS_EXCEPTION,
                        stdout=out_buf.getvalue(),
                        stderr_tail=_stderr_tail(err_buf.getvalue(), MemoryError()),
                        steps=steps,
                    )
                except BaseException as exc:  # noqa: BLE001
                    return RunResult(
                        STATUS_LOAD_ERROR,
                        stdout=out_buf.getvalue(),
                        stderr_tail=_stderr_tail(err_buf.getvalue(), exc),
                        steps=steps,
                    )

                if request.entry_point is None:
                    stdout = out_buf.getvalue()
                    return RunResult(
                        STATUS_OK,
                        stdout=stdout,
                        stderr_tail=err_buf.getvalue()[-STDERR_TAIL_CHARS:],
                        steps=steps,
                    )

                fn = namespace.get(request.entry_point)
                if not callable(fn):
                    return RunResult(
                        STATUS_EXCEPTION,
                        stdout=out_buf.getvalue(),
                        stderr_tail=f"entry point {request.entry_point!r} not found",
                        steps=steps,
                    )
                try:
                    result = fn(**(request.args or {}))
                except _TraceTimeout:
                    return RunResult(STATUS_TIMEOUT, stdout=out_buf.getvalue(), steps=steps)
                except BaseException as exc:  # noqa: BLE001
                    return RunResult(
                        STATUS_EXCEPTION,
                        stdout=out_buf.getvalue(),
                        stderr_tail=_stderr_tail(err_buf.getvalue(), exc),
                        steps=steps,
                    )
                return RunResult(
                    STATUS_OK,
                    value=sanitize_value(result),
                    value_present=True,
                    stdout=out_buf.getvalue(),
                    stderr_tail=err_buf.getvalue()[-STDERR_TAIL_CHARS:],
                    steps=steps,
                )
        finally:
            if request.trace:
                sys.settrace(None)
            sys.stdin = old_stdin


class ShimExecutor:
    """Client for the line-oriented subprocess sandbox.

    Sends one JSON request line on stdin, expects one JSON response line
    on stdout and exit code 0. Any other behavior, including a shim that
    outlives its own time budget, is reported as a protocol error rather
    than raised, so one bad candidate cannot take down a benchmark run.
    """

    WATCHDOG_MARGIN_S = 10.0

    def __init__(self, command: list[str] | None = None) -> None:
        self.command = list(command) if command else [sys.executable, "-m", "sandbox_shim"]

    def run(self, request: ExecRequest) -> RunResult:
        payload: dict[str, Any] = {
            "code": request.source,
            "time_ms": request.time_ms,
            "memory_mb": request.memory_mb,
            "trace": request.trace,
        }
        if request.entry_point is not None:
            payload["entry_point"] = request.entry_point
        if request.args is not None:
            payload["args"] = request.args
        if request.stdin_text is not None:
            payload["stdin_text"] = request.stdin_text

        try:
            proc = subprocess.run(
                self.command,
                input=json.dumps(payload, ensure_ascii=False) + "\n",
                capture_output=True,
                text=True,
                timeout=request.time_ms / 1000.0 + self.WATCHDOG_MARGIN_S,
            )
        except subprocess.TimeoutExpired:
            return RunResult(STATUS_PROTOCOL_ERROR, stderr_tail="shim watchdog expired")
        except OSError as exc:
            return RunResult(STATUS_PROTOCOL_ERROR, stderr_tail=f"failed to spawn shim: {exc}")

        if proc.returncode != 0:
            return RunResult(
                STATUS_PROTOCOL_ERROR,
                stderr_tail=f"shim exit {proc.returncode}: {proc.stderr[-500:]}",
            )
        line = proc.stdout.strip()
        if not line or "\n" in line:
            return RunResult(STATUS_PROTOCOL_ERROR, stderr_tail="shim did not write one response line")
        try:
            resp = json.loads(line)
        except ValueError:
            return RunResult(STATUS_PROTOCOL_ERROR, stderr_tail="shim response is not JSON")
        if not isinstance(resp, dict) or resp.get("status") not in (
            STATUS_OK,
            STATUS_EXCEPTION,
            STATUS_TIMEOUT,
            STATUS_LOAD_ERROR,
        ):
            return RunResult(STATUS_PROTOCOL_ERROR, stderr_tail="shim response malformed")
        return RunResult(
            status=resp["status"],
            value=resp.get("value"),
            value_present="value" in resp,
            stdout=resp.get("stdout", ""),
            stderr_tail=resp.get("stderr_tail", ""),
            steps=int(resp.get("steps", 0)),
        )
