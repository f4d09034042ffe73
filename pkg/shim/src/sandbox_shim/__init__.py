"""Run one untrusted candidate in a killable child process and report the result.

The protocol is one JSON request line on stdin, one JSON response line on
stdout, exit code 0.  Anything that prevents a response (malformed request)
is reported on stderr with exit code 2.

The candidate itself never runs in the protocol process.  It runs in a
forked child whose stdout and stderr point at /dev/null, under an address
space limit and a SIGALRM deadline; the parent supervises the child through
a pipe and kills its whole process group if it overstays the deadline.
This holds even for candidates that swallow BaseException in a tight loop,
which on CPython 3.10 can suppress signal handler delivery in their own
process indefinitely.
"""

from __future__ import annotations

import io
import json
import os
import select
import signal
import sys
import time
from contextlib import redirect_stderr, redirect_stdout
from typing import Any

CANDIDATE_FILENAME = "<candidate>"
STDERR_TAIL_CHARS = 2000
DEFAULT_MEMORY_MB = 512

STATUS_OK = "ok"
STATUS_EXCEPTION = "exception"
STATUS_TIMEOUT = "timeout"
STATUS_LOAD_ERROR = "load_error"

_STATUSES = {STATUS_OK, STATUS_EXCEPTION, STATUS_TIMEOUT, STATUS_LOAD_ERROR}

# Extra time the supervisor grants the child beyond time_ms before killing
# it.  A well-behaved timeout is reported by the child's own alarm at
# time_ms; the grace period only matters for candidates that defeat
# in-process signal delivery.
_KILL_GRACE_S = 0.5
_PIPE_CHUNK = 65536


class RequestError(ValueError):
    """Raised when the request line cannot be parsed or validated."""


class _Timeout(BaseException):
    """Raised inside the candidate when the deadline alarm fires.

    Derives from BaseException so that candidate code catching Exception
    does not absorb it.
    """


def parse_request(line: str) -> dict[str, Any]:
    """Parse and validate one request line, returning a normalized dict."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RequestError(f"request is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise RequestError("request must be a JSON object")

    code = raw.get("code")
    if not isinstance(code, str):
        raise RequestError("field 'code' must be a string")

    time_ms = raw.get("time_ms")
    if isinstance(time_ms, bool) or not isinstance(time_ms, int) or time_ms <= 0:
        raise RequestError("field 'time_ms' must be a positive integer")

    trace = raw.get("trace")
    if not isinstance(trace, bool):
        raise RequestError("field 'trace' must be a boolean")

    memory_mb = raw.get("memory_mb", DEFAULT_MEMORY_MB)
    if isinstance(memory_mb, bool) or not isinstance(memory_mb, int) or memory_mb <= 0:
        raise RequestError("field 'memory_mb' must be a positive integer")

    has_args = "args" in raw
    has_stdin = "stdin_text" in raw
    if has_args == has_stdin:
        raise RequestError("exactly one of 'args' and 'stdin_text' is required")

    request: dict[str, Any] = {
        "code": code,
        "time_ms": time_ms,
        "trace": trace,
        "memory_mb": memory_mb,
    }
    if has_args:
        args = raw.get("args")
        if not isinstance(args, dict):
            raise RequestError("field 'args' must be an object")
        entry_point = raw.get("entry_point")
        if not isinstance(entry_point, str) or not entry_point:
            raise RequestError("field 'entry_point' must be a nonempty string")
        request["args"] = args
        request["entry_point"] = entry_point
    else:
        if "entry_point" in raw:
            raise RequestError("'entry_point' is only valid together with 'args'")
        stdin_text = raw.get("stdin_text")
        if not isinstance(stdin_text, str):
            raise RequestError("field 'stdin_text' must be a string")
        request["stdin_text"] = stdin_text
    return request


def sanitize_value(obj: Any) -> Any:
    """Reduce a return value to a canonical JSON-serializable tree.

    Containers are rebuilt recursively, tuples become lists, mapping keys
    become strings, and anything else is rendered with str().
    """
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, (list, tuple)):
        return [sanitize_value(item) for item in obj]
    if isinstance(obj, dict):
        return {str(key): sanitize_value(value) for key, value in obj.items()}
    return str(obj)


class _StepCounter:
    """Trace function counting line events inside the candidate source."""

    def __init__(self) -> None:
        self.steps = 0

    def __call__(self, frame, event, arg):
        if frame.f_code.co_filename != CANDIDATE_FILENAME:
            return None
        if event == "line":
            self.steps += 1
        return self


def _tail(text: str) -> str:
    return text[-STDERR_TAIL_CHARS:]


def _exception_tail(buffer: io.StringIO, exc: BaseException) -> str:
    """Format an exception with its candidate line, after captured stderr."""
    line = None
    tb = exc.__traceback__
    while tb is not None:
        if tb.tb_frame.f_code.co_filename == CANDIDATE_FILENAME:
            line = tb.tb_lineno
        tb = tb.tb_next
    message = f"{type(exc).__name__}: {exc}"
    if line is not None:
        message += f" (line {line})"
    captured = buffer.getvalue()
    if captured:
        message = captured + "\n" + message
    return _tail(message)


def _apply_memory_limit(memory_mb: int) -> None:
    """Clamp the child's address space; best effort, never fatal."""
    try:
        import resource
    except ImportError:
        return
    limit = memory_mb << 20
    try:
        _, hard = resource.getrlimit(resource.RLIMIT_AS)
        if hard != resource.RLIM_INFINITY:
            limit = min(limit, hard)
        resource.setrlimit(resource.RLIMIT_AS, (limit, hard))
    except (ValueError, OSError):
        pass


def render_response(response: dict[str, Any]) -> str:
    return json.dumps(response, sort_keys=True, ensure_ascii=False)


def _timeout_response(time_ms: int) -> dict[str, Any]:
    # Timeout responses are fully canonical: output and steps observed
    # before a deadline are not reproducible run to run, so none are
    # reported and replays never diverge.
    return {
        "status": STATUS_TIMEOUT,
        "stdout": "",
        "stderr_tail": f"timed out after {time_ms} ms",
        "steps": 0,
    }


def _execute(request: dict[str, Any]) -> dict[str, Any]:
    """Compile and run the candidate in this process; child-side only."""
    time_ms = request["time_ms"]
    counter = _StepCounter()
    out_buffer = io.StringIO()
    err_buffer = io.StringIO()
    stdin_mode = "stdin_text" in request
    namespace: dict[str, Any] = {"__name__": "__main__", "__builtins__": __builtins__}
    fired = False

    def handle_alarm(signum, frame):
        nonlocal fired
        fired = True
        raise _Timeout

    status = STATUS_OK
    detail = ""
    value = None
    in_load_phase = True
    old_stdin = sys.stdin
    sys.stdin = io.StringIO(request.get("stdin_text", ""))
    signal.signal(signal.SIGALRM, handle_alarm)
    signal.setitimer(signal.ITIMER_REAL, time_ms / 1000.0)
    try:
        compiled = compile(request["code"], CANDIDATE_FILENAME, "exec")
        if request["trace"]:
            sys.settrace(counter)
        with redirect_stdout(out_buffer), redirect_stderr(err_buffer):
            exec(compiled, namespace)
            in_load_phase = False
            if not stdin_mode:
                entry = namespace.get(request["entry_point"])
                if not callable(entry):
                    status = STATUS_EXCEPTION
                    detail = f"entry point {request['entry_point']!r} not found"
                else:
                    value = sanitize_value(entry(**request["args"]))
    except _Timeout:
        return _timeout_response(time_ms)
    except MemoryError as exc:
        status = STATUS_EXCEPTION
        detail = _exception_tail(err_buffer, exc)
    except BaseException as exc:
        if isinstance(exc, SyntaxError) or in_load_phase:
            status = STATUS_LOAD_ERROR
        else:
            status = STATUS_EXCEPTION
        detail = _exception_tail(err_buffer, exc)
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        sys.settrace(None)
        sys.stdin = old_stdin

    if fired:
        # The alarm went off but candidate code intercepted it; the limit
        # still counts as exceeded no matter how the run ended.
        return _timeout_response(time_ms)

    stdout_text = out_buffer.getvalue()
    if status == STATUS_OK and stdin_mode and not stdout_text:
        status = STATUS_EXCEPTION
        detail = "no output produced"
    if status == STATUS_OK:
        detail = _tail(err_buffer.getvalue())
    response: dict[str, Any] = {
        "status": status,
        "stdout": stdout_text,
        "stderr_tail": detail,
        "steps": counter.steps,
    }
    if status == STATUS_OK and not stdin_mode:
        response["value"] = value
    return response


def _child_main(request: dict[str, Any], write_fd: int) -> None:
    """Run the candidate and ship the response over the pipe; never returns."""
    try:
        os.setsid()
        # Detach the inherited standard streams so raw fd writes from the
        # candidate can never reach the protocol stream.
        null_in = os.open(os.devnull, os.O_RDONLY)
        null_out = os.open(os.devnull, os.O_WRONLY)
        os.dup2(null_in, 0)
        os.dup2(null_out, 1)
        os.dup2(null_out, 2)
        os.close(null_in)
        os.close(null_out)
        _apply_memory_limit(request["memory_mb"])
        response = _execute(request)
    except BaseException as exc:
        response = {
            "status": STATUS_EXCEPTION,
            "stdout": "",
            "stderr_tail": _tail(f"harness failure: {type(exc).__name__}: {exc}"),
            "steps": 0,
        }
    try:
        os.write(write_fd, (render_response(response) + "\n").encode("utf-8"))
    except BaseException:
        pass
    os._exit(0)


def _decode_child_payload(payload: bytes) -> dict[str, Any] | None:
    """Accept the pipe contents only if they form one well-typed response."""
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError:
        return None
    if not text.endswith("\n") or text.count("\n") != 1:
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict) or obj.get("status") not in _STATUSES:
        return None
    if not isinstance(obj.get("stdout"), str) or not isinstance(obj.get("stderr_tail"), str):
        return None
    steps = obj.get("steps")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 0:
        return None
    return obj


def _kill_child(pid: int) -> None:
    for killer in (os.killpg, os.kill):
        try:
            killer(pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError, OSError):
            pass


def run_request(request: dict[str, Any]) -> dict[str, Any]:
    """Run one validated request in a forked child and return the response."""
    read_fd, write_fd = os.pipe()
    pid = os.fork()
    if pid == 0:
        os.close(read_fd)
        _child_main(request, write_fd)
        os._exit(0)  # unreachable
    os.close(write_fd)

    time_ms = request["time_ms"]
    deadline = time.monotonic() + time_ms / 1000.0 + _KILL_GRACE_S
    chunks = []
    saw_eof = False
    try:
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            ready, _, _ = select.select([read_fd], [], [], remaining)
            if not ready:
                break
            chunk = os.read(read_fd, _PIPE_CHUNK)
            if not chunk:
                saw_eof = True
                break
            chunks.append(chunk)
    finally:
        os.close(read_fd)
        _kill_child(pid)
        _, exit_status = os.waitpid(pid, 0)

    payload = b"".join(chunks)
    response = _decode_child_payload(payload)
    if response is not None:
        return response
    if not saw_eof:
        return _timeout_response(time_ms)
    if payload:
        return {
            "status": STATUS_EXCEPTION,
            "stdout": "",
            "stderr_tail": "candidate corrupted the result channel",
            "steps": 0,
        }
    if os.WIFSIGNALED(exit_status):
        detail = f"candidate process killed by signal {os.WTERMSIG(exit_status)}"
    else:
        detail = (
            "candidate process exited before producing a result "
            f"(exit code {os.WEXITSTATUS(exit_status)})"
        )
    return {
        "status": STATUS_EXCEPTION,
        "stdout": "",
        "stderr_tail": detail,
        "steps": 0,
    }


def main(argv: list[str] | None = None) -> int:
    """Serve exactly one request from stdin and answer on stdout."""
    line = sys.stdin.readline()
    if not line.strip():
        print("empty request", file=sys.stderr)
        return 2
    try:
        request = parse_request(line)
    except RequestError as exc:
        print(f"bad request: {exc}", file=sys.stderr)
        return 2
    response = run_request(request)
    sys.stdout.write(render_response(response) + "\n")
    sys.stdout.flush()
    return 0
