"""In-process executor behavior and shim-client protocol handling.

Step-count expectations here are frozen values, cross-checked against
an independent reference tracer before being written down.
"""

from __future__ import annotations

import sys

from dualexec.executors import (
    STATUS_EXCEPTION,
    STATUS_LOAD_ERROR,
    STATUS_OK,
    STATUS_PROTOCOL_ERROR,
    STATUS_TIMEOUT,
    ExecRequest,
    InProcessExecutor,
    RunResult,
    ShimExecutor,
)

MIN_OPS_SOURCE = '''
def minimumOperations(num: str) -> int:
    possible_ends = ["00", "25", "50", "75"]
    min_operations = len(num) + 1

    for possible_end in possible_ends:
        i = len(num) - 1
        found_digits = 0
        j = 0

        while i >= 0:
            if found_digits == 0 and num[i] == possible_end[1]:
                found_digits = 1
                j = i
            elif found_digits == 1 and num[i] == possible_end[0]:
                found_digits = 2
                break
            i -= 1

        if found_digits == 2:
            operations = (j - i - 1) + (len(num) - j - 1)
            min_operations = min(min_operations, operations)

    if min_operations == len(num) + 1:
        return len(num) - 1  # All digits removed except one

    return min_operations
'''


class TestInProcessEntryMode:
    def setup_method(self):
        self.executor = InProcessExecutor()

    def test_tiny_function_value_and_steps(self):
        result = self.executor.run(
            ExecRequest("def f(x): return x", entry_point="f", args={"x": 7})
        )
        assert result.status == STATUS_OK
        assert result.value == 7 and result.value_present
        assert result.steps == 2  # one def line at load, one return line

    def test_digit_deletion_example(self):
        result = self.executor.run(
            ExecRequest(MIN_OPS_SOURCE, entry_point="minimumOperations", args={"num": "2245047"})
        )
        assert result.status == STATUS_OK
        assert result.value == 2
        assert result.steps == 134

    def test_steps_deterministic(self):
        request = ExecRequest(
            MIN_OPS_SOURCE, entry_point="minimumOperations", args={"num": "2245047"}
        )
        runs = {self.executor.run(request).steps for _ in range(3)}
        assert runs == {134}

    def test_none_return_is_a_present_value(self):
        result = self.executor.run(
            ExecRequest("def f(x): pass", entry_point="f", args={"x": 1})
        )
        assert result.status == STATUS_OK
        assert result.value is None and result.value_present

    def test_tuple_return_sanitized(self):
        result = self.executor.run(
            ExecRequest("def f(x): return (x, x + 1)", entry_point="f", args={"x": 1})
        )
        assert result.value == [1, 2]

    def test_exception_reports_type_and_line(self):
        source = "def f(x):\n    return x // 0\n"
        result = self.executor.run(ExecRequest(source, entry_point="f", args={"x": 1}))
        assert result.status == STATUS_EXCEPTION
        assert "ZeroDivisionError" in result.stderr_tail
        assert "line 2" in result.stderr_tail

    def test_missing_entry_point(self):
        result = self.executor.run(
            ExecRequest("def g(x): return x", entry_point="f", args={"x": 1})
        )
        assert result.status == STATUS_EXCEPTION
        assert "not found" in result.stderr_tail

    def test_timeout_on_hot_loop(self):
        result = self.executor.run(
            ExecRequest(
                "def f(x):\n    while True:\n        pass",
                entry_point="f", args={"x": 1}, time_ms=300,
            )
        )
        assert result.status == STATUS_TIMEOUT

    def test_timeout_at_module_level(self):
        result = self.executor.run(ExecRequest("while True:\n    pass", time_ms=300))
        assert result.status == STATUS_TIMEOUT

    def test_broad_except_cannot_swallow_timeout(self):
        source = (
            "def f(x):\n"
            "    try:\n"
            "        while True:\n"
            "            pass\n"
            "    except Exception:\n"
            "        return 'survived'\n"
        )
        result = self.executor.run(
            ExecRequest(source, entry_point="f", args={"x": 1}, time_ms=300)
        )
        assert result.status == STATUS_TIMEOUT

    def test_trace_disabled_reports_zero_steps(self):
        result = self.executor.run(
            ExecRequest("def f(x): return x", entry_point="f", args={"x": 7}, trace=False)
        )
        assert result.status == STATUS_OK and result.steps == 0


class TestInProcessLoadFailures:
    def setup_method(self):
        self.executor = InProcessExecutor()

    def test_syntax_error(self):
        result = self.executor.run(ExecRequest("def f(:\n    pass"))
        assert result.status == STATUS_LOAD_ERROR

    def test_import_failure(self):
        result = self.executor.run(ExecRequest("import does_not_exist_anywhere"))
        assert result.status == STATUS_LOAD_ERROR
        assert "ModuleNotFoundError" in result.stderr_tail

    def test_module_level_crash(self):
        result = self.executor.run(ExecRequest("x = 1 // 0"))
        assert result.status == STATUS_LOAD_ERROR
        assert "ZeroDivisionError" in result.stderr_tail


class TestInProcessStdinMode:
    def setup_method(self):
        self.executor = InProcessExecutor()

    def test_reads_stdin_writes_stdout(self):
        source = "a, b = input().split()\nprint(int(a) + int(b))\n"
        result = self.executor.run(ExecRequest(source, stdin_text="3 4\n"))
        assert result.status == STATUS_OK
        assert result.stdout == "7\n"
        assert not result.value_present

    def test_silent_program_is_ok_with_empty_stdout(self):
        result = self.executor.run(ExecRequest("x = 1", stdin_text=""))
        assert result.status == STATUS_OK
        assert result.stdout == ""


class TestShimClientProtocol:
    """Protocol-violation handling, using stand-in commands for the shim."""

    def test_garbage_stdout_is_protocol_error(self):
        executor = ShimExecutor([sys.executable, "-c", "print('not json')"])
        result = executor.run(ExecRequest("x = 1"))
        assert result.status == STATUS_PROTOCOL_ERROR

    def test_nonzero_exit_is_protocol_error(self):
        executor = ShimExecutor([sys.executable, "-c", "raise SystemExit(3)"])
        result = executor.run(ExecRequest("x = 1"))
        assert result.status == STATUS_PROTOCOL_ERROR
        assert "exit 3" in result.stderr_tail

    def test_multiple_lines_is_protocol_error(self):
        executor = ShimExecutor(
            [sys.executable, "-c", "print('{}'); print('{}')"]
        )
        result = executor.run(ExecRequest("x = 1"))
        assert result.status == STATUS_PROTOCOL_ERROR

    def test_unknown_status_is_protocol_error(self):
        executor = ShimExecutor(
            [sys.executable, "-c", "print('{\"status\": \"weird\"}')"]
        )
        result = executor.run(ExecRequest("x = 1"))
        assert result.status == STATUS_PROTOCOL_ERROR

    def test_unspawnable_command_is_protocol_error(self):
        executor = ShimExecutor(["/no/such/binary"])
        result = executor.run(ExecRequest("x = 1"))
        assert result.status == STATUS_PROTOCOL_ERROR

    def test_valid_response_line_maps_through(self):
        response = '{"status": "ok", "value": 5, "stdout": "", "stderr_tail": "", "steps": 3}'
        executor = ShimExecutor([sys.executable, "-c", f"print('{response}')"])
        result = executor.run(ExecRequest("x = 1", entry_point="f", args={}))
        assert result.status == STATUS_OK
        assert result.value == 5 and result.value_present
        assert result.steps == 3
