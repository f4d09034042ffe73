"""Translation, entry-point derivation, and the direct execution path."""

from __future__ import annotations

from conftest import Scenario, make_input, make_problem
from dualexec.codepath import derive_entry_point, direct_path, execute, translate
from dualexec.core import ExecLimits, OutcomeStatus, OutputValue, PathKind, TestInput
from dualexec.executors import InProcessExecutor, RunResult
from dualexec.gateway import Ledger, PromptKind, render
from dualexec.pseudo import Pseudocode, generate_pseudocode


class TestTranslate:
    def test_extracts_code_block(self):
        problem = make_problem()
        scenario = Scenario(problem)
        scenario.script_translation("add one", "def solve(x):\n    return x + 1")
        code = translate(scenario.context(), problem, Pseudocode("add one", 4))
        assert code is not None
        assert code.source == "def solve(x):\n    return x + 1"
        assert code.pseudocode_index == 4

    def test_no_code_block_returns_none(self):
        problem = make_problem()
        scenario = Scenario(problem)
        fields = {
            "problem": problem.description,
            "starter_code": problem.starter_code or "",
            "pseudocode": "bad",
        }
        scenario.backend.add(render(PromptKind.CODE_GEN, fields), "I cannot write code today.")
        assert translate(scenario.context(), problem, Pseudocode("bad", 0)) is None

    def test_greedy_translation_is_cached(self):
        problem = make_problem()
        scenario = Scenario(problem)
        scenario.script_translation("plan", "def solve(x):\n    return x")
        ctx = scenario.context()
        for index in (0, 1, 2):
            translate(ctx, problem, Pseudocode("plan", index))
        assert ctx.gateway.ledger.snapshot().backend_calls == 1


class TestDeriveEntryPoint:
    def test_prefers_exact_argument_match(self):
        source = (
            "def helper(a):\n    return a\n"
            "def solve(x, y):\n    return x + y\n"
            "def main():\n    pass\n"
        )
        test_input = TestInput("i", "p", args={"x": 1, "y": 2})
        assert derive_entry_point(source, test_input) == "solve"

    def test_self_parameter_ignored(self):
        source = "def solve(self, nums):\n    return nums\n"
        test_input = TestInput("i", "p", args={"nums": [1]})
        assert derive_entry_point(source, test_input) == "solve"

    def test_falls_back_to_last_function(self):
        source = "def a():\n    pass\n\ndef b(q):\n    return q\n"
        test_input = TestInput("i", "p", args={"x": 1})
        assert derive_entry_point(source, test_input) == "b"

    def test_none_for_stdin_input(self):
        test_input = TestInput("i", "p", stdin="1\n")
        assert derive_entry_point("def f():\n    pass", test_input) is None

    def test_none_without_functions(self):
        test_input = TestInput("i", "p", args={"x": 1})
        assert derive_entry_point("x = 1\n", test_input) is None
        assert derive_entry_point("def broken(:\n", test_input) is None


class TestExecute:
    def setup_method(self):
        self.executor = InProcessExecutor()

    def test_structured_success(self):
        test_input = TestInput("i", "p", args={"x": 20})
        outcome = execute(self.executor, "def solve(x):\n    return x * 2", test_input)
        assert outcome.ok
        assert outcome.value == OutputValue.of(40)
        assert outcome.trace_steps and outcome.trace_steps > 0

    def test_none_return_is_null_output(self):
        test_input = TestInput("i", "p", args={"x": 1})
        outcome = execute(self.executor, "def solve(x):\n    return None", test_input)
        assert outcome.ok
        assert outcome.value == OutputValue.of(None)

    def test_crash_is_runtime_error(self):
        test_input = TestInput("i", "p", args={"x": 1})
        outcome = execute(self.executor, "def solve(x):\n    return x // 0", test_input)
        assert outcome.status is OutcomeStatus.RUNTIME_ERROR
        assert "ZeroDivisionError" in outcome.detail

    def test_loop_forever_is_timeout(self):
        test_input = TestInput("i", "p", args={"x": 1})
        outcome = execute(
            self.executor,
            "def solve(x):\n    while True:\n        pass",
            test_input,
            ExecLimits(time_ms=300),
        )
        assert outcome.status is OutcomeStatus.TIMEOUT

    def test_no_entry_point_is_runtime_error(self):
        test_input = TestInput("i", "p", args={"x": 1})
        outcome = execute(self.executor, "VALUE = 3", test_input)
        assert outcome.status is OutcomeStatus.RUNTIME_ERROR

    def test_stdin_program_output_parsed(self):
        test_input = TestInput("i", "p", stdin="3 4\n")
        source = "a, b = input().split()\nprint(int(a) + int(b))\n"
        outcome = execute(self.executor, source, test_input)
        assert outcome.ok
        assert outcome.value == OutputValue.of(7)

    def test_silent_stdin_program_is_runtime_error(self):
        test_input = TestInput("i", "p", stdin="3 4\n")
        outcome = execute(self.executor, "x = 1", test_input)
        assert outcome.status is OutcomeStatus.RUNTIME_ERROR

    def test_protocol_error_maps_to_sandbox_error(self):
        class BrokenExecutor:
            def run(self, request):
                return RunResult("protocol_error", stderr_tail="shim died")

        test_input = TestInput("i", "p", args={"x": 1})
        outcome = execute(BrokenExecutor(), "def solve(x):\n    return x", test_input)
        assert outcome.status is OutcomeStatus.SANDBOX_ERROR

    def test_ledger_counts_executions(self):
        ledger = Ledger()
        test_input = TestInput("i", "p", args={"x": 1})
        execute(self.executor, "def solve(x):\n    return x", test_input, ledger=ledger)
        execute(self.executor, "def solve(x):\n    return x", test_input, ledger=ledger)
        assert ledger.snapshot().executions == 2


class TestDirectPath:
    def test_one_outcome_per_draft_with_failures(self):
        problem = make_problem()
        test_input = make_input(problem, args={"x": 5})
        scenario = Scenario(problem)
        scenario.script_pseudocode(["good plan", "bad plan", "crashing plan"])
        scenario.script_translation("good plan", "def solve(x):\n    return x + 1")
        # "bad plan" translation has no code block at all.
        fields = {
            "problem": problem.description,
            "starter_code": problem.starter_code or "",
            "pseudocode": "bad plan",
        }
        scenario.backend.add(render(PromptKind.CODE_GEN, fields), "nope")
        scenario.script_translation("crashing plan", "def solve(x):\n    raise ValueError(x)")

        ctx = scenario.context()
        drafts = generate_pseudocode(ctx, problem, 3)
        path, translations = direct_path(
            ctx, InProcessExecutor(), problem, drafts, test_input
        )
        assert path.path is PathKind.DIRECT
        assert len(path.outcomes) == 3
        assert path.outcomes[0].ok and path.outcomes[0].value == OutputValue.of(6)
        assert path.outcomes[1].status is OutcomeStatus.RUNTIME_ERROR
        assert path.outcomes[1].detail == "translation failed"
        assert path.outcomes[2].status is OutcomeStatus.RUNTIME_ERROR
        assert translations[1] is None
        assert translations[0] is not None and "x + 1" in translations[0].source

    def test_executions_counted_only_for_real_runs(self):
        problem = make_problem()
        test_input = make_input(problem, args={"x": 5})
        scenario = Scenario(problem)
        scenario.script_pseudocode(["p0", "p1"])
        scenario.script_translation("p0", "def solve(x):\n    return x")
        fields = {
            "problem": problem.description,
            "starter_code": problem.starter_code or "",
            "pseudocode": "p1",
        }
        scenario.backend.add(render(PromptKind.CODE_GEN, fields), "no block")
        ctx = scenario.context()
        drafts = generate_pseudocode(ctx, problem, 2)
        direct_path(ctx, InProcessExecutor(), problem, drafts, test_input)
        assert ctx.gateway.ledger.snapshot().executions == 1
