"""Shared fixtures: scripted model scenarios for deterministic runs."""

from __future__ import annotations

import dualexec.core
import dualexec.filtering
from dualexec.core import Problem, TestInput
from dualexec.engine import PredictionEngine
from dualexec.executors import InProcessExecutor
from dualexec.gateway import Gateway, LlmContext, PromptKind, ScriptedBackend

# Domain classes, not test classes; stop pytest from collecting them.
dualexec.core.TestInput.__test__ = False
dualexec.filtering.TestSuite.__test__ = False


def fenced(text: str, lang: str = "") -> str:
    return f"```{lang}\n{text}\n```"


def make_problem(pid: str = "p1", description: str = "Compute the answer.",
                 starter_code: str | None = "def solve(x):") -> Problem:
    return Problem(id=pid, description=description, starter_code=starter_code)


def make_input(problem: Problem, iid: str = "i1", **kwargs) -> TestInput:
    if not kwargs:
        kwargs = {"args": {"x": 1}}
    return TestInput(iid, problem.id, **kwargs)


class Scenario:
    """Builds a fully scripted model for one problem's prediction flow.

    Responses are registered against the exact prompts the pipeline
    renders, so any drift in prompt construction fails loudly.
    """

    def __init__(self, problem: Problem, model: str = "scripted"):
        self.problem = problem
        self.model = model
        self.backend = ScriptedBackend()

    def _base_fields(self) -> dict[str, str]:
        return {
            "problem": self.problem.description,
            "starter_code": self.problem.starter_code or "",
        }

    def script_pseudocode(self, texts: list[str]) -> None:
        """One generation response per sample index."""
        self.backend.add_rendered(
            PromptKind.PSEUDOCODE_GEN,
            self._base_fields(),
            [fenced(t, "plaintext") for t in texts],
        )

    def script_translation(self, pc_text: str, code_source: str) -> None:
        fields = {**self._base_fields(), "pseudocode": pc_text}
        self.backend.add_rendered(PromptKind.CODE_GEN, fields, fenced(code_source, "python"))

    def script_simulation(self, pc_text: str, test_input: TestInput, final_text: str,
                          reasoning: str = "step by step...",
                          kind: PromptKind = PromptKind.EXEC_PSEUDOCODE) -> None:
        fields = {
            **self._base_fields(),
            "pseudocode": pc_text,
            "tc_input": test_input.prompt_text(),
        }
        self.backend.add_rendered(kind, fields, f"{reasoning}\n{fenced(final_text)}")

    def script_ungrounded(self, test_input: TestInput, value_texts: list[str]) -> None:
        fields = {"problem": self.problem.description, "tc_input": test_input.prompt_text()}
        self.backend.add_rendered(
            PromptKind.EXEC_NO_GROUNDING,
            fields,
            [f"reasoning...\n{fenced(v, 'json')}" for v in value_texts],
        )

    def script_test_inputs(self, responses: list[str]) -> None:
        self.backend.add_rendered(PromptKind.TEST_INPUT_GEN, self._base_fields(), responses)

    def context(self, cache_dir=None) -> LlmContext:
        return LlmContext(Gateway(self.backend, cache_dir=cache_dir), self.model)

    def engine(self, executor=None, cache_dir=None, **engine_kwargs) -> PredictionEngine:
        return PredictionEngine(
            self.context(cache_dir), executor or InProcessExecutor(), **engine_kwargs
        )
