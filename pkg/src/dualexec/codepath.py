"""Direct execution path: translate pseudocode to code, then run it.

Translation is greedy decoding, so each pseudocode draft maps to one
deterministic program. Every draft produces exactly one outcome: a
failed translation or a crashed run becomes an error outcome rather
than shrinking the vote multiset.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

from .core import (
    ExecLimits,
    ExecutionOutcome,
    OutcomeStatus,
    OutputValue,
    PathKind,
    PathResult,
    Problem,
    TestInput,
    canonicalize_response,
)
from .executors import (
    STATUS_EXCEPTION,
    STATUS_LOAD_ERROR,
    STATUS_OK,
    STATUS_TIMEOUT,
    ExecRequest,
    Executor,
    RunResult,
)
from .gateway import Ledger, LlmContext, PromptKind, render
from .pseudo import Pseudocode, extract_last_block


@dataclass
class CandidateCode:
    """A program produced by translating one pseudocode draft."""

    source: str
    pseudocode_index: int


def translate(ctx: LlmContext, problem: Problem, pseudocode: Pseudocode) -> CandidateCode | None:
    """Translate one pseudocode draft into Python source.

    Returns None when the response has no usable code block.
    """
    prompt = render(
        PromptKind.CODE_GEN,
        {
            "problem": problem.description,
            "starter_code": problem.starter_code or "",
            "pseudocode": pseudocode.text,
        },
    )
    raw = ctx.gateway.complete(ctx.model, prompt, ctx.translation, 0)
    source = extract_last_block(raw)
    if source is None:
        return None
    return CandidateCode(source, pseudocode.sample_index)


def derive_entry_point(source: str, test_input: TestInput) -> str | None:
    """Pick the function to call for structured arguments.

    Prefers a top-level function whose parameter names match the
    argument names exactly; otherwise the last top-level function.
    Returns None when the module defines no function at all or the
    input is a stdin blob.
    """
    if not test_input.is_structured:
        return None
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return None
    functions = [n for n in tree.body if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))]
    if not functions:
        return None
    wanted = set(test_input.args or {})
    for fn in functions:
        names = {a.arg for a in fn.args.args + fn.args.kwonlyargs if a.arg != "self"}
        if names == wanted:
            return fn.name
    return functions[-1].name


def _outcome_from_run(result: RunResult, test_input: TestInput) -> ExecutionOutcome:
    if result.status == STATUS_TIMEOUT:
        return ExecutionOutcome.failure(OutcomeStatus.TIMEOUT, result.stderr_tail)
    if result.status == STATUS_EXCEPTION:
        return ExecutionOutcome.failure(OutcomeStatus.RUNTIME_ERROR, result.stderr_tail)
    if result.status == STATUS_LOAD_ERROR:
        return ExecutionOutcome.failure(
            OutcomeStatus.RUNTIME_ERROR, f"load failed: {result.stderr_tail}"
        )
    if result.status != STATUS_OK:
        return ExecutionOutcome.failure(OutcomeStatus.SANDBOX_ERROR, result.stderr_tail)

    if test_input.is_structured:
        if not result.value_present:
            return ExecutionOutcome.failure(OutcomeStatus.SANDBOX_ERROR, "ok without value")
        return ExecutionOutcome.success(
            OutputValue.of(result.value), trace_steps=result.steps
        )
    parsed = canonicalize_response(result.stdout)
    if parsed is None:
        return ExecutionOutcome.failure(OutcomeStatus.RUNTIME_ERROR, "no output produced")
    return ExecutionOutcome.success(parsed, trace_steps=result.steps)


def execute(
    executor: Executor,
    source: str,
    test_input: TestInput,
    limits: ExecLimits = ExecLimits(),
    ledger: Ledger | None = None,
    trace: bool = True,
) -> ExecutionOutcome:
    """Run one program on one input inside the executor's sandbox."""
    entry = derive_entry_point(source, test_input)
    if test_input.is_structured and entry is None:
        return ExecutionOutcome.failure(
            OutcomeStatus.RUNTIME_ERROR, "no callable entry point for structured input"
        )
    request = ExecRequest(
        source=source,
        entry_point=entry,
        args=test_input.args,
        stdin_text=test_input.stdin,
        time_ms=limits.time_ms,
        memory_mb=limits.memory_mb,
        trace=trace,
    )
    if ledger is not None:
        ledger.record_execution()
    return _outcome_from_run(executor.run(request), test_input)


def direct_path(
    ctx: LlmContext,
    executor: Executor,
    problem: Problem,
    pseudocodes: list[Pseudocode],
    test_input: TestInput,
    limits: ExecLimits = ExecLimits(),
) -> tuple[PathResult, list[CandidateCode | None]]:
    """Translate and run each draft; one outcome per draft, always.

    Also returns the translations (None for failed slots) so callers
    can reuse the programs for trace analysis or candidate scoring.
    """
    translations = [translate(ctx, problem, pc) for pc in pseudocodes]
    outcomes: list[ExecutionOutcome] = []
    for code in translations:
        if code is None:
            outcomes.append(
                ExecutionOutcome.failure(OutcomeStatus.RUNTIME_ERROR, "translation failed")
            )
            continue
        outcomes.append(
            execute(executor, code.source, test_input, limits, ledger=ctx.gateway.ledger)
        )
    return PathResult(PathKind.DIRECT, outcomes), translations
