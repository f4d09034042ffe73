"""Model-side prediction path.

Pseudocode is generated from the problem statement, then the model
"executes" each pseudocode against a test input by reasoning to a final
fenced answer. When the simulated outputs disagree with each other the
whole path is considered untrustworthy and is replaced by the same
number of ungrounded predictions (direct answer from the problem text),
tagged so downstream consumers can see the substitution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    FENCE_RE,
    ExecutionOutcome,
    OutcomeStatus,
    PathKind,
    PathResult,
    Problem,
    TestInput,
    canonicalize_response,
    outputs_equal,
)
from .gateway import RETRY_INDEX_OFFSET, LlmContext, PromptKind, render


def extract_last_block(raw: str) -> str | None:
    """Content of the last fenced code block, or None if there is none."""
    blocks = FENCE_RE.findall(raw)
    if not blocks:
        return None
    text = blocks[-1].strip()
    return text or None


@dataclass
class Pseudocode:
    text: str
    sample_index: int


def _gen_fields(problem: Problem) -> dict[str, str]:
    return {
        "problem": problem.description,
        "starter_code": problem.starter_code or "",
    }


def generate_pseudocode(
    ctx: LlmContext,
    problem: Problem,
    count: int,
    base_index: int = 0,
) -> list[Pseudocode]:
    """Sample ``count`` pseudocode drafts for a problem.

    A slot whose response has no usable fenced block is retried once on
    a separate sample lane; if the retry also fails the slot is dropped,
    never refilled, so callers may receive fewer than ``count`` drafts.
    """
    prompt = render(PromptKind.PSEUDOCODE_GEN, _gen_fields(problem))
    drafts: list[Pseudocode] = []
    for i in range(count):
        index = base_index + i
        text = extract_last_block(ctx.gateway.complete(ctx.model, prompt, ctx.generation, index))
        if text is None:
            retry_index = index + RETRY_INDEX_OFFSET
            text = extract_last_block(
                ctx.gateway.complete(ctx.model, prompt, ctx.generation, retry_index)
            )
        if text is not None:
            drafts.append(Pseudocode(text, index))
    return drafts


def simulate_execution(
    ctx: LlmContext,
    problem: Problem,
    grounding: str,
    test_input: TestInput,
    kind: PromptKind = PromptKind.EXEC_PSEUDOCODE,
) -> ExecutionOutcome:
    """Ask the model to execute one grounding text on one input.

    ``kind`` selects the grounding flavor (pseudocode by default, code
    as a design-space variant). Decoding is greedy, so the prediction
    for a given grounding and input is deterministic and cacheable.
    """
    prompt = render(
        kind,
        {
            "problem": problem.description,
            "starter_code": problem.starter_code or "",
            "pseudocode": grounding,
            "tc_input": test_input.prompt_text(),
        },
    )
    raw = ctx.gateway.complete(ctx.model, prompt, ctx.execution, 0)
    value = canonicalize_response(raw)
    if value is None:
        return ExecutionOutcome.failure(OutcomeStatus.PARSE_FAILURE, "no extractable answer")
    return ExecutionOutcome.success(value)


def ungrounded_predict(
    ctx: LlmContext,
    problem: Problem,
    test_input: TestInput,
    count: int,
    base_index: int = 0,
) -> PathResult:
    """Predict the output directly from the problem text, ``count`` times."""
    prompt = render(
        PromptKind.EXEC_NO_GROUNDING,
        {"problem": problem.description, "tc_input": test_input.prompt_text()},
    )
    outcomes: list[ExecutionOutcome] = []
    for i in range(count):
        raw = ctx.gateway.complete(ctx.model, prompt, ctx.generation, base_index + i)
        value = canonicalize_response(raw)
        if value is None:
            outcomes.append(
                ExecutionOutcome.failure(OutcomeStatus.PARSE_FAILURE, "no extractable answer")
            )
        else:
            outcomes.append(ExecutionOutcome.success(value))
    return PathResult(PathKind.UNGROUNDED, outcomes)


def llm_path(
    ctx: LlmContext,
    problem: Problem,
    pseudocodes: list[Pseudocode],
    test_input: TestInput,
    kind: PromptKind = PromptKind.EXEC_PSEUDOCODE,
    fallback_base_index: int = 0,
) -> PathResult:
    """Simulated-execution path over a batch of pseudocode drafts.

    If the valid simulated outputs split into more than one equivalence
    class, the entire multiset is replaced by ``len(pseudocodes)``
    ungrounded predictions and the result is tagged ``fallen_back``.
    Invalid outputs do not trigger the fallback; neither does an
    all-invalid path.
    """
    outcomes = [
        simulate_execution(ctx, problem, pc.text, test_input, kind=kind) for pc in pseudocodes
    ]
    result = PathResult(PathKind.LLM_BASED, outcomes)
    valid = result.valid_values()
    unanimous = all(outputs_equal(v, valid[0]) for v in valid[1:]) if valid else True
    if unanimous:
        return result
    fallback = ungrounded_predict(
        ctx, problem, test_input, len(pseudocodes), base_index=fallback_base_index
    )
    return PathResult(PathKind.LLM_BASED, fallback.outcomes, fallen_back=True)
