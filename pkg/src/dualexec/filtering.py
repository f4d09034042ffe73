"""Candidate program filtering with predicted test suites.

The engine predicts an output for each generated test input; candidate
programs are then executed against those inputs and ranked by how many
predicted outputs they reproduce. Ties are broken toward candidates
whose full output vector is shared by a larger cluster of candidates:
programs that independently agree are more likely to be right.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .codepath import execute
from .core import (
    FENCE_RE,
    ExecLimits,
    ExecutionOutcome,
    OutputValue,
    Problem,
    TestInput,
    outputs_equal,
)
from .engine import ItemPrediction, PredictionEngine, PredictionPlan
from .executors import Executor
from .gateway import Ledger, LlmContext, PromptKind, render

MAX_INPUTS_PER_RESPONSE = 3


# ── test input generation ──────────────────────────────────────────────


def _parse_input_block(block: str, problem: Problem, ordinal: int) -> TestInput | None:
    text = block.strip()
    if not text:
        return None
    input_id = f"{problem.id}/gen{ordinal}"
    if problem.starter_code:
        try:
            args = json.loads(text)
        except ValueError:
            return None
        if not isinstance(args, dict) or not all(isinstance(k, str) for k in args):
            return None
        return TestInput(input_id, problem.id, args=args)
    return TestInput(input_id, problem.id, stdin=text)


def generate_test_inputs(
    ctx: LlmContext,
    problem: Problem,
    target: int,
    base_index: int = 0,
) -> list[TestInput]:
    """Sample up to ``target`` distinct test inputs for a problem.

    Each completion contributes at most three inputs (the last three
    fenced blocks of the response). Duplicates are dropped under a
    formatting-insensitive key. Attempts are capped, so a model that
    keeps repeating itself terminates with fewer inputs rather than
    looping forever.
    """
    if target <= 0:
        return []
    prompt = render(
        PromptKind.TEST_INPUT_GEN,
        {"problem": problem.description, "starter_code": problem.starter_code or ""},
    )
    max_attempts = math.ceil(target / MAX_INPUTS_PER_RESPONSE) + 2
    collected: list[TestInput] = []
    seen: set[str] = set()
    for attempt in range(max_attempts):
        raw = ctx.gateway.complete(ctx.model, prompt, ctx.generation, base_index + attempt)
        blocks = FENCE_RE.findall(raw)
        for block in blocks[-MAX_INPUTS_PER_RESPONSE:]:
            candidate = _parse_input_block(block, problem, len(collected))
            if candidate is None:
                continue
            key = candidate.canonical_key()
            if key in seen:
                continue
            seen.add(key)
            collected.append(candidate)
            if len(collected) >= target:
                return collected
    return collected


# ── suite construction ─────────────────────────────────────────────────


@dataclass
class SuiteCase:
    """One test input together with its predicted output."""

    input: TestInput
    predicted: OutputValue
    method: str
    fallen_back: bool = False


@dataclass
class TestSuite:
    problem_id: str
    cases: list[SuiteCase] = field(default_factory=list)
    dropped: int = 0  # inputs with no valid predicted output


def build_suite(
    engine: PredictionEngine,
    problem: Problem,
    inputs: list[TestInput],
    plan: PredictionPlan,
) -> TestSuite:
    """Predict an output for every input; drop inputs with none.

    With ``plan.reuse_pseudocode`` one draft batch serves all inputs;
    otherwise each input gets a fresh batch on its own sample lane.
    """
    suite = TestSuite(problem.id)
    predictions = predict_many(engine, problem, inputs, plan)
    for test_input, prediction in zip(inputs, predictions):
        if prediction.ok and prediction.selected is not None:
            suite.cases.append(
                SuiteCase(test_input, prediction.selected, prediction.method, prediction.fallen_back)
            )
        else:
            suite.dropped += 1
    return suite


def predict_many(
    engine: PredictionEngine,
    problem: Problem,
    inputs: list[TestInput],
    plan: PredictionPlan,
    seed: int = 0,
) -> list[ItemPrediction]:
    """Run one plan over several inputs with disjoint sample lanes."""
    width = plan.batch_size()
    predictions = []
    for ordinal, test_input in enumerate(inputs):
        base = seed * 1_000_000 + (0 if plan.reuse_pseudocode else ordinal * width)
        predictions.append(engine.predict(problem, test_input, plan, base_index=base))
    return predictions


# ── candidate ranking ──────────────────────────────────────────────────


@dataclass
class CandidateScore:
    index: int
    passed: int
    cluster_size: int
    outcomes: list[ExecutionOutcome] = field(default_factory=list)


@dataclass
class RankedCandidates:
    problem_id: str
    order: list[int]
    scores: list[CandidateScore]

    def top(self, k: int) -> list[int]:
        return self.order[:k]


def _vector_signature(outcome: ExecutionOutcome) -> tuple[str, Any]:
    if outcome.ok and outcome.value is not None:
        return ("ok", outcome.value)
    return ("err", outcome.status.value)


def _vectors_equal(a: list[ExecutionOutcome], b: list[ExecutionOutcome]) -> bool:
    for x, y in zip(a, b):
        sx, sy = _vector_signature(x), _vector_signature(y)
        if sx[0] != sy[0]:
            return False
        if sx[0] == "ok":
            if not outputs_equal(sx[1], sy[1]):
                return False
        elif sx[1] != sy[1]:
            return False
    return True


def rank_candidates(
    executor: Executor,
    candidates: list[str],
    suite: TestSuite,
    limits: ExecLimits = ExecLimits(),
    ledger: Ledger | None = None,
) -> RankedCandidates:
    """Order candidate programs by agreement with the predicted suite.

    Sort key: predicted cases passed (desc), then size of the cluster
    of candidates sharing the same full output vector (desc), then
    original index (asc) for stability. Sandbox failures simply count
    as failed cases.
    """
    scores: list[CandidateScore] = []
    for index, source in enumerate(candidates):
        outcomes = [
            execute(executor, source, case.input, limits, ledger=ledger)
            for case in suite.cases
        ]
        passed = sum(
            1
            for case, outcome in zip(suite.cases, outcomes)
            if outcome.ok and outcome.value is not None and outputs_equal(outcome.value, case.predicted)
        )
        scores.append(CandidateScore(index, passed, 0, outcomes))

    # Cluster = candidates with elementwise-identical outcome vectors.
    for score in scores:
        score.cluster_size = sum(
            1 for other in scores if _vectors_equal(score.outcomes, other.outcomes)
        )

    order = sorted(
        range(len(scores)),
        key=lambda i: (-scores[i].passed, -scores[i].cluster_size, i),
    )
    return RankedCandidates(suite.problem_id, order, scores)


def pass_at_k(ranked: RankedCandidates, ground_truth_pass: list[bool], k: int) -> int:
    """1 if any of the top-k ranked candidates truly passes, else 0."""
    if k <= 0:
        raise ValueError("k must be positive")
    return int(any(ground_truth_pass[i] for i in ranked.top(k)))


def candidate_passes_ground_truth(
    executor: Executor,
    source: str,
    problem: Problem,
    inputs: list[TestInput],
    limits: ExecLimits = ExecLimits(),
) -> bool:
    """True iff the program reproduces the stored truth on every input."""
    for test_input in inputs:
        truth = problem.ground_truth.get(test_input.id)
        if truth is None:
            continue
        outcome = execute(executor, source, test_input, limits)
        if not outcome.ok or outcome.value is None or not outputs_equal(outcome.value, truth):
            return False
    return True
