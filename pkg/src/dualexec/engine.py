"""Per-input prediction orchestration.

One engine call answers: for this problem and this test input, what
output do we believe a correct solution produces? Four methods are
supported. ``dual`` samples one batch of pseudocode drafts, splits it
between the model-simulated path and the translate-and-run path, and
combines them with path-weighted voting. The three single-path methods
exist as baselines and use plain functional majority voting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codepath import CandidateCode, direct_path
from .core import (
    ExecLimits,
    OutputValue,
    PathResult,
    Problem,
    TestInput,
)
from .gateway import LlmContext, PromptKind
from .pseudo import Pseudocode, generate_pseudocode, llm_path, ungrounded_predict
from .voting import NoValidOutput, VoteClass, VotingConfig, fmv, select_class, tally

METHOD_DUAL = "dual"
METHOD_DIRECT = "direct_only"
METHOD_LLM = "llm_only"
METHOD_UNGROUNDED = "ungrounded"

METHODS = (METHOD_DUAL, METHOD_DIRECT, METHOD_LLM, METHOD_UNGROUNDED)


@dataclass(frozen=True)
class PredictionPlan:
    """How to predict: which paths to run and how many samples each."""

    method: str = METHOD_DUAL
    l: int = 10  # direct-path drafts
    m: int = 10  # model-path drafts (also ungrounded sample count)
    reuse_pseudocode: bool = False  # share one draft batch across inputs
    exec_grounding: PromptKind = PromptKind.EXEC_PSEUDOCODE

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.l <= 0 or self.m <= 0:
            raise ValueError("sample counts must be positive")

    def batch_size(self) -> int:
        if self.method == METHOD_DUAL:
            return self.l + self.m
        if self.method == METHOD_DIRECT:
            return self.l
        return self.m


@dataclass
class ItemPrediction:
    """Everything one prediction produced, for voting and for reports."""

    problem_id: str
    input_id: str
    method: str
    selected: OutputValue | None
    status: str  # "ok" | "no_valid_output"
    fallen_back: bool = False
    direct: PathResult | None = None
    llm: PathResult | None = None
    ungrounded: PathResult | None = None
    translations: list[CandidateCode | None] = field(default_factory=list)
    pseudocodes: list[Pseudocode] = field(default_factory=list)
    vote_classes: list[VoteClass] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def trace_steps(self) -> list[int]:
        """Step counts of successful direct-path runs."""
        if self.direct is None:
            return []
        return [
            o.trace_steps
            for o in self.direct.outcomes
            if o.ok and o.trace_steps is not None
        ]


class PredictionEngine:
    """Runs prediction plans against a model gateway and an executor."""

    def __init__(
        self,
        ctx: LlmContext,
        executor,
        voting: VotingConfig | None = None,
        limits: ExecLimits = ExecLimits(),
    ) -> None:
        self.ctx = ctx
        self.executor = executor
        self.voting = voting or VotingConfig()
        self.limits = limits

    def predict(
        self,
        problem: Problem,
        test_input: TestInput,
        plan: PredictionPlan,
        base_index: int = 0,
    ) -> ItemPrediction:
        if plan.method == METHOD_DUAL:
            return self._predict_dual(problem, test_input, plan, base_index)
        if plan.method == METHOD_DIRECT:
            return self._predict_direct(problem, test_input, plan, base_index)
        if plan.method == METHOD_LLM:
            return self._predict_llm(problem, test_input, plan, base_index)
        return self._predict_ungrounded(problem, test_input, plan, base_index)

    # ── single-path baselines ──────────────────────────────────────────

    def _predict_direct(self, problem, test_input, plan, base_index) -> ItemPrediction:
        drafts = generate_pseudocode(self.ctx, problem, plan.l, base_index)
        path, translations = direct_path(
            self.ctx, self.executor, problem, drafts, test_input, self.limits
        )
        selected, status = self._majority([path])
        return ItemPrediction(
            problem.id, test_input.id, plan.method, selected, status,
            direct=path, translations=translations, pseudocodes=drafts,
        )

    def _predict_llm(self, problem, test_input, plan, base_index) -> ItemPrediction:
        drafts = generate_pseudocode(self.ctx, problem, plan.m, base_index)
        path = llm_path(
            self.ctx, problem, drafts, test_input,
            kind=plan.exec_grounding, fallback_base_index=base_index,
        )
        selected, status = self._majority([path])
        return ItemPrediction(
            problem.id, test_input.id, plan.method, selected, status,
            fallen_back=path.fallen_back, llm=path, pseudocodes=drafts,
        )

    def _predict_ungrounded(self, problem, test_input, plan, base_index) -> ItemPrediction:
        path = ungrounded_predict(self.ctx, problem, test_input, plan.m, base_index)
        selected, status = self._majority([path])
        return ItemPrediction(
            problem.id, test_input.id, plan.method, selected, status, ungrounded=path
        )

    # ── dual path ──────────────────────────────────────────────────────

    def _predict_dual(self, problem, test_input, plan, base_index) -> ItemPrediction:
        drafts = generate_pseudocode(self.ctx, problem, plan.l + plan.m, base_index)
        model_drafts = drafts[: plan.m]
        direct_drafts = drafts[plan.m : plan.m + plan.l]

        llm = llm_path(
            self.ctx, problem, model_drafts, test_input,
            kind=plan.exec_grounding, fallback_base_index=base_index,
        )
        direct, translations = direct_path(
            self.ctx, self.executor, problem, direct_drafts, test_input, self.limits
        )

        try:
            winner = select_class(direct, llm, self.voting)
            selected: OutputValue | None = winner.representative
            status = "ok"
        except NoValidOutput:
            selected, status = None, "no_valid_output"

        return ItemPrediction(
            problem.id, test_input.id, plan.method, selected, status,
            fallen_back=llm.fallen_back, direct=direct, llm=llm,
            translations=translations, pseudocodes=drafts,
            vote_classes=tally(direct, llm, self.voting),
        )

    @staticmethod
    def _majority(paths: list[PathResult]) -> tuple[OutputValue | None, str]:
        try:
            return fmv(paths), "ok"
        except NoValidOutput:
            return None, "no_valid_output"
