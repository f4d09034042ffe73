"""Grounded test-output prediction and candidate-program filtering.

Predicts what a correct solution outputs for a test input by running
two complementary paths over sampled pseudocode drafts: translate and
execute real code, and let a model simulate execution step by step.
A path-weighted functional majority vote combines both multisets, and
the predicted outputs drive ranking of candidate programs.
"""

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
    outputs_equal,
)
from .engine import ItemPrediction, PredictionEngine, PredictionPlan
from .gateway import (
    Gateway,
    HttpBackend,
    Ledger,
    LlmContext,
    PromptKind,
    SamplingConfig,
    ScriptedBackend,
    count_calls,
    render,
)
from .voting import NoValidOutput, TieBreak, VotingConfig, fmv, path_weight, select

__all__ = [
    "ExecLimits",
    "ExecutionOutcome",
    "Gateway",
    "HttpBackend",
    "ItemPrediction",
    "Ledger",
    "LlmContext",
    "NoValidOutput",
    "OutcomeStatus",
    "OutputValue",
    "PathKind",
    "PathResult",
    "PredictionEngine",
    "PredictionPlan",
    "Problem",
    "PromptKind",
    "SamplingConfig",
    "ScriptedBackend",
    "TestInput",
    "TieBreak",
    "VotingConfig",
    "canonicalize_response",
    "count_calls",
    "fmv",
    "outputs_equal",
    "path_weight",
    "render",
    "select",
]

__version__ = "0.1.0"
