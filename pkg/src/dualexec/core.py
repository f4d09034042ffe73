"""Core value model shared by every execution path.

Outputs produced by running code and outputs written by a language model
in free text both get mapped onto one canonical value tree so they can be
compared and counted by the voting layer. The tree is deliberately small:
null, bool, int (arbitrary precision), float, str, list, and dict with
string keys. Everything else is coerced or falls back to its string form.
"""

from __future__ import annotations

import ast
import functools
import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

REL_TOL = 1e-6
ABS_TOL = 1e-9

FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


# ── canonical value trees ──────────────────────────────────────────────


def sanitize_value(obj: Any) -> Any:
    """Coerce an arbitrary Python object into a canonical value tree.

    Tuples become lists, dict keys become strings, and anything outside
    the canonical kinds is replaced by ``str(obj)``. Never raises.
    """
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (list, tuple)):
        return [sanitize_value(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): sanitize_value(v) for k, v in obj.items()}
    return str(obj)


def _is_canonical(obj: Any) -> bool:
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return True
    if isinstance(obj, list):
        return all(_is_canonical(v) for v in obj)
    if isinstance(obj, dict):
        return all(isinstance(k, str) and _is_canonical(v) for k, v in obj.items())
    return False


@dataclass(frozen=True)
class OutputValue:
    """A canonical value tree. Treated as immutable once constructed.

    Equality between outputs must go through :func:`outputs_equal`;
    dataclass equality here is plain structural equality and is only
    suitable for exact matching in tests.
    """

    value: Any

    @staticmethod
    def of(obj: Any) -> "OutputValue":
        """Wrap ``obj``, sanitizing it into the canonical kinds first."""
        return OutputValue(sanitize_value(obj))

    def render(self) -> str:
        """Deterministic single-line rendering: JSON with sorted keys."""
        return json.dumps(self.value, sort_keys=True, ensure_ascii=False)


# Memoized: voting compares the same few rendered strings thousands of
# times, and a failed parse costs two caught exceptions. Safe because
# the function is pure and the returned values are never mutated.
@functools.lru_cache(maxsize=4096)
def _parse_structured(text: str) -> OutputValue | None:
    """Parse ``text`` as JSON, then as a Python literal. None if neither."""
    try:
        return OutputValue(sanitize_value(json.loads(text)))
    except (ValueError, RecursionError):
        pass
    try:
        parsed = ast.literal_eval(text)
    except (ValueError, TypeError, SyntaxError, MemoryError, RecursionError):
        return None
    sanitized = sanitize_value(parsed)
    # literal_eval admits sets/bytes/complex; those sanitize to strings,
    # which would silently change meaning, so reject them instead.
    if _contains_noncanonical(parsed):
        return None
    return OutputValue(sanitized)


def _contains_noncanonical(obj: Any) -> bool:
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return False
    if isinstance(obj, (list, tuple)):
        return any(_contains_noncanonical(v) for v in obj)
    if isinstance(obj, dict):
        return any(_contains_noncanonical(k) or _contains_noncanonical(v) for k, v in obj.items())
    return True


def canonicalize_response(raw: str) -> OutputValue | None:
    """Extract the final answer from a model response.

    Takes the content of the last fenced code block if any block exists,
    otherwise the whole text. The content is parsed as JSON, then as a
    Python literal; if both fail it is kept as a plain string. Returns
    None when no answer can be extracted at all (empty input).
    """
    blocks = FENCE_RE.findall(raw)
    if blocks:
        text = blocks[-1].strip()
        if not text:
            return OutputValue("")
    else:
        text = raw.strip()
        if not text:
            return None
    parsed = _parse_structured(text)
    return parsed if parsed is not None else OutputValue(text)


# ── tolerant equality ──────────────────────────────────────────────────


def _numbers_close(a: float | int, b: float | int) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    try:
        x, y = float(a), float(b)
    except OverflowError:
        return False
    if math.isnan(x) or math.isnan(y):
        return math.isnan(x) and math.isnan(y)
    try:
        return math.isclose(x, y, rel_tol=REL_TOL, abs_tol=ABS_TOL)
    except OverflowError:
        return False


def _trees_equal(a: Any, b: Any) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return _numbers_close(a, b)
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_trees_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_trees_equal(v, b[k]) for k, v in a.items())
    return False


def _normalize_top(value: Any) -> Any:
    # A bare string that itself parses as a structured value stands for
    # that value: "42" and 42 must vote together.
    if isinstance(value, str):
        parsed = _parse_structured(value)
        if parsed is not None:
            return parsed.value
    return value


def outputs_equal(a: OutputValue, b: OutputValue) -> bool:
    """Tolerant structural equality used for voting and scoring.

    Ints compare exactly; float comparisons (including int vs float) use
    relative tolerance 1e-6 and absolute tolerance 1e-9. Top-level strings
    are re-parsed so formatting differences do not split votes.
    """
    return _trees_equal(_normalize_top(a.value), _normalize_top(b.value))


# ── execution domain types ─────────────────────────────────────────────


class OutcomeStatus(str, Enum):
    SUCCESS = "success"
    PARSE_FAILURE = "parse_failure"
    RUNTIME_ERROR = "runtime_error"
    TIMEOUT = "timeout"
    SANDBOX_ERROR = "sandbox_error"


class PathKind(str, Enum):
    DIRECT = "direct"
    LLM_BASED = "llm_based"
    UNGROUNDED = "ungrounded"


@dataclass
class ExecutionOutcome:
    """Result of one attempt to obtain an output for one test input."""

    status: OutcomeStatus
    value: OutputValue | None = None
    detail: str = ""
    trace_steps: int | None = None

    def __post_init__(self) -> None:
        has_value = self.value is not None
        if (self.status is OutcomeStatus.SUCCESS) != has_value:
            raise ValueError(
                f"status {self.status.value} inconsistent with value presence {has_value}"
            )

    @property
    def ok(self) -> bool:
        return self.status is OutcomeStatus.SUCCESS

    @staticmethod
    def success(value: OutputValue, *, detail: str = "", trace_steps: int | None = None) -> "ExecutionOutcome":
        return ExecutionOutcome(OutcomeStatus.SUCCESS, value, detail, trace_steps)

    @staticmethod
    def failure(status: OutcomeStatus, detail: str = "") -> "ExecutionOutcome":
        if status is OutcomeStatus.SUCCESS:
            raise ValueError("failure outcome cannot carry success status")
        return ExecutionOutcome(status, None, detail)


@dataclass
class PathResult:
    """All outcomes one prediction path produced for one test input."""

    path: PathKind
    outcomes: list[ExecutionOutcome]
    fallen_back: bool = False

    def valid_values(self) -> list[OutputValue]:
        return [o.value for o in self.outcomes if o.value is not None]

    def __iter__(self) -> Iterator[ExecutionOutcome]:
        return iter(self.outcomes)


# ── problems and test inputs ───────────────────────────────────────────


@dataclass
class TestInput:
    """One test input, either structured call arguments or a stdin blob."""

    id: str
    problem_id: str
    args: dict[str, Any] | None = None
    stdin: str | None = None

    def __post_init__(self) -> None:
        if (self.args is None) == (self.stdin is None):
            raise ValueError("exactly one of args or stdin must be set")
        if self.args is not None and not all(isinstance(k, str) for k in self.args):
            raise ValueError("argument names must be strings")

    @property
    def is_structured(self) -> bool:
        return self.args is not None

    def prompt_text(self) -> str:
        """Text placed into prompt templates. Deterministic per input."""
        if self.args is not None:
            return json.dumps(self.args, ensure_ascii=False)
        return self.stdin  # type: ignore[return-value]

    def canonical_key(self) -> str:
        """Dedup key: formatting-insensitive for structured arguments."""
        if self.args is not None:
            return "args:" + json.dumps(self.args, sort_keys=True, ensure_ascii=False)
        return "stdin:" + (self.stdin or "")


@dataclass
class Problem:
    """A programming problem: description, optional starter code, truth."""

    id: str
    description: str
    starter_code: str | None = None
    ground_truth: dict[str, OutputValue] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ExecLimits:
    """Resource bounds for one sandboxed execution."""

    time_ms: int = 10_000
    memory_mb: int = 512

    def __post_init__(self) -> None:
        if self.time_ms <= 0 or self.memory_mb <= 0:
            raise ValueError("limits must be positive")
