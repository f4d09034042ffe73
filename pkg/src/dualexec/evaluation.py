"""Dataset loading, benchmark sweeps, grouped analysis, and reports.

Records produced here are plain serializable dataclasses. Reports are
deliberately timestamp-free: rerunning the same benchmark against the
same cache must produce byte-identical files.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .codepath import execute, translate
from .core import (
    ExecLimits,
    OutputValue,
    Problem,
    TestInput,
    outputs_equal,
)
from .engine import METHODS, ItemPrediction, PredictionEngine, PredictionPlan
from .executors import Executor
from .gateway import LedgerSnapshot, LlmContext
from .pseudo import generate_pseudocode

TRACE_BINS = ((1, 10), (10, 100), (100, 1000), (1000, None))
UNTRACED = "untraced"

DIFFICULTY_EASY_MIN = 0.7
DIFFICULTY_HARD_MAX = 0.3


class SchemaError(ValueError):
    """A dataset line does not match the expected schema."""

    def __init__(self, line: int, fieldname: str, message: str) -> None:
        super().__init__(f"line {line}, field {fieldname!r}: {message}")
        self.line = line
        self.field = fieldname


@dataclass
class DatasetEntry:
    problem: Problem
    inputs: list[TestInput]


def _require(condition: bool, line: int, fieldname: str, message: str) -> None:
    if not condition:
        raise SchemaError(line, fieldname, message)


def load_dataset(path: str | Path) -> list[DatasetEntry]:
    """Parse a JSONL problem dataset, validating shape line by line."""
    entries: list[DatasetEntry] = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            raw_line = raw_line.strip()
            if not raw_line:
                continue
            try:
                obj = json.loads(raw_line)
            except ValueError as exc:
                raise SchemaError(lineno, "<line>", f"not valid JSON: {exc}") from exc
            _require(isinstance(obj, dict), lineno, "<line>", "expected an object")
            _require(isinstance(obj.get("id"), str) and obj["id"] != "", lineno, "id", "string required")
            _require(
                isinstance(obj.get("description"), str) and obj["description"] != "",
                lineno, "description", "string required",
            )
            starter = obj.get("starter_code")
            _require(
                starter is None or isinstance(starter, str),
                lineno, "starter_code", "string or absent",
            )
            raw_inputs = obj.get("inputs")
            _require(isinstance(raw_inputs, list) and raw_inputs, lineno, "inputs", "nonempty list required")

            problem_id = obj["id"]
            inputs: list[TestInput] = []
            seen_ids: set[str] = set()
            for pos, item in enumerate(raw_inputs):
                _require(isinstance(item, dict), lineno, f"inputs[{pos}]", "expected an object")
                input_id = item.get("id")
                _require(isinstance(input_id, str) and input_id != "", lineno, f"inputs[{pos}].id", "string required")
                _require(input_id not in seen_ids, lineno, f"inputs[{pos}].id", "duplicate input id")
                seen_ids.add(input_id)
                has_args = "args" in item
                has_stdin = "stdin" in item
                _require(has_args != has_stdin, lineno, f"inputs[{pos}]", "exactly one of args/stdin")
                if has_args:
                    _require(isinstance(item["args"], dict), lineno, f"inputs[{pos}].args", "object required")
                    inputs.append(TestInput(input_id, problem_id, args=item["args"]))
                else:
                    _require(isinstance(item["stdin"], str), lineno, f"inputs[{pos}].stdin", "string required")
                    inputs.append(TestInput(input_id, problem_id, stdin=item["stdin"]))

            truth_raw = obj.get("ground_truth", {})
            _require(isinstance(truth_raw, dict), lineno, "ground_truth", "object required")
            for key in truth_raw:
                _require(key in seen_ids, lineno, f"ground_truth.{key}", "no matching input id")
            truth = {k: OutputValue.of(v) for k, v in truth_raw.items()}

            metadata = obj.get("metadata", {})
            _require(isinstance(metadata, dict), lineno, "metadata", "object or absent")

            problem = Problem(
                id=problem_id,
                description=obj["description"],
                starter_code=starter,
                ground_truth=truth,
                metadata=metadata,
            )
            entries.append(DatasetEntry(problem, inputs))
    return entries


# ── benchmark records ──────────────────────────────────────────────────


@dataclass
class PredictionRecord:
    """Serializable summary of one (problem, input, method) prediction."""

    problem_id: str
    input_id: str
    method: str
    status: str
    selected: str | None  # canonical rendering
    correct: bool | None  # None when no ground truth exists
    fallen_back: bool
    trace_steps: list[int] = field(default_factory=list)
    translations: list[str | None] = field(default_factory=list)
    groups: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "input_id": self.input_id,
            "method": self.method,
            "status": self.status,
            "selected": self.selected,
            "correct": self.correct,
            "fallen_back": self.fallen_back,
            "trace_steps": self.trace_steps,
            "translations": self.translations,
            "groups": self.groups,
        }

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "PredictionRecord":
        return PredictionRecord(
            problem_id=obj["problem_id"],
            input_id=obj["input_id"],
            method=obj["method"],
            status=obj["status"],
            selected=obj.get("selected"),
            correct=obj.get("correct"),
            fallen_back=bool(obj.get("fallen_back", False)),
            trace_steps=list(obj.get("trace_steps", [])),
            translations=list(obj.get("translations", [])),
            groups=dict(obj.get("groups", {})),
        )


@dataclass
class BenchmarkResult:
    records: list[PredictionRecord]
    calls_by_method: dict[str, tuple[int, int]]  # (model calls, executions)
    ledger: LedgerSnapshot


def record_from_prediction(prediction: ItemPrediction, truth: OutputValue | None) -> PredictionRecord:
    correct: bool | None = None
    if truth is not None:
        correct = bool(
            prediction.ok
            and prediction.selected is not None
            and outputs_equal(prediction.selected, truth)
        )
    return PredictionRecord(
        problem_id=prediction.problem_id,
        input_id=prediction.input_id,
        method=prediction.method,
        status=prediction.status,
        selected=prediction.selected.render() if prediction.selected is not None else None,
        correct=correct,
        fallen_back=prediction.fallen_back,
        trace_steps=prediction.trace_steps(),
        translations=[t.source if t is not None else None for t in prediction.translations],
    )


def run_prediction_benchmark(
    engine: PredictionEngine,
    dataset: list[DatasetEntry],
    methods: Iterable[str],
    l: int = 10,
    m: int = 10,
    reuse_pseudocode: bool = False,
    seed: int = 0,
    workers: int = 1,
) -> BenchmarkResult:
    """Predict every (problem, input) under each method.

    Methods run sequentially so per-method call accounting is exact;
    inputs within a method may fan out over a thread pool.
    """
    records: list[PredictionRecord] = []
    calls_by_method: dict[str, tuple[int, int]] = {}
    ledger = engine.ctx.gateway.ledger

    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        plan = PredictionPlan(method=method, l=l, m=m, reuse_pseudocode=reuse_pseudocode)
        before = ledger.snapshot()

        tasks = []
        for entry in dataset:
            width = plan.batch_size()
            for ordinal, test_input in enumerate(entry.inputs):
                base = seed * 1_000_000 + (0 if reuse_pseudocode else ordinal * width)
                tasks.append((entry.problem, test_input, base))

        def run_one(task):
            problem, test_input, base = task
            prediction = engine.predict(problem, test_input, plan, base_index=base)
            truth = problem.ground_truth.get(test_input.id)
            return record_from_prediction(prediction, truth)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                method_records = list(pool.map(run_one, tasks))
        else:
            method_records = [run_one(t) for t in tasks]
        records.extend(method_records)

        after = ledger.snapshot()
        calls_by_method[method] = (
            after.backend_calls - before.backend_calls,
            after.executions - before.executions,
        )

    return BenchmarkResult(records, calls_by_method, ledger.snapshot())


# ── grouped analysis ───────────────────────────────────────────────────


def classify_input_difficulty(
    ctx: LlmContext,
    executor: Executor,
    problem: Problem,
    test_input: TestInput,
    truth: OutputValue,
    samples: int = 10,
    limits: ExecLimits = ExecLimits(),
    base_index: int = 0,
) -> str:
    """Label an input by how often independent solutions pass it.

    Samples ``samples`` pseudocode drafts, translates and runs each, and
    measures the proportion that reproduces the expected output.
    """
    drafts = generate_pseudocode(ctx, problem, samples, base_index)
    passes = 0
    for draft in drafts:
        code = translate(ctx, problem, draft)
        if code is None:
            continue
        outcome = execute(executor, code.source, test_input, limits)
        if outcome.ok and outcome.value is not None and outputs_equal(outcome.value, truth):
            passes += 1
    rho = passes / samples if samples else 0.0
    if rho >= DIFFICULTY_EASY_MIN:
        return "easy"
    if rho <= DIFFICULTY_HARD_MAX:
        return "hard"
    return "medium"


def _bin_name(low: int, high: int | None) -> str:
    return f"[{low},{high})" if high is not None else f"[{low},inf)"


def trace_bin_label(steps: list[int]) -> str:
    """Bin a record by the median step count of its successful runs."""
    if not steps:
        return UNTRACED
    median = statistics.median(steps)
    for low, high in TRACE_BINS:
        if high is None:
            if median >= low:
                return _bin_name(low, high)
        elif low <= median < high:
            return _bin_name(low, high)
    return UNTRACED


def bin_trace_lengths(records: list[PredictionRecord]) -> dict[str, dict[str, Any]]:
    """Per trace-length bin: record count and accuracy by method."""
    labels = [_bin_name(low, high) for low, high in TRACE_BINS]
    labels.append(UNTRACED)
    bins: dict[str, dict[str, Any]] = {label: {"count": 0, "accuracy": {}} for label in labels}
    tallies: dict[str, dict[str, list[int]]] = {label: {} for label in labels}

    for record in records:
        label = trace_bin_label(record.trace_steps)
        bins[label]["count"] += 1
        if record.correct is not None:
            tallies[label].setdefault(record.method, []).append(int(record.correct))

    for label, by_method in tallies.items():
        for method, vals in sorted(by_method.items()):
            bins[label]["accuracy"][method] = sum(vals) / len(vals)
    return bins


def correctness_label(
    executor: Executor,
    record: PredictionRecord,
    problem: Problem,
    inputs: list[TestInput],
    limits: ExecLimits = ExecLimits(),
) -> str:
    """Did any of the record's translated programs fully pass the truth?

    "correct" when at least one translation reproduces the ground truth
    on every input that has one; "incorrect" otherwise; "unknown" when
    the record carries no translations or the problem has no truth.
    """
    sources = [s for s in record.translations if s]
    truth_inputs = [i for i in inputs if i.id in problem.ground_truth]
    if not sources or not truth_inputs:
        return "unknown"
    for source in sources:
        all_pass = True
        for test_input in truth_inputs:
            outcome = execute(executor, source, test_input, limits)
            truth = problem.ground_truth[test_input.id]
            if not (outcome.ok and outcome.value is not None and outputs_equal(outcome.value, truth)):
                all_pass = False
                break
        if all_pass:
            return "correct"
    return "incorrect"


def attach_groups(
    records: list[PredictionRecord],
    dataset: list[DatasetEntry],
    executor: Executor,
    ctx: LlmContext | None = None,
    groups: Iterable[str] = ("correctness", "trace"),
    limits: ExecLimits = ExecLimits(),
    difficulty_samples: int = 10,
) -> list[PredictionRecord]:
    """Annotate records in place with the requested group labels."""
    wanted = set(groups)
    by_id = {entry.problem.id: entry for entry in dataset}
    difficulty_cache: dict[str, str] = {}

    for record in records:
        entry = by_id.get(record.problem_id)
        if entry is None:
            continue
        if "trace" in wanted:
            record.groups["trace"] = trace_bin_label(record.trace_steps)
        if "correctness" in wanted:
            record.groups["correctness"] = correctness_label(
                executor, record, entry.problem, entry.inputs, limits
            )
        if "difficulty" in wanted and ctx is not None:
            cache_key = f"{record.problem_id}/{record.input_id}"
            if cache_key not in difficulty_cache:
                test_input = next((i for i in entry.inputs if i.id == record.input_id), None)
                truth = entry.problem.ground_truth.get(record.input_id)
                if test_input is None or truth is None:
                    difficulty_cache[cache_key] = "unknown"
                else:
                    difficulty_cache[cache_key] = classify_input_difficulty(
                        ctx, executor, entry.problem, test_input, truth,
                        samples=difficulty_samples, limits=limits,
                    )
            record.groups["difficulty"] = difficulty_cache[cache_key]
    return records


# ── reports ────────────────────────────────────────────────────────────


def accuracy_by_method(records: list[PredictionRecord]) -> dict[str, float]:
    by_method: dict[str, list[int]] = {}
    for record in records:
        if record.correct is not None:
            by_method.setdefault(record.method, []).append(int(record.correct))
    return {m: sum(v) / len(v) for m, v in sorted(by_method.items())}


def grouped_accuracy(records: list[PredictionRecord], group: str) -> dict[str, dict[str, float]]:
    """group label -> method -> accuracy, over records carrying the group."""
    result: dict[str, dict[str, list[int]]] = {}
    for record in records:
        label = record.groups.get(group)
        if label is None or record.correct is None:
            continue
        result.setdefault(label, {}).setdefault(record.method, []).append(int(record.correct))
    return {
        label: {m: sum(v) / len(v) for m, v in sorted(methods.items())}
        for label, methods in sorted(result.items())
    }


def format_table(title: str, rows: list[tuple[str, ...]], header: tuple[str, ...]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row: tuple[str, ...]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [title, fmt(header), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


def summary_table(records: list[PredictionRecord], groups: Iterable[str] = ()) -> str:
    """Human-readable accuracy tables, one block per grouping."""
    parts: list[str] = []
    overall = accuracy_by_method(records)
    if overall:
        rows = [(m, f"{acc:.3f}") for m, acc in overall.items()]
        parts.append(format_table("Prediction accuracy by method", rows, ("method", "accuracy")))
    else:
        parts.append("Prediction accuracy by method\n(no scored records)\n")
    for group in groups:
        table = grouped_accuracy(records, group)
        if not table:
            parts.append(f"Group {group!r}: no records carry this group\n")
            continue
        methods = sorted({m for per in table.values() for m in per})
        rows = []
        for label, per in table.items():
            rows.append(
                (label, *(f"{per[m]:.3f}" if m in per else "-" for m in methods))
            )
        parts.append(format_table(f"Accuracy by {group}", rows, (group, *methods)))
    return "\n".join(parts)


def plot_series(records: list[PredictionRecord], group: str) -> dict[str, Any]:
    """Numbers-only series for external plotting: labels plus one
    accuracy series per method."""
    table = grouped_accuracy(records, group)
    labels = list(table.keys())
    methods = sorted({m for per in table.values() for m in per})
    return {
        "group": group,
        "labels": labels,
        "series": {
            m: [table[label].get(m) for label in labels] for m in methods
        },
    }


def emit_report(
    records: list[PredictionRecord],
    out_dir: str | Path,
    groups: Iterable[str] = (),
    formats: Iterable[str] = ("table",),
) -> list[Path]:
    """Write results.jsonl plus the requested report formats.

    Output is deterministic: no timestamps, stable ordering.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    results_path = out / "results.jsonl"
    with results_path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), sort_keys=True, ensure_ascii=False) + "\n")
    written.append(results_path)

    groups = list(groups)
    formats = set(formats)
    if "table" in formats:
        table_path = out / "summary.txt"
        table_path.write_text(summary_table(records, groups), encoding="utf-8")
        written.append(table_path)
    if "series" in formats:
        series_path = out / "series.json"
        payload = {g: plot_series(records, g) for g in groups}
        series_path.write_text(
            json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written.append(series_path)
    return written


def load_records(path: str | Path) -> list[PredictionRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(PredictionRecord.from_json(json.loads(line)))
    return records
