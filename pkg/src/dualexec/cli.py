"""Command line front end.

Four subcommands: ``predict`` scores output prediction on a dataset,
``filter`` ranks candidate programs with predicted test suites,
``eval`` attaches group labels to existing results, and ``report``
renders saved results. A JSON config file can preload any flag;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import ExecLimits
from .engine import METHOD_DUAL, METHODS, PredictionEngine, PredictionPlan
from .evaluation import (
    SchemaError,
    attach_groups,
    emit_report,
    load_dataset,
    load_records,
    run_prediction_benchmark,
    summary_table,
)
from .executors import InProcessExecutor, ShimExecutor
from .filtering import (
    build_suite,
    candidate_passes_ground_truth,
    generate_test_inputs,
    pass_at_k,
    rank_candidates,
)
from .gateway import Gateway, HttpBackend, LlmContext, ScriptedBackend

METHOD_ALIASES = {
    "direct": "direct_only",
    "llm": "llm_only",
    "llm_based": "llm_only",
}


def _parse_methods(raw: str) -> list[str]:
    methods = []
    for item in raw.split(","):
        name = METHOD_ALIASES.get(item.strip(), item.strip())
        if name not in METHODS:
            raise argparse.ArgumentTypeError(
                f"unknown path {item!r}; choose from {', '.join(METHODS)}"
            )
        methods.append(name)
    return methods


def _parse_k_list(raw: str) -> list[int]:
    try:
        ks = [int(x) for x in raw.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("k must be a comma-separated list of ints") from exc
    if any(k <= 0 for k in ks):
        raise argparse.ArgumentTypeError("k values must be positive")
    return ks


def build_parser() -> argparse.ArgumentParser:
    # allow_abbrev would make the sub-flag --m ambiguous against the
    # global --model / --memory-mb during the pre-dispatch scan.
    parser = argparse.ArgumentParser(
        prog="dualexec",
        description="Grounded test-output prediction and candidate filtering.",
        allow_abbrev=False,
    )
    parser.add_argument("--model", default=None, help="model identifier sent to the backend")
    parser.add_argument("--endpoint", default=None, help="chat-completions endpoint URL")
    parser.add_argument("--script", default=None, help="scripted-responses JSON file (offline backend)")
    parser.add_argument("--cache-dir", default=None, help="response cache directory")
    parser.add_argument("--config", default=None, help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, default=None, help="sample-lane seed")
    parser.add_argument("--workers", type=int, default=None, help="parallel prediction workers")
    parser.add_argument(
        "--executor", choices=("inprocess", "shim"), default=None,
        help="candidate executor (default shim; inprocess is NOT sandboxed)",
    )
    parser.add_argument("--time-ms", type=int, default=None, help="per-execution time limit")
    parser.add_argument("--memory-mb", type=int, default=None, help="per-execution memory limit")

    sub = parser.add_subparsers(dest="command", required=True)

    p_predict = sub.add_parser("predict", help="score output prediction on a dataset")
    p_predict.add_argument("--dataset", required=True)
    p_predict.add_argument(
        "--paths", type=_parse_methods, default=METHOD_DUAL,
        help="comma-separated methods",
    )
    p_predict.add_argument("--l", type=int, default=10, help="direct-path samples")
    p_predict.add_argument("--m", type=int, default=10, help="model-path samples")
    p_predict.add_argument("--reuse-pseudocode", action="store_true")
    p_predict.add_argument("--out", default="runs/predict")

    p_filter = sub.add_parser("filter", help="rank candidate programs")
    p_filter.add_argument("--dataset", required=True)
    p_filter.add_argument("--candidates", required=True, help="dir with <problem_id>/*.py")
    p_filter.add_argument("--k", type=_parse_k_list, default="1", help="comma-separated k values")
    p_filter.add_argument("--l", type=int, default=5)
    p_filter.add_argument("--m", type=int, default=5)
    p_filter.add_argument("--inputs", type=int, default=5, help="generated inputs per problem")
    p_filter.add_argument("--reuse-pseudocode", action="store_true")
    p_filter.add_argument("--out", default="runs/filter")

    p_eval = sub.add_parser("eval", help="attach group labels to results")
    p_eval.add_argument("--results", required=True)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--groups", default="correctness,trace")
    p_eval.add_argument("--difficulty-samples", type=int, default=10)
    p_eval.add_argument("--out", default="runs/eval")

    p_report = sub.add_parser("report", help="render saved results")
    p_report.add_argument("--results", required=True)
    p_report.add_argument("--format", default="table", help="comma-separated: table,series")
    p_report.add_argument("--groups", default="")
    p_report.add_argument("--out", default="runs/report")

    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset flags from the config file, if one was given."""
    if not args.config:
        return
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    if not isinstance(config, dict):
        parser.error("config file must hold a JSON object")
    for key, value in config.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _build_context(args: argparse.Namespace, parser: argparse.ArgumentParser) -> LlmContext:
    if args.script:
        backend = ScriptedBackend.from_file(args.script)
    elif args.endpoint:
        backend = HttpBackend(args.endpoint)
    else:
        parser.error("no backend: pass --endpoint or --script (or set them in --config)")
    gateway = Gateway(backend, cache_dir=args.cache_dir)
    return LlmContext(gateway, args.model or "default")


def _build_executor(args: argparse.Namespace):
    if (args.executor or "shim") == "inprocess":
        return InProcessExecutor()
    return ShimExecutor()


def _limits(args: argparse.Namespace) -> ExecLimits:
    return ExecLimits(
        time_ms=args.time_ms or 10_000,
        memory_mb=args.memory_mb or 512,
    )


def _cmd_predict(args, parser) -> int:
    dataset = load_dataset(args.dataset)
    ctx = _build_context(args, parser)
    engine = PredictionEngine(ctx, _build_executor(args), limits=_limits(args))
    result = run_prediction_benchmark(
        engine,
        dataset,
        methods=args.paths,
        l=args.l,
        m=args.m,
        reuse_pseudocode=args.reuse_pseudocode,
        seed=args.seed or 0,
        workers=args.workers or 1,
    )
    emit_report(result.records, args.out, formats=("table",))
    print(summary_table(result.records))
    for method, (calls, execs) in result.calls_by_method.items():
        print(f"{method}: {calls} model calls, {execs} executions")
    print(f"wrote {args.out}/results.jsonl")
    return 0


def _load_candidates(root: Path, problem_id: str) -> list[str]:
    directory = root / problem_id
    if not directory.is_dir():
        return []
    return [p.read_text(encoding="utf-8") for p in sorted(directory.glob("*.py"))]


def _cmd_filter(args, parser) -> int:
    dataset = load_dataset(args.dataset)
    ctx = _build_context(args, parser)
    executor = _build_executor(args)
    limits = _limits(args)
    engine = PredictionEngine(ctx, executor, limits=limits)
    plan = PredictionPlan(
        method=METHOD_DUAL, l=args.l, m=args.m, reuse_pseudocode=args.reuse_pseudocode
    )
    ks = args.k

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    pass_totals = {k: 0 for k in ks}
    scored = 0

    with (out / "filter_results.jsonl").open("w", encoding="utf-8") as fh:
        for entry in dataset:
            candidates = _load_candidates(Path(args.candidates), entry.problem.id)
            if not candidates:
                print(f"note: no candidates for {entry.problem.id}, skipped", file=sys.stderr)
                continue
            inputs = generate_test_inputs(ctx, entry.problem, args.inputs)
            suite = build_suite(engine, entry.problem, inputs, plan)
            ranked = rank_candidates(executor, candidates, suite, limits, ledger=ctx.gateway.ledger)
            gt_pass = [
                candidate_passes_ground_truth(executor, src, entry.problem, entry.inputs, limits)
                for src in candidates
            ]
            passes = {k: pass_at_k(ranked, gt_pass, k) for k in ks if k <= len(candidates)}
            record = {
                "problem_id": entry.problem.id,
                "order": ranked.order,
                "passed": [s.passed for s in ranked.scores],
                "cluster_size": [s.cluster_size for s in ranked.scores],
                "suite_cases": len(suite.cases),
                "suite_dropped": suite.dropped,
                "ground_truth_pass": gt_pass,
                "pass_at_k": passes,
            }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            rows.append(record)
            scored += 1
            for k, v in passes.items():
                pass_totals[k] += v

    if scored:
        for k in ks:
            print(f"pass@{k}: {pass_totals[k] / scored:.3f} over {scored} problems")
    else:
        print("no problems scored")
    print(f"wrote {out / 'filter_results.jsonl'}")
    return 0


def _cmd_eval(args, parser) -> int:
    records = load_records(args.results)
    dataset = load_dataset(args.dataset)
    groups = [g.strip() for g in args.groups.split(",") if g.strip()]
    ctx = None
    if "difficulty" in groups:
        ctx = _build_context(args, parser)
    attach_groups(
        records,
        dataset,
        _build_executor(args),
        ctx=ctx,
        groups=groups,
        limits=_limits(args),
        difficulty_samples=args.difficulty_samples,
    )
    emit_report(records, args.out, groups=groups, formats=("table", "series"))
    print(summary_table(records, groups))
    print(f"wrote {args.out}/results.jsonl")
    return 0


def _cmd_report(args, parser) -> int:
    records = load_records(args.results)
    groups = [g.strip() for g in args.groups.split(",") if g.strip()]
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    unknown = set(formats) - {"table", "series"}
    if unknown:
        parser.error(f"unknown format(s): {', '.join(sorted(unknown))}")
    emit_report(records, args.out, groups=groups, formats=formats)
    if "table" in formats:
        print(summary_table(records, groups))
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    try:
        if args.command == "predict":
            return _cmd_predict(args, parser)
        if args.command == "filter":
            return _cmd_filter(args, parser)
        if args.command == "eval":
            return _cmd_eval(args, parser)
        return _cmd_report(args, parser)
    except SchemaError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
