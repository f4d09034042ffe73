"""A full dual prediction against a scripted model, end to end.

The engine drafts pseudocode, then splits the drafts: some are simulated
by the model, the rest are translated to Python and executed for real.
Both paths vote on the final answer. Here the model is a ScriptedBackend,
so every response is pinned and the run is fully reproducible.

The scripted story: the model reasons correctly about the algorithm, but
both of its translations contain (different) bugs. The grounded votes
split, the simulated votes agree, and voting recovers the right answer.
"""

import tempfile

from dualexec import (
    Gateway,
    LlmContext,
    PredictionEngine,
    PredictionPlan,
    Problem,
    PromptKind,
    ScriptedBackend,
    TestInput,
    count_calls,
)
from dualexec.engine import METHOD_DUAL
from dualexec.executors import InProcessExecutor


def fenced(text: str, lang: str = "") -> str:
    return f"```{lang}\n{text}\n```"


PROBLEM = Problem(
    id="square-plus-seven",
    description="Given an integer x, return x squared plus seven.",
    starter_code="def solve(x) -> int:",
    ground_truth={},
)

X3 = TestInput("x-is-3", PROBLEM.id, args={"x": 3})

DRAFTS = [
    "read x, square it, add seven, return the sum",
    "compute x * x, then return that plus 7",
    "square x and add seven",
    "return seven more than x squared",
]

BUGGY_TRANSLATIONS = [
    "def solve(x):\n    return x * x - 7",
    "def solve(x):\n    return 0",
]


def build_backend() -> ScriptedBackend:
    backend = ScriptedBackend()
    base = {"problem": PROBLEM.description, "starter_code": PROBLEM.starter_code}

    # One generation prompt, four sampled drafts.
    backend.add_rendered(
        PromptKind.PSEUDOCODE_GEN,
        base,
        [fenced(d, "plaintext") for d in DRAFTS],
    )

    # The first two drafts are simulated; both walk to the right answer.
    for draft in DRAFTS[:2]:
        backend.add_rendered(
            PromptKind.EXEC_PSEUDOCODE,
            {**base, "pseudocode": draft, "tc_input": X3.prompt_text()},
            "x is 3, squared is 9, plus seven is 16\n" + fenced("16"),
        )

    # The last two drafts are translated; each translation is wrong in
    # its own way, so their executed outputs disagree.
    for draft, code in zip(DRAFTS[2:], BUGGY_TRANSLATIONS):
        backend.add_rendered(
            PromptKind.CODE_GEN,
            {**base, "pseudocode": draft},
            fenced(code, "python"),
        )

    return backend


def run_once(backend: ScriptedBackend, cache_dir: str) -> None:
    gateway = Gateway(backend, cache_dir=cache_dir)
    ctx = LlmContext(gateway, "scripted")
    engine = PredictionEngine(ctx, InProcessExecutor())
    plan = PredictionPlan(method=METHOD_DUAL, l=2, m=2)

    prediction = engine.predict(PROBLEM, X3, plan)

    print(f"  selected value: {prediction.selected.value!r}")
    print(f"  fallen back:    {prediction.fallen_back}")
    direct_values = [o.value for o in prediction.direct.valid_values()]
    llm_values = [o.value for o in prediction.llm.valid_values()]
    print(f"  direct path executed outputs:  {direct_values}")
    print(f"  model path simulated outputs:  {llm_values}")
    for cls in prediction.vote_classes:
        print(
            f"    vote class {cls.representative.value!r}: score {cls.score}"
        )

    calls, executions = count_calls(gateway.ledger)
    print(f"  backend calls: {calls}, sandbox executions: {executions}")


def main() -> None:
    backend = build_backend()
    with tempfile.TemporaryDirectory() as cache_dir:
        print("cold run (every prompt hits the backend):")
        run_once(backend, cache_dir)

        print("\nwarm run (same cache directory, zero backend calls):")
        run_once(backend, cache_dir)


if __name__ == "__main__":
    main()
