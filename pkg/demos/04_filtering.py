"""Filtering candidate programs with a self-generated test suite.

No ground truth is consulted while ranking. The pipeline asks the model
for test inputs, predicts an output for each one, then orders candidate
programs by how many predicted cases they pass, breaking ties toward
candidates whose full behavior is shared by more of their peers.
"""

from dualexec import (
    Gateway,
    LlmContext,
    PredictionEngine,
    PredictionPlan,
    Problem,
    PromptKind,
    ScriptedBackend,
)
from dualexec.engine import METHOD_DIRECT
from dualexec.executors import InProcessExecutor
from dualexec.filtering import build_suite, generate_test_inputs, pass_at_k, rank_candidates


def fenced(text: str, lang: str = "") -> str:
    return f"```{lang}\n{text}\n```"


PROBLEM = Problem(
    id="square",
    description="Given a positive integer x, return x squared.",
    starter_code="def solve(x) -> int:",
    ground_truth={},
)

DRAFT = "multiply x by itself and return the product"
REFERENCE = "def solve(x):\n    return x * x"

# Candidates arrive in no particular order: a crasher, an off-by-one,
# two behaviorally identical correct programs, and a lucky partial.
CANDIDATES = [
    "def solve(x):\n    return x // 0",
    "def solve(x):\n    return x * x + 1",
    "def solve(x):\n    return x * x",
    "def solve(x):\n    return x * 2",
    "def solve(x):\n    total = 0\n    for _ in range(x):\n        total += x\n    return total",
]
TRULY_PASSES = [False, False, True, False, True]


def build_backend() -> ScriptedBackend:
    backend = ScriptedBackend()
    base = {"problem": PROBLEM.description, "starter_code": PROBLEM.starter_code}

    inputs_response = "## Reasoning\nsmall values cover the interesting cases\n## Test Case Inputs\n"
    for i, args in enumerate(['{"x": 1}', '{"x": 2}', '{"x": 3}']):
        inputs_response += f"### Test Case Input {i + 1}\n{fenced(args)}\n"
    backend.add_rendered(PromptKind.TEST_INPUT_GEN, base, inputs_response)

    backend.add_rendered(PromptKind.PSEUDOCODE_GEN, base, [fenced(DRAFT, "plaintext")])
    backend.add_rendered(
        PromptKind.CODE_GEN,
        {**base, "pseudocode": DRAFT},
        fenced(REFERENCE, "python"),
    )
    return backend


def main() -> None:
    ctx = LlmContext(Gateway(build_backend()), "scripted")
    executor = InProcessExecutor()
    engine = PredictionEngine(ctx, executor)

    inputs = generate_test_inputs(ctx, PROBLEM, 3)
    print("model-proposed test inputs:")
    for test_input in inputs:
        print(f"  {test_input.prompt_text()}")

    plan = PredictionPlan(method=METHOD_DIRECT, l=1, reuse_pseudocode=True)
    suite = build_suite(engine, PROBLEM, inputs, plan)
    print(f"\npredicted suite ({suite.dropped} inputs dropped):")
    for case in suite.cases:
        print(f"  {case.input.prompt_text()} -> {case.predicted.value!r}")

    ranked = rank_candidates(executor, CANDIDATES, suite)
    print("\ncandidates ranked by predicted-suite agreement:")
    for rank, index in enumerate(ranked.order, start=1):
        score = ranked.scores[index]
        body = CANDIDATES[index].splitlines()[-1].strip()
        print(
            f"  #{rank}: candidate {index} ({body}) "
            f"passed {score.passed}/{len(suite.cases)}, cluster {score.cluster_size}"
        )

    print("\nnote the two correct programs cluster together and rank first,")
    print("while the crasher and the off-by-one sink to the bottom.")

    for k in (1, 2):
        print(f"pass@{k} against real ground truth: {pass_at_k(ranked, TRULY_PASSES, k)}")


if __name__ == "__main__":
    main()
