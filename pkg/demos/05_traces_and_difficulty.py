"""Execution traces as a cost signal, and rating inputs by solve rate.

Every sandboxed run counts the source lines the candidate actually
executed. Step counts feed two places: reports bin records by trace
length, and inputs get difficulty labels from how many independently
drafted solutions reproduce the expected output.
"""

from dualexec import (
    Gateway,
    LlmContext,
    OutputValue,
    Problem,
    PromptKind,
    ScriptedBackend,
    TestInput,
)
from dualexec.codepath import execute
from dualexec.evaluation import classify_input_difficulty, trace_bin_label
from dualexec.executors import InProcessExecutor


def fenced(text: str, lang: str = "") -> str:
    return f"```{lang}\n{text}\n```"


EARLY_EXIT = """\
def find(nums, target):
    for i, value in enumerate(nums):
        if value == target:
            return i
    return -1
"""

FULL_SCAN = """\
def find(nums, target):
    best = -1
    for i, value in enumerate(nums):
        if value == target:
            best = i
    return best
"""


def trace_part(executor: InProcessExecutor) -> None:
    print("== trace lengths ==")
    needle = TestInput("needle", "find", args={"nums": list(range(50)), "target": 3})
    for name, source in (("early exit", EARLY_EXIT), ("full scan", FULL_SCAN)):
        outcome = execute(executor, source, needle)
        label = trace_bin_label([outcome.trace_steps])
        print(
            f"  {name:<10} -> value {outcome.value.value}, "
            f"{outcome.trace_steps} steps, bin {label}"
        )
    print("  same answer, very different work; the bins make that visible.")


PROBLEM = Problem(
    id="largest-digit",
    description="Given a positive integer n, return its largest decimal digit.",
    starter_code="def largest_digit(n) -> int:",
    ground_truth={},
)

DRAFTS = [
    "walk the digits keeping the running maximum",
    "convert to a string and take the max character as an int",
    "just look at the first digit",
    "just look at the last digit",
]

TRANSLATIONS = [
    # Two real solutions and two plausible shortcuts that only work
    # when the extreme digit happens to sit at that end of the number.
    "def largest_digit(n):\n    best = 0\n    while n:\n        best = max(best, n % 10)\n        n //= 10\n    return best",
    "def largest_digit(n):\n    return int(max(str(n)))",
    "def largest_digit(n):\n    return int(str(n)[0])",
    "def largest_digit(n):\n    return n % 10",
]


def build_backend() -> ScriptedBackend:
    backend = ScriptedBackend()
    base = {"problem": PROBLEM.description, "starter_code": PROBLEM.starter_code}
    backend.add_rendered(
        PromptKind.PSEUDOCODE_GEN,
        base,
        [fenced(d, "plaintext") for d in DRAFTS],
    )
    for draft, code in zip(DRAFTS, TRANSLATIONS):
        backend.add_rendered(
            PromptKind.CODE_GEN,
            {**base, "pseudocode": draft},
            fenced(code, "python"),
        )
    return backend


def difficulty_part(executor: InProcessExecutor) -> None:
    print("\n== input difficulty ==")
    ctx = LlmContext(Gateway(build_backend()), "scripted")

    cases = [
        ("952 (max digit leads)", {"n": 952}, 9),
        ("291 (max digit hides in the middle)", {"n": 291}, 9),
        ("318 with a mislabeled expected output", {"n": 318}, 9),
    ]
    for ordinal, (label, args, expected) in enumerate(cases):
        test_input = TestInput(f"d{ordinal}", PROBLEM.id, args=args)
        verdict = classify_input_difficulty(
            ctx, executor, PROBLEM, test_input, OutputValue.of(expected), samples=4
        )
        print(f"  {label:<40} -> {verdict}")

    print("  four drafts, four programs: the shortcuts pass 952 but not 291,")
    print("  and nothing reproduces a wrong label, which is exactly how a bad")
    print("  ground-truth entry announces itself.")


def main() -> None:
    executor = InProcessExecutor()
    trace_part(executor)
    difficulty_part(executor)


if __name__ == "__main__":
    main()
