"""How model text and program results become comparable output values.

Everything the voting layer compares is an OutputValue: program returns,
simulated outputs, and ungrounded guesses all pass through the same
canonicalization so that "the same answer" means one thing everywhere.
"""

from dualexec import OutputValue, canonicalize_response, outputs_equal

RESPONSES = [
    # A fenced block wins over surrounding prose.
    "The loop ends with total = 42.\n```\n42\n```",
    # The last block wins when a response thinks out loud in several.
    "First guess:\n```\n41\n```\nCorrecting myself:\n```json\n42\n```",
    # No fence at all: the whole text is the answer.
    "42",
    # JSON parses first, then Python literals.
    '```\n{"pairs": [[1, 2], [3, 4]]}\n```',
    "```\nTrue\n```",
    # Unparseable content survives as a plain string.
    "```\nnot a literal\n```",
]


def main() -> None:
    print("model responses reduce to canonical values:\n")
    for raw in RESPONSES:
        value = canonicalize_response(raw)
        preview = raw.replace("\n", "\\n")
        if len(preview) > 58:
            preview = preview[:55] + "..."
        print(f"  {preview:<60} -> {value!r}")

    print("\nprogram results go through the same normalization:\n")
    pairs = [
        ((1, 2), [1, 2]),
        ({1: "a"}, {"1": "a"}),
        (3.0, 3),
    ]
    for left, right in pairs:
        a, b = OutputValue.of(left), OutputValue.of(right)
        verdict = "equal" if outputs_equal(a, b) else "different"
        print(f"  {left!r:<24} vs {right!r:<24} {verdict}")

    print("\nso a simulated '42' and a program returning 42 cast the same vote:")
    simulated = canonicalize_response("Final output:\n```\n42\n```")
    executed = OutputValue.of(42)
    print(f"  outputs_equal -> {outputs_equal(simulated, executed)}")


if __name__ == "__main__":
    main()
