"""Path-weighted functional majority voting, one scenario at a time.

Votes arrive from two paths: executed translations (the direct path) and
simulated pseudocode runs (the model path). Each value class accumulates
weighted counts; a path that is unanimous about its answer gets a boost.
"""

from dualexec import (
    ExecutionOutcome,
    NoValidOutput,
    OutcomeStatus,
    OutputValue,
    PathKind,
    PathResult,
    TieBreak,
    VotingConfig,
    fmv,
    select,
)
from dualexec.voting import tally


def direct(*values, failures=0):
    outcomes = [ExecutionOutcome.success(OutputValue.of(v)) for v in values]
    outcomes += [
        ExecutionOutcome.failure(OutcomeStatus.RUNTIME_ERROR, detail="boom")
        for _ in range(failures)
    ]
    return PathResult(path=PathKind.DIRECT, outcomes=outcomes)


def model(*values):
    outcomes = [ExecutionOutcome.success(OutputValue.of(v)) for v in values]
    return PathResult(path=PathKind.LLM_BASED, outcomes=outcomes)


def show(title, direct_path, llm_path, config=None):
    print(f"\n{title}")
    classes = tally(direct_path, llm_path, config or VotingConfig())
    for cls in classes:
        print(
            f"  value {cls.representative.value!r}: "
            f"direct {cls.direct_count} x {cls.direct_weight}, "
            f"model {cls.llm_count} x {cls.llm_weight}, "
            f"score {cls.score}"
        )
    winner = select(direct_path, llm_path, config=config)
    print(f"  selected -> {winner.value!r}")
    return winner


def main() -> None:
    print("== plain majority ==")
    show(
        "three direct votes for 7, one model vote for 9:",
        direct(7, 7, 7),
        model(9),
    )

    print("\n== the unanimity boost ==")
    # Two buggy translations disagree with each other, so the direct path
    # is split and gets no boost. The model path agrees with itself.
    show(
        "direct split (0 vs 1), model unanimous on 16:",
        direct(0, 1),
        model(16, 16),
    )
    # Same counts, but now the direct path is unanimous too: its votes
    # carry the boosted weight on both sides, and the tie goes to the
    # grounded path.
    show(
        "both paths unanimous, two votes each:",
        direct(5, 5),
        model(16, 16),
    )

    print("\n== tie breaking is configurable ==")
    config = VotingConfig(tie_break=TieBreak.LLM_FIRST)
    show(
        "same tie, but the model path wins ties:",
        direct(5, 5),
        model(16, 16),
        config=config,
    )

    print("\n== failures never vote ==")
    show(
        "two direct crashes leave one valid vote for 3:",
        direct(3, failures=2),
        model(8, 8),
    )

    print("\n== pooled voting over many paths ==")
    paths = [direct(4, 4), model(4), model(12, 12)]
    pooled = fmv(paths)
    print(f"  fmv over three paths -> {pooled.value!r}")

    print("\n== nothing valid anywhere ==")
    try:
        select(direct(failures=2), model())
    except NoValidOutput as exc:
        print(f"  NoValidOutput raised: {exc}")


if __name__ == "__main__":
    main()
