"""Path-weighted functional majority voting.

Each prediction path contributes a multiset of candidate outputs. Votes
are grouped into equivalence classes under tolerant output equality, and
each class is scored per path as weight * match count. A path's weight
for a class is high exactly when every valid output the path produced
falls in that class: a unanimous path is treated as more trustworthy
than a self-contradicting one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import OutputValue, PathResult, outputs_equal

W_HIGH_DEFAULT = 2
W_BASE_DEFAULT = 1


class TieBreak(str, Enum):
    DIRECT_FIRST = "direct_first"
    LLM_FIRST = "llm_first"
    FIRST_SEEN = "first_seen"


class NoValidOutput(Exception):
    """Raised when no path produced any valid output to vote on."""


@dataclass(frozen=True)
class VotingConfig:
    w_high: int = W_HIGH_DEFAULT
    w_base: int = W_BASE_DEFAULT
    tie_break: TieBreak = TieBreak.DIRECT_FIRST

    def __post_init__(self) -> None:
        if self.w_high < self.w_base:
            raise ValueError("w_high must be at least w_base")
        if self.w_base <= 0:
            raise ValueError("weights must be positive")


@dataclass
class VoteClass:
    """One output equivalence class with its per-path vote counts."""

    representative: OutputValue
    direct_count: int
    llm_count: int
    direct_weight: int
    llm_weight: int
    first_seen: int

    @property
    def score(self) -> int:
        return self.direct_weight * self.direct_count + self.llm_weight * self.llm_count


def path_weight(output: OutputValue, path: PathResult, config: VotingConfig) -> int:
    """High weight iff the path is nonempty and unanimously equals output."""
    values = path.valid_values()
    if values and all(outputs_equal(v, output) for v in values):
        return config.w_high
    return config.w_base


def _group(values: list[OutputValue]) -> tuple[list[OutputValue], list[int]]:
    """Map values to equivalence classes, preserving first-seen order.

    Returns (representatives, class index per value).
    """
    reps: list[OutputValue] = []
    assignment: list[int] = []
    for value in values:
        for idx, rep in enumerate(reps):
            if outputs_equal(value, rep):
                assignment.append(idx)
                break
        else:
            reps.append(value)
            assignment.append(len(reps) - 1)
    return reps, assignment


def tally(direct: PathResult, llm: PathResult, config: VotingConfig) -> list[VoteClass]:
    """Build the scored vote classes for a pair of paths.

    Classes appear in first-seen order: direct-path outputs are scanned
    before the second path's outputs.
    """
    direct_values = direct.valid_values()
    llm_values = llm.valid_values()
    reps, assignment = _group(direct_values + llm_values)
    n_direct = len(direct_values)

    direct_counts = [0] * len(reps)
    llm_counts = [0] * len(reps)
    for pos, cls in enumerate(assignment):
        if pos < n_direct:
            direct_counts[cls] += 1
        else:
            llm_counts[cls] += 1

    # Unanimity per path means a single class holds all its valid votes.
    direct_unanimous_cls = assignment[0] if n_direct and len(set(assignment[:n_direct])) == 1 else None
    llm_unanimous_cls = assignment[n_direct] if llm_values and len(set(assignment[n_direct:])) == 1 else None

    classes = []
    for idx, rep in enumerate(reps):
        classes.append(
            VoteClass(
                representative=rep,
                direct_count=direct_counts[idx],
                llm_count=llm_counts[idx],
                direct_weight=config.w_high if idx == direct_unanimous_cls else config.w_base,
                llm_weight=config.w_high if idx == llm_unanimous_cls else config.w_base,
                first_seen=idx,
            )
        )
    return classes


def select_class(direct: PathResult, llm: PathResult, config: VotingConfig) -> VoteClass:
    """Pick the winning vote class; raises NoValidOutput if none exist."""
    classes = tally(direct, llm, config)
    if not classes:
        raise NoValidOutput("both paths produced only invalid outputs")

    if config.tie_break is TieBreak.DIRECT_FIRST:
        key = lambda c: (-c.score, -c.direct_count, c.first_seen)
    elif config.tie_break is TieBreak.LLM_FIRST:
        key = lambda c: (-c.score, -c.llm_count, c.first_seen)
    else:
        key = lambda c: (-c.score, c.first_seen)
    return min(classes, key=key)


def select(direct: PathResult, llm: PathResult, config: VotingConfig | None = None) -> OutputValue:
    """Path-weighted selection across a direct and a model-based path."""
    return select_class(direct, llm, config or VotingConfig()).representative


def fmv(paths: list[PathResult]) -> OutputValue:
    """Plain functional majority vote over the pooled valid outputs.

    No weights: the most common output class wins, first seen breaks
    ties. Raises NoValidOutput when the pool is empty.
    """
    pooled: list[OutputValue] = []
    for path in paths:
        pooled.extend(path.valid_values())
    reps, assignment = _group(pooled)
    if not reps:
        raise NoValidOutput("no valid outputs to vote on")
    counts = [0] * len(reps)
    for cls in assignment:
        counts[cls] += 1
    best = max(range(len(reps)), key=lambda i: (counts[i], -i))
    return reps[best]
