"""Frequency-ordered cascade of binary stages.

A K-class problem becomes K-1 binary decisions: stage i separates the i-th
most frequent class from everything rarer. Peeling the majority class first
shrinks the imbalance each remaining stage sees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyStageError, OutOfRangeProbabilityError, SingleClassError


@dataclass(frozen=True)
class StageSpec:
    index: int
    positive_class: str
    negative_set: tuple[str, ...]

    def __post_init__(self):
        if not self.negative_set:
            raise ValueError("negative_set must be non-empty")
        if self.positive_class in self.negative_set:
            raise ValueError("positive_class cannot appear in negative_set")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "positive_class": self.positive_class,
            "negative_set": list(self.negative_set),
        }


@dataclass(frozen=True)
class CascadePlan:
    ordered_classes: tuple[str, ...]
    stages: tuple[StageSpec, ...]

    def to_dict(self) -> dict:
        return {
            "ordered_classes": list(self.ordered_classes),
            "stages": [s.to_dict() for s in self.stages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CascadePlan":
        return cls(
            ordered_classes=tuple(d["ordered_classes"]),
            stages=tuple(
                StageSpec(s["index"], s["positive_class"], tuple(s["negative_set"]))
                for s in d["stages"]
            ),
        )


def build_cascade_plan(class_counts: Mapping[str, int]) -> CascadePlan:
    """Order classes by (descending count, ascending label) and cut K-1 stages."""
    if len(class_counts) < 2:
        raise SingleClassError(f"got {len(class_counts)} class(es)")
    ordered = tuple(sorted(class_counts, key=lambda lab: (-class_counts[lab], lab)))
    stages = tuple(
        StageSpec(index=i, positive_class=ordered[i], negative_set=tuple(ordered[i + 1:]))
        for i in range(len(ordered) - 1)
    )
    return CascadePlan(ordered_classes=ordered, stages=stages)


def stage_subset(labels: Sequence[str], stage: StageSpec) -> tuple[list[int], np.ndarray]:
    """Rows eligible for a stage plus their binary labels (1 = positive class).

    Rows claimed by earlier stages (labels outside positive+negatives) are
    excluded. Raises EmptyStageError when either side has no rows, which
    signals a defective upstream split.
    """
    eligible = {stage.positive_class, *stage.negative_set}
    indices: list[int] = []
    binary: list[int] = []
    for i, lab in enumerate(labels):
        if lab in eligible:
            indices.append(i)
            binary.append(1 if lab == stage.positive_class else 0)
    y = np.array(binary, dtype=np.int64)
    if len(y) == 0 or y.sum() == 0 or y.sum() == len(y):
        raise EmptyStageError(
            f"stage {stage.index} ({stage.positive_class!r} vs rest) has an empty side"
        )
    return indices, y


def compose_distribution(stage_positives: Sequence[float]) -> np.ndarray:
    """Chain stage probabilities into a full distribution over ordered classes.

    P(class i) = p_i * prod_{j<i}(1 - p_j); the final class absorbs the
    remaining mass, so the result telescopes to exactly 1.
    """
    p = np.asarray(stage_positives, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise OutOfRangeProbabilityError("need at least one stage probability")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise OutOfRangeProbabilityError(f"probabilities outside [0,1]: {p}")

    out = np.empty(p.size + 1, dtype=np.float64)
    remaining = 1.0
    for i, p_i in enumerate(p):
        out[i] = p_i * remaining
        remaining *= 1.0 - p_i
    out[-1] = remaining
    return out
