"""Accuracy, Brier variants, and the Inverse Brier Score (IBS).

IBS rewards calibrated confidence: a prediction scored with probability p
contributes 1 - (p - y)² where y indicates whether the predicted class was
the true one.  With definite predictions (p = 1) it coincides with plain
accuracy, and an abstention is scored as p = 0.5, worth 0.75 regardless of
the true class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class Prediction:
    """A predicted class with confidence; ``label=None`` means abstain."""

    label: str | None
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


#: A scored prediction set is a sequence of (prediction, true class) pairs.
ScoredSet = Sequence[tuple[Prediction, str]]


def _check(pairs: ScoredSet) -> None:
    if len(pairs) == 0:
        raise ValueError("need at least one scored prediction")


def accuracy(pairs: ScoredSet) -> float:
    """Fraction of exact class matches; abstentions count as incorrect."""
    _check(pairs)
    return sum(1 for p, truth in pairs if p.label == truth) / len(pairs)


def _brier_term(p: Prediction, truth: str) -> float:
    prob = 0.5 if p.label is None else p.confidence
    y = 1.0 if p.label == truth else 0.0
    return (prob - y) ** 2


def one_class_brier(pairs: ScoredSet) -> float:
    """Mean squared error of the reported probability against the
    indicator "predicted class is the true class"; abstentions are scored
    with p = 0.5."""
    _check(pairs)
    return sum(_brier_term(p, truth) for p, truth in pairs) / len(pairs)


def ibs(pairs: ScoredSet) -> float:
    """Inverse Brier Score: mean of 1 - (p - y)² per prediction.

    Averaging the complement per example (instead of computing
    1 - one_class_brier) keeps the identity with accuracy exact for
    definite predictions, not just up to rounding.
    """
    _check(pairs)
    return sum(1.0 - _brier_term(p, truth) for p, truth in pairs) / len(pairs)


def multiclass_brier(
    pairs: ScoredSet, class_distributions: Sequence[Mapping[str, float]]
) -> float:
    """Full quadratic score over per-class probability vectors.

    Each distribution must sum to 1 (within 1e-9).  For one-hot two-class
    distributions this reduces to twice the one-class score.
    """
    _check(pairs)
    if len(class_distributions) != len(pairs):
        raise ValueError("one distribution per scored pair required")
    total = 0.0
    for (_, truth), dist in zip(pairs, class_distributions):
        mass = sum(dist.values())
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"distribution sums to {mass}, expected 1")
        classes = set(dist) | {truth}
        for k in sorted(classes):
            y = 1.0 if k == truth else 0.0
            total += (dist.get(k, 0.0) - y) ** 2
    return total / len(pairs)
