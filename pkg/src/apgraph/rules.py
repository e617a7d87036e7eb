"""Association rules from mined patterns."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .core import Dataset, PatternSet, as_fraction, at_least, canonical, support_count


class UndefinedConfidenceError(ZeroDivisionError):
    """The antecedent never occurs, so the rule's confidence is undefined."""


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    joint_count: int
    antecedent_count: int

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.joint_count, self.antecedent_count)


class _Counts(dict):
    """Memoized support counts keyed by frozenset."""

    def __init__(self, dataset: Dataset):
        super().__init__()
        self.dataset = dataset

    def __missing__(self, key: frozenset) -> int:
        value = self[key] = support_count(self.dataset, key)
        return value


def _check_sides(antecedent: frozenset, consequent: frozenset) -> None:
    if not antecedent or not consequent:
        raise ValueError("antecedent and consequent must be non-empty")
    if antecedent & consequent:
        raise ValueError("antecedent and consequent must be disjoint")


def confidence(dataset: Dataset, antecedent: Iterable[int], consequent: Iterable[int]) -> Fraction:
    """support(antecedent | consequent) / support(antecedent), exactly."""
    a, c = frozenset(antecedent), frozenset(consequent)
    _check_sides(a, c)
    den = support_count(dataset, a)
    if den == 0:
        raise UndefinedConfidenceError(f"antecedent {sorted(a)} never occurs")
    return Fraction(support_count(dataset, a | c), den)


def generate_rules(
    patterns: PatternSet | Iterable,
    dataset: Dataset,
    min_confidence=Fraction(0),
    counts: dict | None = None,
) -> list[Rule]:
    """Every ``A -> P - A`` over non-empty proper subsets ``A`` of each pattern
    ``P`` whose confidence is at least ``min_confidence``.

    Rules come out grouped by pattern, then by antecedent size (largest
    first), then by antecedent in canonical order. ``counts`` may be passed
    to share the support cache between calls.
    """
    threshold = as_fraction(min_confidence)
    if not 0 <= threshold <= 1:
        raise ValueError(f"confidence threshold must be in [0, 1], got {min_confidence}")
    if counts is None:
        counts = _Counts(dataset)
    rules = []
    for pattern in patterns:
        items = canonical(pattern.items)
        joint = counts[frozenset(items)]
        for size in range(len(items) - 1, 0, -1):
            for ante in combinations(items, size):
                den = counts[frozenset(ante)]
                if den == 0:
                    raise UndefinedConfidenceError(f"antecedent {ante} never occurs")
                if at_least(joint, den, threshold):
                    cons = tuple(i for i in items if i not in ante)
                    rules.append(Rule(ante, cons, joint, den))
    return rules


def support_cache(dataset: Dataset) -> dict:
    return _Counts(dataset)
