"""Level-wise Apriori: the baseline miner and the small-instance oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .core import Dataset, Instrumentation, Pattern, PatternSet


@dataclass
class FrequentItemsetTable:
    """``levels[k - 1]`` maps each frequent k-itemset (sorted id tuple) to its count."""

    levels: list[dict[tuple[int, ...], int]]
    min_support_count: int
    instrumentation: Instrumentation = field(default_factory=Instrumentation)

    def entries(self):
        for level in self.levels:
            yield from level.items()

    def as_dict(self) -> dict[frozenset, int]:
        return {frozenset(k): v for k, v in self.entries()}

    def __len__(self) -> int:
        return sum(len(level) for level in self.levels)


def _join(prev: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """F(k-1) x F(k-1) join on shared (k-2)-prefixes, then subset pruning."""
    known = set(prev)
    out = []
    i = 0
    while i < len(prev):
        j = i
        prefix = prev[i][:-1]
        while j < len(prev) and prev[j][:-1] == prefix:
            j += 1
        block = prev[i:j]
        for a in range(len(block)):
            for b in range(a + 1, len(block)):
                cand = block[a] + (block[b][-1],)
                # the two generating subsets are known; check the rest
                if all(
                    cand[:m] + cand[m + 1:] in known for m in range(len(cand) - 2)
                ):
                    out.append(cand)
        i = j
    return out


def _count(dataset: Dataset, candidates: list[tuple[int, ...]], k: int) -> dict:
    counts = dict.fromkeys(candidates, 0)
    live = {i for c in candidates for i in c}
    for t in dataset.transactions:
        items = sorted(live.intersection(t.items))
        if len(items) < k:
            continue
        # enumerate subsets of t or probe every candidate, whichever is fewer
        if comb(len(items), k) <= len(counts):
            for sub in combinations(items, k):
                if sub in counts:
                    counts[sub] += 1
        else:
            s = t.items
            for c in counts:
                if s.issuperset(c):
                    counts[c] += 1
    return counts


def apriori_mine(dataset: Dataset, min_support_count: int) -> FrequentItemsetTable:
    """All itemsets with support >= ``min_support_count``, with exact counts."""
    if min_support_count < 1:
        raise ValueError(f"min_support_count must be >= 1, got {min_support_count}")
    stats = Instrumentation()
    levels: list[dict[tuple[int, ...], int]] = []
    if dataset.n == 0:
        return FrequentItemsetTable(levels, min_support_count, stats)

    tally = [0] * dataset.n_items
    for t in dataset.transactions:
        for i in t.items:
            tally[i] += 1
    stats.db_scans += 1
    level = {(i,): c for i, c in enumerate(tally) if c >= min_support_count}

    k = 1
    while level:
        levels.append(dict(sorted(level.items())))
        k += 1
        candidates = _join(list(levels[-1]))
        if not candidates:
            break
        counts = _count(dataset, candidates, k)
        stats.db_scans += 1
        level = {c: n for c, n in counts.items() if n >= min_support_count}
    return FrequentItemsetTable(levels, min_support_count, stats)


def maximal_frequent(table: FrequentItemsetTable) -> PatternSet:
    """Entries of ``table`` not strictly contained in any other entry."""
    covered: set[tuple[int, ...]] = set()
    for level in table.levels[1:]:
        for itemset in level:
            # downward closure: checking the immediate subsets is enough
            for m in range(len(itemset)):
                covered.add(itemset[:m] + itemset[m + 1:])
    patterns = [
        Pattern(items, count)
        for items, count in table.entries()
        if items not in covered
    ]
    return PatternSet(patterns, "apriori", table.instrumentation)
