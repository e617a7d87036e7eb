"""Apriori-Graph miner.

Two passes over the data build the frequent items and their pairwise
co-occurrence matrix. Patterns are then proposed by a forward-only depth
first search over matrix edges that clear the support count, and each leaf
path is verified against the data before it is accepted.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import Dataset, Instrumentation, Pattern, PatternSet, antichain


@dataclass(frozen=True)
class FrequentItemOrder:
    """Frequent items (the graph's vertices) in canonical order with their counts."""

    order: tuple[int, ...]
    counts: tuple[int, ...]
    position: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if not self.position:
            self.position.update((item, p) for p, item in enumerate(self.order))

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class WeightMatrix:
    """Upper-triangular pair counts indexed by position in a FrequentItemOrder."""

    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def weight(self, a: int, b: int) -> int:
        """Pair count for positions ``a`` and ``b`` in either order."""
        if a > b:
            a, b = b, a
        return int(self.weights[a, b])


def frequent_items(dataset: Dataset, min_support_count: int) -> FrequentItemOrder:
    """First pass: items with support >= threshold, in first-appearance order."""
    if min_support_count < 1:
        raise ValueError(f"min_support_count must be >= 1, got {min_support_count}")
    tally = [0] * dataset.n_items
    for t in dataset.transactions:
        for i in t.items:
            tally[i] += 1
    # ids are interned by first appearance, so ascending id is that order
    order = tuple(i for i, c in enumerate(tally) if c >= min_support_count)
    return FrequentItemOrder(order, tuple(tally[i] for i in order))


def build_cooccurrence(dataset: Dataset, order: FrequentItemOrder) -> WeightMatrix:
    """Second pass: count every pair of frequent items sharing a transaction."""
    dim = len(order)
    flat = [0] * (dim * dim)
    position = order.position
    for t in dataset.transactions:
        ps = sorted(position[i] for i in t.items if i in position)
        for a, b in combinations(ps, 2):
            flat[a * dim + b] += 1
    weights = np.array(flat, dtype=np.int64).reshape(dim, dim)
    return WeightMatrix(weights)


class _Search:
    """Depth-first search over forward edges whose weight clears the threshold.

    The set of transactions containing the current path is carried down as
    a bitset, so verifying a leaf is a popcount rather than a fresh scan.
    """

    def __init__(self, dataset, order, matrix, min_support_count, stats, trace=None):
        self.dataset = dataset
        self.trace = trace
        self.order = order.order
        self.threshold = min_support_count
        self.stats = stats
        self.patterns: list[Pattern] = []
        # holders[p]: bitmask over accepted patterns containing position p
        self.holders = [0] * matrix.dim
        self.n_accepted = 0
        dim = matrix.dim
        rows = matrix.weights.tolist()
        self.children = [
            [w for w in range(v + 1, dim) if rows[v][w] >= min_support_count]
            for v in range(dim)
        ]
        self.covers = [dataset.cover(i) for i in self.order]
        self.dim = dim

    def run(self, root: int) -> None:
        stats = self.stats
        children = self.children
        covers = self.covers
        path = [root]
        on_path = {root}
        # frames: [vertex, bits, next child index, children extended so far]
        stack = [[root, covers[root], 0, 0]]
        stats.dfs_calls += 1
        stats.edge_visits += self.dim - root - 1
        while stack:
            frame = stack[-1]
            v, bits, k, extended = frame
            kids = children[v]
            if k < len(kids):
                w = kids[k]
                frame[2] = k + 1
                if w in on_path:
                    continue
                frame[3] = extended + 1
                path.append(w)
                on_path.add(w)
                stack.append([w, bits & covers[w], 0, 0])
                stats.dfs_calls += 1
                stats.edge_visits += self.dim - w - 1
                continue
            if extended == 0 and len(path) >= 2:
                self.leaf(path, bits)
            stack.pop()
            on_path.discard(path.pop())

    def leaf(self, path: list[int], bits: int) -> None:
        holders = self.holders
        mask = holders[path[0]]
        for p in path[1:]:
            if not mask:
                break
            mask &= holders[p]
        if mask:
            return  # already inside an accepted pattern
        self.stats.leaf_verifications += 1
        count = bits.bit_count()
        if self.trace is not None:
            self.trace.append((tuple(self.order[p] for p in path), count, count >= self.threshold))
        if count >= self.threshold:
            flag = 1 << self.n_accepted
            self.n_accepted += 1
            for p in path:
                holders[p] |= flag
            self.patterns.append(Pattern(tuple(self.order[p] for p in path), count))


def mine_patterns(
    dataset: Dataset,
    order: FrequentItemOrder,
    matrix: WeightMatrix,
    min_support_count: int,
    workers: int = 1,
    trace: list | None = None,
) -> PatternSet:
    """Search the weight graph from every vertex and return verified maximal paths.

    With ``workers > 1`` each root is searched independently without the
    shared redundancy check; the final antichain filter makes the result
    identical to the sequential run. If ``trace`` is a list, each verified
    leaf is appended to it as ``(item ids in path order, count, accepted)``.
    """
    if min_support_count < 1:
        raise ValueError(f"min_support_count must be >= 1, got {min_support_count}")
    if matrix.dim != len(order):
        raise ValueError("matrix does not match the frequent item order")
    stats = Instrumentation(db_scans=2)
    roots = range(len(order))
    if workers <= 1:
        search = _Search(dataset, order, matrix, min_support_count, stats, trace)
        for root in roots:
            search.run(root)
        found = search.patterns
    else:
        def one(root):
            s = _Search(dataset, order, matrix, min_support_count, Instrumentation(),
                        None if trace is None else [])
            s.run(root)
            return s

        with ThreadPoolExecutor(max_workers=workers) as pool:
            searches = list(pool.map(one, roots))
        found = []
        for s in searches:
            found.extend(s.patterns)
            stats.dfs_calls += s.stats.dfs_calls
            stats.edge_visits += s.stats.edge_visits
            stats.leaf_verifications += s.stats.leaf_verifications
            if trace is not None:
                trace.extend(s.trace)
    return PatternSet(antichain(found), "graph", stats)


def graph_mine(dataset: Dataset, min_support_count: int, workers: int = 1) -> PatternSet:
    """Both construction passes followed by the graph search."""
    order = frequent_items(dataset, min_support_count)
    matrix = build_cooccurrence(dataset, order)
    return mine_patterns(dataset, order, matrix, min_support_count, workers=workers)
