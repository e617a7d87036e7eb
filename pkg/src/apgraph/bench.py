"""Benchmark harness: both miners over the same datasets, timed and memory-profiled."""

from __future__ import annotations

import csv
import gc
import logging
import os
import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .apriori import apriori_mine, maximal_frequent
from .core import Dataset, PatternSet, Thresholds, dump_baskets, support_count
from .graph import graph_mine
from .rules import generate_rules, support_cache

log = logging.getLogger(__name__)

ALGORITHMS = ("apriori", "graph")
MEMORY_METRIC = "tracemalloc-peak-bytes (separate untimed run)"
CLOCK = "time.perf_counter"

REPORT_COLUMNS = [
    "dataset_label",
    "n_transactions",
    "input_bytes",
    "algorithm",
    "wall_time_ms",
    "peak_memory_bytes",
    "n_patterns",
    "n_rules",
    "db_scans",
    "dfs_calls",
    "edge_visits",
    "leaf_verifications",
    "error",
]


def generate_synthetic(
    n_transactions: int,
    n_items: int,
    mean_length: float,
    skew: float,
    seed: int,
) -> Dataset:
    """Seeded power-law basket data.

    Item ``i`` (0-based) has popularity weight ``(i + 1) ** -skew``.
    Each transaction length is ``1 + Poisson(mean_length - 1)`` clipped to
    ``n_items``; its items are a weighted sample without replacement, drawn
    with the Gumbel top-k trick from a numpy PCG64 stream seeded by ``seed``.
    Tokens are ``i0 .. i{n_items-1}``.
    """
    if n_transactions < 0:
        raise ValueError("n_transactions must be >= 0")
    if n_items < 1:
        raise ValueError("n_items must be >= 1")
    if not 1 <= mean_length <= n_items:
        raise ValueError("mean_length must be in [1, n_items]")
    if skew <= 0:
        raise ValueError("skew must be positive")

    rng = np.random.Generator(np.random.PCG64(seed))
    log_w = -skew * np.log(np.arange(1, n_items + 1, dtype=float))
    lengths = np.minimum(1 + rng.poisson(mean_length - 1, n_transactions), n_items)
    tokens = [f"i{k}" for k in range(n_items)]
    rows = []
    chunk = 8192
    for start in range(0, n_transactions, chunk):
        stop = min(start + chunk, n_transactions)
        keys = log_w + rng.gumbel(size=(stop - start, n_items))
        ranked = np.argsort(-keys, axis=1, kind="stable")
        for row, length in zip(ranked, lengths[start:stop]):
            rows.append([tokens[k] for k in row[:length]])
    return Dataset.from_transactions(rows)


def mine(dataset: Dataset, algorithm: str, thresholds: Thresholds):
    """Full pipeline for one algorithm: patterns, then rules."""
    count = thresholds.count_for(dataset.n)
    counts = support_cache(dataset)
    if algorithm == "graph":
        patterns = graph_mine(dataset, count)
    elif algorithm == "apriori":
        table = apriori_mine(dataset, count)
        patterns = maximal_frequent(table)
        counts.update(table.as_dict())
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    rules = generate_rules(patterns, dataset, thresholds.min_confidence, counts)
    return patterns, rules


@dataclass
class BenchRow:
    dataset_label: str
    n_transactions: int
    input_bytes: int
    algorithm: str
    wall_time_ms: float | None = None
    peak_memory_bytes: int | None = None
    n_patterns: int | None = None
    n_rules: int | None = None
    db_scans: int | None = None
    dfs_calls: int | None = None
    edge_visits: int | None = None
    leaf_verifications: int | None = None
    error: str = ""

    def as_row(self) -> dict:
        out = {}
        for col in REPORT_COLUMNS:
            value = getattr(self, col)
            if isinstance(value, float):
                value = f"{value:.3f}"
            out[col] = "" if value is None else value
        return out


@dataclass
class Discrepancy:
    dataset_label: str
    kind: str  # "missed": maximal frequent, absent from graph output; "unsound": graph pattern not frequent
    items: tuple[int, ...]
    count: int


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    discrepancies: list[Discrepancy] = field(default_factory=list)
    datasets: dict[str, Dataset] = field(default_factory=dict, repr=False)
    memory_metric: str = MEMORY_METRIC

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.rows)


def _timed(dataset, algorithm, thresholds):
    gc.collect()
    start = time.perf_counter()
    patterns, rules = mine(dataset, algorithm, thresholds)
    return (time.perf_counter() - start) * 1000.0, patterns, rules


def _peak_memory(dataset, algorithm, thresholds) -> int:
    gc.collect()
    tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        mine(dataset, algorithm, thresholds)
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def differential(label: str, dataset: Dataset, graph: PatternSet, apriori_table) -> list[Discrepancy]:
    """Graph patterns that are not frequent, and maximal itemsets the graph missed."""
    frequent = apriori_table.as_dict()
    out = []
    for p in graph:
        if frozenset(p.items) not in frequent:
            out.append(Discrepancy(label, "unsound", p.items, support_count(dataset, p.items)))
    found = graph.itemsets()
    for p in maximal_frequent(apriori_table):
        # singletons are never emitted by the graph miner
        if len(p.items) >= 2 and frozenset(p.items) not in found:
            out.append(Discrepancy(label, "missed", p.items, p.count))
    return out


def run_benchmark(
    datasets: Sequence[tuple[str, Dataset]],
    thresholds: Thresholds,
    algorithms: Sequence[str] = ALGORITHMS,
    measure_memory: bool = True,
) -> BenchReport:
    """Run every (dataset, algorithm) cell sequentially and collect a report."""
    if not datasets or not algorithms:
        raise ValueError("need at least one dataset and one algorithm")
    report = BenchReport()
    for label, dataset in datasets:
        report.datasets[label] = dataset
        size = len(dump_baskets(dataset).encode("utf-8"))
        results = {}
        for algorithm in algorithms:
            row = BenchRow(label, dataset.n, size, algorithm)
            report.rows.append(row)
            try:
                ms, patterns, rules = _timed(dataset, algorithm, thresholds)
                if measure_memory:
                    row.peak_memory_bytes = _peak_memory(dataset, algorithm, thresholds)
            except Exception as exc:  # a failed cell must not stop the run
                log.exception("%s/%s failed", label, algorithm)
                row.error = f"{type(exc).__name__}: {exc}"
                continue
            row.wall_time_ms = ms
            row.n_patterns = len(patterns)
            row.n_rules = len(rules)
            for k, v in patterns.instrumentation.as_dict().items():
                setattr(row, k, v)
            results[algorithm] = patterns
        if "graph" in results:
            table = apriori_mine(dataset, thresholds.count_for(dataset.n))
            report.discrepancies.extend(differential(label, dataset, results["graph"], table))
    return report


def write_report(report: BenchReport, path) -> None:
    """Append rows to the CSV at ``path``, writing the header block once."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as f:
        if fresh:
            f.write(f"# memory_metric={report.memory_metric}; clock={CLOCK}\n")
        w = csv.DictWriter(f, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        if fresh:
            w.writeheader()
        for row in report.rows:
            w.writerow(row.as_row())


def read_report(path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def write_discrepancies(report: BenchReport, path) -> None:
    with open(path, "w", newline="") as f:
        f.write("dataset_label\tkind\titems\tcount\n")
        for d in report.discrepancies:
            names = ",".join(report.datasets[d.dataset_label].names(d.items))
            f.write(f"{d.dataset_label}\t{d.kind}\t{names}\t{d.count}\n")
