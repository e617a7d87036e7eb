"""Acceptance criteria, one test each; results are summarised after the run."""

import os
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations

import pytest

from apgraph.apriori import apriori_mine
from apgraph.bench import generate_synthetic, run_benchmark
from apgraph.core import Dataset, Pattern, Thresholds
from apgraph.graph import build_cooccurrence, frequent_items, graph_mine, mine_patterns
from apgraph.rules import generate_rules
from apgraph.weblog import baskets_text, open_log, preprocess, to_dataset

from conftest import random_rows
from oracles import DATA, all_frequent, conf, pair_counts

RESULTS = {}

# the pair-count matrix as printed for the worked example
PUBLISHED_MATRIX = {
    ("Milk", "Butter"): 4, ("Milk", "Bread"): 4, ("Milk", "Beer"): 1, ("Milk", "Sugar"): 2,
    ("Butter", "Bread"): 3, ("Butter", "Beer"): 1, ("Butter", "Sugar"): 2,
    ("Bread", "Beer"): 0, ("Bread", "Sugar"): 1,
    ("Beer", "Sugar"): 0,
}


@contextmanager
def criterion(n, title):
    try:
        yield
    except BaseException:
        RESULTS[n] = ("FAIL", title)
        print(f"criterion {n}: FAIL  {title}")
        raise
    RESULTS[n] = ("PASS", title)
    print(f"criterion {n}: PASS  {title}")


def seeded_cases(count, seed):
    rng = random.Random(seed)
    return [(random_rows(rng), rng.randint(1, 4)) for _ in range(count)]


def test_criterion_1_worked_example_counts_and_matrix(fig4, fig4_rows):
    with criterion(1, "worked example: frequent items and pair-count matrix"):
        problems = []
        order = frequent_items(fig4, 2)
        got = dict(zip((fig4.tokens[i] for i in order.order), order.counts))
        if got != {"Milk": 6, "Butter": 7, "Bread": 6, "Beer": 2, "Sugar": 2}:
            problems.append(f"frequent item counts {got}")

        matrix = build_cooccurrence(fig4, order)
        brute = pair_counts(fig4_rows)
        agree, differ = [], {}
        for (a, b), published in PUBLISHED_MATRIX.items():
            pa, pb = order.position[fig4.index[a]], order.position[fig4.index[b]]
            w = matrix.weight(pa, pb)
            if w != brute.get(frozenset((a, b)), 0):
                problems.append(f"weight {a}-{b} = {w}, brute force {brute.get(frozenset((a, b)), 0)}")
            if w == published:
                agree.append((a, b))
            else:
                differ[(a, b)] = (w, published)
        if len(agree) != 8:
            problems.append(f"{len(agree)} cells agree with the published matrix, expected 8")
        # the printed matrix undercounts these two pairs; the data gives 4 and 2
        if differ != {("Butter", "Bread"): (4, 3), ("Butter", "Beer"): (2, 1)}:
            problems.append(f"divergent cells {differ}")

        names = [fig4.tokens[i] for i in order.order]
        if names != ["Milk", "Butter", "Bread", "Beer", "Sugar"]:
            problems.append(f"vertex order {names} (first appearance puts Sugar third)")
        assert not problems, "; ".join(problems)


def test_criterion_2_worked_example_patterns(fig4):
    with criterion(2, "worked example: graph patterns and transitivity break"):
        order = frequent_items(fig4, 2)
        trace = []
        ps = mine_patterns(fig4, order, build_cooccurrence(fig4, order), 2, trace=trace)
        got = {frozenset(fig4.names(p.items)): p.count for p in ps}
        assert got == {
            frozenset({"Milk", "Butter", "Bread"}): 2,
            frozenset({"Milk", "Butter", "Sugar"}): 2,
            frozenset({"Butter", "Beer"}): 2,
        }
        published = {frozenset({"Milk", "Butter", "Sugar"}), frozenset({"Milk", "Butter", "Bread"})}
        assert published < set(got)
        verdicts = {tuple(fig4.tokens[i] for i in path): (c, ok) for path, c, ok in trace}
        assert verdicts[("Milk", "Butter", "Beer")] == (1, False)


def test_criterion_3_worked_example_rules(fig4):
    with criterion(3, "worked example: rules from {Milk, Butter, Sugar}"):
        pattern = Pattern(tuple(fig4.ids(["Milk", "Butter", "Sugar"])), 2)
        rules = generate_rules([pattern], fig4, Fraction(3, 5))
        got = {(frozenset(fig4.names(r.antecedent)), frozenset(fig4.names(r.consequent))): r.confidence
               for r in rules}
        assert got == {
            (frozenset({"Milk", "Sugar"}), frozenset({"Butter"})): 1,
            (frozenset({"Butter", "Sugar"}), frozenset({"Milk"})): 1,
            (frozenset({"Sugar"}), frozenset({"Milk", "Butter"})): 1,
        }
        assert all(r.confidence == Fraction(1) for r in rules)
        assert all(r.confidence >= Fraction(3, 5) for r in rules)


def test_criterion_4_oracle_equivalence():
    with criterion(4, "apriori equals brute force; graph output sound and an antichain"):
        start = time.perf_counter()
        cases = seeded_cases(250, seed=20240)
        for rows, threshold in cases:
            d = Dataset.from_transactions(rows)
            expected = all_frequent([set(r) for r in rows], threshold)
            table = apriori_mine(d, threshold)
            assert {frozenset(d.names(k)): v for k, v in table.entries()} == expected
            sets = [frozenset(d.names(p.items)) for p in graph_mine(d, threshold)]
            assert all(s in expected for s in sets)
            assert not any(a <= b or b <= a for a, b in combinations(sets, 2))
        assert time.perf_counter() - start < 60


def test_criterion_5_two_construction_passes(fig4):
    with criterion(5, "graph miner makes exactly two construction passes"):
        runs = [graph_mine(fig4, c) for c in (1, 2, 3, 10)]
        for rows, threshold in seeded_cases(100, seed=5):
            runs.append(graph_mine(Dataset.from_transactions(rows), threshold))
        runs.append(graph_mine(generate_synthetic(2000, 50, 5, 1.2, 42), 100))
        assert all(r.instrumentation.db_scans == 2 for r in runs)
        # verification work is reported on its own counter
        assert sum(r.instrumentation.leaf_verifications for r in runs) > 0


def test_criterion_6_graph_faster_than_apriori():
    with criterion(6, "graph miner faster than apriori on 100k x 200 synthetic data"):
        d = generate_synthetic(100_000, 200, 8, 1.2, 42)
        th = Thresholds(min_support_fraction=Fraction(1, 100), min_confidence=Fraction(1, 2))
        report = run_benchmark([("synthetic-100000x200", d)], th, ["apriori", "graph"],
                               measure_memory=False)
        times = {r.algorithm: r.wall_time_ms for r in report.rows}
        for r in report.rows:
            print(f"  {r.algorithm}: {r.wall_time_ms / 1000:.2f} s, {r.n_patterns} patterns, "
                  f"{r.n_rules} rules, dfs_calls={r.dfs_calls}, leaf_verifications={r.leaf_verifications}")
        assert not report.failed
        assert times["apriori"] < 300_000 and times["graph"] < 300_000
        assert times["graph"] < times["apriori"]


def test_criterion_7_weblog_fixture(tmp_path):
    with criterion(7, "12-line access log preprocesses to the expected baskets"):
        assert len((DATA / "access.log").read_text().splitlines()) == 12
        with open_log(DATA / "access.log") as f:
            sessions, stats = preprocess(f)
        text = baskets_text(sessions)
        assert text.encode() == (DATA / "access.expected.baskets").read_bytes()
        assert stats.parse_errors == 0


@pytest.mark.skipif(not os.environ.get("APGRAPH_NASA_LOG"), reason="set APGRAPH_NASA_LOG to a NASA access log")
def test_nasa_smoke():
    """Not gating: shows what rules come out of a real NASA log at 5% / 50%."""
    with open_log(os.environ["APGRAPH_NASA_LOG"]) as f:
        sessions, stats = preprocess(f)
    d = to_dataset(sessions)
    th = Thresholds(min_support_fraction=Fraction(1, 20), min_confidence=Fraction(1, 2))
    ps = graph_mine(d, th.count_for(d.n))
    for r in generate_rules(ps, d, th.min_confidence):
        print(",".join(d.names(r.antecedent)), "->", ",".join(d.names(r.consequent)),
              f"{float(r.confidence):.1%}")
    print(stats.as_dict())


def test_criterion_8_confidence_arithmetic():
    with criterion(8, "stored confidences equal brute-force recomputation"):
        rng = random.Random(8)
        draws = 0
        while draws < 1000:
            rows = random_rows(rng, max_items=8, max_tx=30)
            d = Dataset.from_transactions(rows)
            sets = [set(r) for r in rows]
            frequent = [s for s in all_frequent(sets, 1) if len(s) >= 2]
            if not frequent:
                continue
            for _ in range(10):
                items = sorted(rng.choice(frequent))
                ante = rng.sample(items, rng.randint(1, len(items) - 1))
                pattern = Pattern(tuple(d.ids(items)), 0)
                rules = generate_rules([pattern], d, 0)
                (rule,) = [r for r in rules if frozenset(d.names(r.antecedent)) == frozenset(ante)]
                cons = [x for x in items if x not in ante]
                assert rule.confidence == conf(sets, ante, cons)
                draws += 1
