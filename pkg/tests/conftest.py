import random
import sys

import pytest

from apgraph import Dataset, load_baskets

from oracles import DATA, read_rows


@pytest.fixture
def fig4():
    return load_baskets((DATA / "fig4.baskets").read_bytes())


@pytest.fixture
def fig4_rows():
    return read_rows(DATA / "fig4.baskets")


def random_rows(rng: random.Random, max_items=12, max_tx=40):
    n_items = rng.randint(1, max_items)
    n_tx = rng.randint(0, max_tx)
    items = [f"x{i}" for i in range(n_items)]
    rows = []
    for _ in range(n_tx):
        k = rng.randint(1, n_items)
        rows.append(rng.sample(items, k))
    return rows


def dataset_from(rows):
    return Dataset.from_transactions(rows)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        status, title = results[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
