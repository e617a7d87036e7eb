"""Time and memory curves from benchmark reports."""

from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

COLORS = {"apriori": "tab:red", "graph": "tab:blue"}
FIGSIZE = (5.0, 3.4)


def _series(rows, column):
    by_algo = defaultdict(list)
    for r in rows:
        if r.get("error") or r.get(column) in ("", None):
            continue
        by_algo[r["algorithm"]].append((int(r["n_transactions"]), float(r[column])))
    return {a: sorted(pts) for a, pts in by_algo.items()}


def _plot(rows, column, ylabel, scale, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for algo, pts in sorted(_series(rows, column).items()):
        xs = [x for x, _ in pts]
        ys = [y * scale for _, y in pts]
        ax.plot(xs, ys, marker="o", color=COLORS.get(algo), label=algo)
    ax.set_xlabel("transactions")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_report(rows: list[dict], out_dir) -> list[str]:
    """Write ``time.png`` and ``memory.png`` for report rows into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    written = [
        _plot(rows, "wall_time_ms", "wall time (s)", 1e-3, os.path.join(out_dir, "time.png"))
    ]
    if any(r.get("peak_memory_bytes") not in ("", None) for r in rows):
        written.append(
            _plot(rows, "peak_memory_bytes", "peak memory (MiB)", 1 / 2**20,
                  os.path.join(out_dir, "memory.png"))
        )
    return written
