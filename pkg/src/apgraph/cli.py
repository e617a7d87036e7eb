"""Command line: ``apgraph preprocess | mine | bench | plot``.

Exit status is 0 on success, 1 for data-quality or benchmark failures and 2
for usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from fractions import Fraction

from . import bench as benchmod
from .apriori import apriori_mine, maximal_frequent
from .core import BasketFormatError, Thresholds, format_ratio, load_baskets
from .graph import frequent_items, graph_mine
from .plotting import plot_report
from .rules import generate_rules, support_cache
from .weblog import DEFAULT_BLOCKLIST, baskets_text, open_log, preprocess

log = logging.getLogger("apgraph")

OK, DATA_ERROR, USAGE_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _add_thresholds(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--min-support", type=_fraction, metavar="F",
                   help="minimum support as a fraction in (0, 1]")
    g.add_argument("--min-support-count", type=int, metavar="N",
                   help="minimum support as a transaction count")
    p.add_argument("--min-confidence", type=_fraction, default=Fraction(6, 10), metavar="F",
                   help="minimum rule confidence in [0, 1] (default 0.6)")


def _thresholds(args) -> Thresholds:
    try:
        return Thresholds(args.min_support, args.min_support_count, args.min_confidence)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="access log to session baskets")
    p.add_argument("--in", dest="input", required=True, help="Common Log Format file, may be gzipped")
    p.add_argument("--out", required=True, help="basket file to write")
    p.add_argument("--stats", help="stats sidecar (default: OUT.stats.json)")
    p.add_argument("--session-gap-min", type=float, default=30.0)
    p.add_argument("--block-suffix", action="append", metavar="SUFFIX",
                   help="path suffix to drop; repeatable, replaces the default list")
    p.add_argument("--strip-query", action="store_true", help="drop ?query from paths")

    p = sub.add_parser("mine", help="frequent patterns and rules from a basket file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--algorithm", choices=["apriori", "graph"], default="graph")
    _add_thresholds(p)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--patterns-out", required=True)
    p.add_argument("--rules-out", required=True)

    p = sub.add_parser("bench", help="time and memory of both miners")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input", nargs="+", metavar="BASKETS")
    src.add_argument("--synthetic", action="append", metavar="NxK",
                     help="N transactions over K items; repeatable")
    p.add_argument("--mean-len", type=float, default=8.0)
    p.add_argument("--skew", type=float, default=1.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithm", action="append", choices=list(benchmod.ALGORITHMS),
                   help="repeatable; default both")
    _add_thresholds(p)
    p.add_argument("--report", required=True, help="CSV to append rows to")
    p.add_argument("--discrepancies", help="TSV of differential findings (default: REPORT.diff.tsv)")
    p.add_argument("--plot-dir", help="also render time/memory figures here")
    p.add_argument("--no-memory", action="store_true", help="skip the memory measurement run")

    p = sub.add_parser("plot", help="render figures from a report CSV")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", required=True)
    return parser


def cmd_preprocess(args) -> int:
    blocklist = args.block_suffix if args.block_suffix is not None else DEFAULT_BLOCKLIST
    if args.session_gap_min <= 0:
        raise UsageError("--session-gap-min must be positive")
    try:
        with open_log(args.input) as f:
            sessions, stats = preprocess(f, blocklist, args.session_gap_min * 60, args.strip_query)
        stats.input_bytes = os.path.getsize(args.input)
        text = baskets_text(sessions)
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        stats.output_bytes = len(text.encode("utf-8"))
        with open(args.stats or args.out + ".stats.json", "w") as f:
            json.dump(stats.as_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        print(f"apgraph: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(json.dumps(stats.as_dict(), sort_keys=True), file=sys.stderr)
    if stats.lines_read and stats.parse_errors * 2 > stats.lines_read:
        print("apgraph: more than half the lines did not parse; is this a Common Log Format file?",
              file=sys.stderr)
        return DATA_ERROR
    return OK


def write_patterns(path, patterns, dataset, fmt) -> None:
    n = dataset.n
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if fmt == "json":
            out = [
                {"items": dataset.names(p.items), "count": p.count,
                 "support": float(format_ratio(p.count, n))}
                for p in patterns
            ]
            json.dump(out, f, indent=1)
            f.write("\n")
            return
        f.write("items\tcount\tsupport\n")
        for p in patterns:
            f.write(f"{','.join(dataset.names(p.items))}\t{p.count}\t{format_ratio(p.count, n)}\n")


def write_rules(path, rules, dataset, fmt) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if fmt == "json":
            out = [
                {"antecedent": dataset.names(r.antecedent),
                 "consequent": dataset.names(r.consequent),
                 "joint_count": r.joint_count,
                 "confidence": float(format_ratio(r.joint_count, r.antecedent_count))}
                for r in rules
            ]
            json.dump(out, f, indent=1)
            f.write("\n")
            return
        f.write("antecedent\tconsequent\tjoint_count\tconfidence\n")
        for r in rules:
            f.write(
                f"{','.join(dataset.names(r.antecedent))}\t{','.join(dataset.names(r.consequent))}"
                f"\t{r.joint_count}\t{format_ratio(r.joint_count, r.antecedent_count)}\n"
            )


def _load(path):
    try:
        with open(path, "rb") as f:
            return load_baskets(f)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except BasketFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_mine(args) -> int:
    thresholds = _thresholds(args)
    dataset = _load(args.input)
    count = thresholds.count_for(dataset.n)
    counts = support_cache(dataset)
    if args.algorithm == "graph":
        patterns = graph_mine(dataset, count)
        n_l1 = len(frequent_items(dataset, count))
    else:
        table = apriori_mine(dataset, count)
        patterns = maximal_frequent(table)
        counts.update(table.as_dict())
        n_l1 = len(table.levels[0]) if table.levels else 0
    rules = generate_rules(patterns, dataset, thresholds.min_confidence, counts)
    try:
        write_patterns(args.patterns_out, patterns, dataset, args.format)
        write_rules(args.rules_out, rules, dataset, args.format)
    except OSError as exc:
        print(f"apgraph: {exc}", file=sys.stderr)
        return USAGE_ERROR
    counters = " ".join(f"{k}={v}" for k, v in patterns.instrumentation.as_dict().items())
    print(
        f"n={dataset.n} min_count={count} L1={n_l1} patterns={len(patterns)} "
        f"rules={len(rules)} {counters}",
        file=sys.stderr,
    )
    return OK


def _parse_synthetic(spec: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", spec)
    if not m:
        raise UsageError(f"--synthetic expects NxK, got {spec!r}")
    return int(m[1]), int(m[2])


def cmd_bench(args) -> int:
    thresholds = _thresholds(args)
    datasets = []
    if args.input:
        for path in args.input:
            datasets.append((os.path.basename(path), _load(path)))
    else:
        for spec in args.synthetic:
            n, k = _parse_synthetic(spec)
            try:
                d = benchmod.generate_synthetic(n, k, args.mean_len, args.skew, args.seed)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            datasets.append((f"synthetic-{n}x{k}-s{args.seed}", d))
    algorithms = args.algorithm or list(benchmod.ALGORITHMS)
    report = benchmod.run_benchmark(datasets, thresholds, algorithms,
                                    measure_memory=not args.no_memory)
    try:
        benchmod.write_report(report, args.report)
        benchmod.write_discrepancies(report, args.discrepancies or args.report + ".diff.tsv")
        if args.plot_dir:
            plot_report(benchmod.read_report(args.report), args.plot_dir)
    except OSError as exc:
        print(f"apgraph: {exc}", file=sys.stderr)
        return USAGE_ERROR
    for row in report.rows:
        status = row.error or f"{row.wall_time_ms:.1f} ms, {row.n_patterns} patterns, {row.n_rules} rules"
        print(f"{row.dataset_label}\t{row.algorithm}\t{status}", file=sys.stderr)
    return DATA_ERROR if report.failed else OK


def cmd_plot(args) -> int:
    try:
        for path in plot_report(benchmod.read_report(args.report), args.out_dir):
            print(path)
    except OSError as exc:
        print(f"apgraph: {exc}", file=sys.stderr)
        return USAGE_ERROR
    return OK


COMMANDS = {"preprocess": cmd_preprocess, "mine": cmd_mine, "bench": cmd_bench, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"apgraph: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
