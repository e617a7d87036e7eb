"""Frequent pattern mining with Apriori-Graph and classic Apriori."""

from .apriori import FrequentItemsetTable, apriori_mine, maximal_frequent
from .core import (
    Dataset,
    Pattern,
    PatternSet,
    Thresholds,
    Transaction,
    dump_baskets,
    load_baskets,
    min_count,
    support_count,
)
from .graph import (
    FrequentItemOrder,
    WeightMatrix,
    build_cooccurrence,
    frequent_items,
    graph_mine,
    mine_patterns,
)
from .rules import Rule, confidence, generate_rules

__all__ = [
    "Dataset", "Transaction", "Thresholds", "Pattern", "PatternSet",
    "load_baskets", "dump_baskets", "min_count", "support_count",
    "FrequentItemsetTable", "apriori_mine", "maximal_frequent",
    "FrequentItemOrder", "WeightMatrix", "frequent_items", "build_cooccurrence",
    "mine_patterns", "graph_mine",
    "Rule", "confidence", "generate_rules",
]
__version__ = "0.1.0"
