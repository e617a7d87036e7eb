"""Transaction datasets, support counting and threshold arithmetic."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
import threading
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)
_cover_lock = threading.Lock()

Rational = Union[Fraction, int, float, str]


class BasketFormatError(ValueError):
    """Raised when a basket file cannot be decoded."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class Transaction(NamedTuple):
    tid: int
    items: frozenset


@dataclass(frozen=True)
class Dataset:
    """Immutable interned transaction database.

    Item ids are dense and assigned in order of first appearance, reading
    transactions in order and tokens left to right.
    """

    transactions: tuple[Transaction, ...]
    tokens: tuple[str, ...]
    index: dict = field(repr=False, compare=False)
    # per-item tally taken while interning, independent of support_count
    item_tally: tuple[int, ...] = field(repr=False, compare=False)
    _covers: list = field(default_factory=list, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.transactions)

    @property
    def n_items(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_transactions(cls, rows: Iterable[Iterable[str]]) -> "Dataset":
        index: dict[str, int] = {}
        tokens: list[str] = []
        tally: list[int] = []
        transactions = []
        for row in rows:
            ids = []
            for tok in row:
                i = index.get(tok)
                if i is None:
                    i = index[tok] = len(tokens)
                    tokens.append(tok)
                    tally.append(0)
                ids.append(i)
            items = frozenset(ids)
            if not items:
                continue
            for i in items:
                tally[i] += 1
            transactions.append(Transaction(len(transactions) + 1, items))
        return cls(tuple(transactions), tuple(tokens), index, tuple(tally))

    def ids(self, tokens: Iterable[str]) -> frozenset:
        """Map item tokens to ids; unknown tokens raise KeyError."""
        return frozenset(self.index[t] for t in tokens)

    def names(self, items: Iterable[int]) -> list[str]:
        """Tokens for ``items`` in canonical (ascending id) order."""
        return [self.tokens[i] for i in sorted(items)]

    def cover(self, item: int) -> int:
        """Bitset (bit ``tid - 1``) of the transactions containing ``item``."""
        if not self._covers:
            with _cover_lock:
                if not self._covers:
                    self._covers.extend(_build_covers(self))
        return self._covers[item]

    def __iter__(self) -> Iterator[frozenset]:
        for t in self.transactions:
            yield t.items

    def __len__(self) -> int:
        return len(self.transactions)


def _build_covers(dataset: Dataset) -> list[int]:
    n = dataset.n
    tids: list[list[int]] = [[] for _ in range(dataset.n_items)]
    for pos, t in enumerate(dataset.transactions):
        for i in t.items:
            tids[i].append(pos)
    covers = []
    for rows in tids:
        bits = np.zeros(n, dtype=bool)
        bits[rows] = True
        covers.append(int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little"))
    return covers


def load_baskets(source: Union[str, bytes, io.IOBase]) -> Dataset:
    """Parse a basket file: one whitespace-separated transaction per line.

    Blank lines and lines whose first non-blank character is ``#`` are
    skipped. ``source`` may be text, raw bytes, or an open file object.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BasketFormatError(
                f"invalid UTF-8 at byte offset {exc.start}", offset=exc.start
            ) from None
    return Dataset.from_transactions(_basket_rows(source))


def _basket_rows(text: str) -> Iterator[list[str]]:
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            if line:
                log.warning("line %d: no items, skipped", lineno)
            continue
        if stripped.startswith("#"):
            continue
        yield stripped.split()


def dump_baskets(dataset: Dataset) -> str:
    """Serialize ``dataset`` in basket-file form, items in id order."""
    lines = (" ".join(dataset.names(t)) + "\n" for t in dataset)
    return "".join(lines)


def as_fraction(value: Rational) -> Fraction:
    # floats go through str so 0.1 means one tenth, not its binary neighbour
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def min_count(fraction: Rational, n: int) -> int:
    """Smallest support count meeting ``fraction`` of ``n`` transactions, at least 1."""
    f = as_fraction(fraction)
    if not 0 < f <= 1:
        raise ValueError(f"support fraction must be in (0, 1], got {fraction}")
    if n < 0:
        raise ValueError(f"transaction count must be non-negative, got {n}")
    return max(1, math.ceil(f * n))


def at_least(num: int, den: int, threshold: Fraction) -> bool:
    """Exact ``num / den >= threshold`` by cross-multiplication."""
    return num * threshold.denominator >= threshold.numerator * den


@dataclass(frozen=True)
class Thresholds:
    min_support_fraction: Fraction | None = None
    min_support_count: int | None = None
    min_confidence: Fraction = Fraction(0)

    def __post_init__(self):
        if (self.min_support_fraction is None) == (self.min_support_count is None):
            raise ValueError("give exactly one of min_support_fraction, min_support_count")
        if self.min_support_fraction is not None:
            f = as_fraction(self.min_support_fraction)
            if not 0 < f <= 1:
                raise ValueError(f"support fraction must be in (0, 1], got {f}")
            object.__setattr__(self, "min_support_fraction", f)
        elif self.min_support_count < 1:
            raise ValueError(f"support count must be >= 1, got {self.min_support_count}")
        c = as_fraction(self.min_confidence)
        if not 0 <= c <= 1:
            raise ValueError(f"confidence must be in [0, 1], got {c}")
        object.__setattr__(self, "min_confidence", c)

    def count_for(self, n: int) -> int:
        if self.min_support_count is not None:
            return self.min_support_count
        return min_count(self.min_support_fraction, n)


def support_count(dataset: Dataset, itemset: Iterable[int]) -> int:
    """Number of transactions containing every item of ``itemset``."""
    items = frozenset(itemset)
    if not items:
        raise ValueError("support of the empty itemset is not defined here")
    bad = [i for i in items if not 0 <= i < dataset.n_items]
    if bad:
        raise ValueError(f"item ids not in dataset: {sorted(bad)}")
    it = iter(sorted(items, key=dataset.item_tally.__getitem__))
    bits = dataset.cover(next(it))
    for i in it:
        bits &= dataset.cover(i)
        if not bits:
            return 0
    return bits.bit_count()


def canonical(items: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(items))


def format_ratio(num: int, den: int) -> str:
    """Render ``num / den`` with 4 decimals; 0 when ``den`` is 0."""
    if den == 0:
        return "0.0000"
    return f"{num / den:.4f}"


def tokens_key(dataset: Dataset, items: Sequence[int]) -> str:
    return ",".join(dataset.names(items))


@dataclass(frozen=True)
class Pattern:
    items: tuple[int, ...]
    count: int

    def __post_init__(self):
        object.__setattr__(self, "items", canonical(self.items))


@dataclass
class Instrumentation:
    db_scans: int = 0
    dfs_calls: int = 0
    edge_visits: int = 0
    leaf_verifications: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "db_scans": self.db_scans,
            "dfs_calls": self.dfs_calls,
            "edge_visits": self.edge_visits,
            "leaf_verifications": self.leaf_verifications,
        }


@dataclass
class PatternSet:
    """Mined patterns in canonical order, tagged with the producing algorithm."""

    patterns: list[Pattern]
    provenance: str
    instrumentation: Instrumentation = field(default_factory=Instrumentation)

    def __post_init__(self):
        self.patterns = sorted(self.patterns, key=lambda p: p.items)

    def __iter__(self) -> Iterator[Pattern]:
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def itemsets(self) -> set[frozenset]:
        return {frozenset(p.items) for p in self.patterns}


def antichain(patterns: Iterable[Pattern]) -> list[Pattern]:
    """Drop duplicates and every pattern contained in another."""
    unique = {frozenset(p.items): p for p in patterns}
    keep = []
    # a set can only be contained in a strictly larger one
    by_size = sorted(unique, key=len, reverse=True)
    for i, s in enumerate(by_size):
        if not any(len(o) > len(s) and s < o for o in by_size[:i]):
            keep.append(unique[s])
    return keep
