"""Web access log preprocessing: Common Log Format in, session baskets out."""

from __future__ import annotations

import gzip
import io
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Iterator

from .core import Dataset

DEFAULT_BLOCKLIST = (".gif", ".xbm", ".xmb", ".ico")
DEFAULT_GAP = 30 * 60

LINE_RE = re.compile(
    r'^(?P<host>\S+) (?P<ident>\S+) (?P<user>\S+) \[(?P<time>[^\]]+)\] '
    r'"(?P<request>[^"]*)" (?P<status>\d{3}) (?P<bytes>\S+)\s*$'
)
TIME_RE = re.compile(
    r"^(\d{2})/([A-Za-z]{3})/(\d{4}):(\d{2}):(\d{2}):(\d{2}) ([+-])(\d{2})(\d{2})$"
)
MONTHS = {
    m: i + 1
    for i, m in enumerate(
        ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]
    )
}


class LogParseError(ValueError):
    def __init__(self, message: str, line: str):
        super().__init__(f"{message}: {line[:120]!r}")
        self.line = line


@dataclass(frozen=True)
class LogRecord:
    host: str
    timestamp: int
    method: str
    path: str
    status: int
    bytes: int | None = None


@dataclass
class Session:
    host: str
    start: int
    end: int
    pages: list[str] = field(default_factory=list)


@dataclass
class PreprocessStats:
    lines_read: int = 0
    parse_errors: int = 0
    records_kept: int = 0
    sessions_emitted: int = 0
    input_bytes: int = 0
    output_bytes: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


def parse_timestamp(text: str) -> int:
    """``01/Jul/1995:00:00:01 -0400`` to epoch seconds (UTC)."""
    m = TIME_RE.match(text)
    if not m:
        raise ValueError(f"bad timestamp {text!r}")
    day, mon, year, hh, mm, ss, sign, oh, om = m.groups()
    month = MONTHS.get(mon.lower())
    if month is None:
        raise ValueError(f"bad month {mon!r}")
    offset = timedelta(hours=int(oh), minutes=int(om))
    tz = timezone(offset if sign == "+" else -offset)
    dt = datetime(int(year), month, int(day), int(hh), int(mm), int(ss), tzinfo=tz)
    return int(dt.timestamp())


def parse_log_line(line: str) -> LogRecord:
    m = LINE_RE.match(line)
    if not m:
        raise LogParseError("not a Common Log Format line", line)
    parts = m["request"].split()
    if len(parts) < 2:
        raise LogParseError("request lacks method or path", line)
    status = int(m["status"])
    if not 100 <= status <= 599:
        raise LogParseError("status out of range", line)
    size = m["bytes"]
    if size == "-":
        nbytes = None
    elif size.isdigit():
        nbytes = int(size)
    else:
        raise LogParseError("bad byte count", line)
    try:
        ts = parse_timestamp(m["time"])
    except ValueError as exc:
        raise LogParseError(str(exc), line) from None
    return LogRecord(m["host"], ts, parts[0], parts[1], status, nbytes)


def parse_log(lines: Iterable[str], stats: PreprocessStats | None = None) -> Iterator[LogRecord]:
    """Parse lines, counting and skipping the ones that do not parse."""
    if stats is None:
        stats = PreprocessStats()
    for line in lines:
        line = line.rstrip("\r\n")
        if not line:
            continue
        stats.lines_read += 1
        try:
            yield parse_log_line(line)
        except LogParseError:
            stats.parse_errors += 1


def open_log(path) -> IO[str]:
    """Open a log as text, transparently gunzipping by magic bytes."""
    raw = open(path, "rb")
    if raw.peek(2)[:2] == b"\x1f\x8b":
        raw = gzip.GzipFile(fileobj=raw)
    return io.TextIOWrapper(raw, encoding="utf-8", errors="replace", newline="")


def clean(
    records: Iterable[LogRecord],
    blocked_suffixes: Iterable[str] = DEFAULT_BLOCKLIST,
    strip_query: bool = False,
) -> Iterator[LogRecord]:
    """Keep successful (200) page requests whose path has no blocked suffix."""
    suffixes = tuple(s.lower() for s in blocked_suffixes)
    for r in records:
        if r.status != 200:
            continue
        path = r.path
        if strip_query:
            path = path.split("?", 1)[0] or "/"
        if suffixes and path.lower().endswith(suffixes):
            continue
        if path != r.path:
            r = LogRecord(r.host, r.timestamp, r.method, path, r.status, r.bytes)
        yield r


def sessionize(records: Iterable[LogRecord], gap: float = DEFAULT_GAP) -> list[Session]:
    """Split each host's requests on idle gaps longer than ``gap`` seconds.

    Consecutive repeats of a path (refreshes) collapse, and each session
    keeps its distinct pages in first-seen order. Sessions come back
    sorted by host, then start time.
    """
    by_host: dict[str, list[LogRecord]] = {}
    for r in records:
        by_host.setdefault(r.host, []).append(r)

    sessions = []
    for host in sorted(by_host):
        hits = sorted(by_host[host], key=lambda r: r.timestamp)
        current = None
        last_path = None
        for r in hits:
            if current is None or r.timestamp - current.end > gap:
                current = Session(host, r.timestamp, r.timestamp)
                sessions.append(current)
                last_path = None
            current.end = r.timestamp
            if r.path == last_path:
                continue
            last_path = r.path
            if r.path not in current.pages:
                current.pages.append(r.path)
    return sessions


def to_dataset(sessions: Iterable[Session]) -> Dataset:
    return Dataset.from_transactions(s.pages for s in sessions)


def baskets_text(sessions: Iterable[Session]) -> str:
    """Basket file with one line per session, pages in first-seen order."""
    return "".join(" ".join(s.pages) + "\n" for s in sessions)


def preprocess(
    lines: Iterable[str],
    blocked_suffixes: Iterable[str] = DEFAULT_BLOCKLIST,
    gap: float = DEFAULT_GAP,
    strip_query: bool = False,
) -> tuple[list[Session], PreprocessStats]:
    stats = PreprocessStats()
    kept = []
    for r in clean(parse_log(lines, stats), blocked_suffixes, strip_query):
        kept.append(r)
    stats.records_kept = len(kept)
    sessions = sessionize(kept, gap)
    stats.sessions_emitted = len(sessions)
    return sessions, stats
