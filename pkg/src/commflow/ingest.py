"""Parsing and indexing of timestamped directed communication logs.

Two input shapes are accepted:

* whitespace triples, one record per line: ``sender receiver unix-seconds``
  (lines starting with ``#`` are treated as comments)
* CSV with a header row containing ``sender``, ``receiver`` and ``timestamp``
  columns (extra columns are ignored)

Timestamps are held as double-precision seconds. Events are sorted by
timestamp with input order preserved on ties, so downstream results are
deterministic. Self-loops (sender == receiver) stay in the log and are
counted in the parse report, but never appear in pair sequences.
"""

from __future__ import annotations

import gzip
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np

from .errors import InvalidPairError, ParseError

SKIPPED_LINES_KEPT = 50  # detail rows retained in the report; counts are exact


class Direction(str, Enum):
    """Direction of one event relative to the pair orientation (a, b)."""

    OUT = "out"  # a -> b
    IN = "in"    # b -> a


@dataclass(frozen=True)
class Event:
    sender: str
    receiver: str
    timestamp: float


@dataclass
class ParseReport:
    """Line-level accounting for one parse run."""

    lines_total: int = 0
    events: int = 0
    comments: int = 0
    blanks: int = 0
    self_loops: int = 0
    skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)
    skipped_lines: list = field(default_factory=list)  # first few (line_no, reason)
    entities: int = 0
    directed_pairs: int = 0
    unordered_pairs: int = 0
    t_min: float | None = None
    t_max: float | None = None

    @property
    def span_seconds(self) -> float:
        if self.t_min is None or self.t_max is None:
            return 0.0
        return self.t_max - self.t_min

    @property
    def span_days(self) -> int:
        """Whole days covered by the log (floor of the second span)."""
        return int(self.span_seconds // 86400)

    def to_json(self) -> dict:
        return {
            "lines_total": self.lines_total,
            "events": self.events,
            "comments": self.comments,
            "blanks": self.blanks,
            "self_loops": self.self_loops,
            "skipped": self.skipped,
            "skip_reasons": dict(self.skip_reasons),
            "skipped_lines": [
                {"line": n, "reason": r} for n, r in self.skipped_lines
            ],
            "entities": self.entities,
            "directed_pairs": self.directed_pairs,
            "unordered_pairs": self.unordered_pairs,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "span_seconds": self.span_seconds,
            "span_days": self.span_days,
        }

    def format_text(self) -> str:
        lines = [
            f"lines read:      {self.lines_total}",
            f"events parsed:   {self.events}",
            f"entities:        {self.entities}",
            f"directed pairs:  {self.directed_pairs}",
            f"unordered pairs: {self.unordered_pairs}",
            f"self-loops:      {self.self_loops}",
            f"comments/blanks: {self.comments}/{self.blanks}",
            f"skipped:         {self.skipped}",
        ]
        for reason, n in sorted(self.skip_reasons.items()):
            lines.append(f"  - {reason}: {n}")
        for line_no, reason in self.skipped_lines:
            lines.append(f"    line {line_no}: {reason}")
        if self.events:
            lines.append(
                f"time span:       {self.t_min:g} .. {self.t_max:g}"
                f" ({self.span_seconds:g} s, {self.span_days} days)"
            )
        return "\n".join(lines)


@dataclass
class PairSequence:
    """Direction-tagged events between two entities, oriented by ``a``.

    ``outgoing[i]`` is True when event i goes a -> b. Arrays are sorted by
    timestamp (ties keep log order).
    """

    a: str
    b: str
    times: np.ndarray
    outgoing: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    @property
    def events(self) -> list[tuple[float, Direction]]:
        return [
            (float(t), Direction.OUT if o else Direction.IN)
            for t, o in zip(self.times, self.outgoing)
        ]

    @property
    def times_out(self) -> np.ndarray:
        return self.times[self.outgoing]

    @property
    def times_in(self) -> np.ndarray:
        return self.times[~self.outgoing]

    @property
    def n_out(self) -> int:
        return int(np.count_nonzero(self.outgoing))

    @property
    def n_in(self) -> int:
        return len(self.times) - self.n_out

    def flipped(self) -> "PairSequence":
        """The same events oriented from ``b``'s point of view."""
        return PairSequence(self.b, self.a, self.times, ~self.outgoing)


class EventLog:
    """Immutable, time-sorted event collection with pair indexes.

    Construction is the only mutation; afterwards any number of analysis
    tasks may read concurrently.
    """

    def __init__(self, events: Iterable[Event]):
        rows = list(events)
        times = np.asarray([e.timestamp for e in rows], dtype=np.float64)
        order = np.argsort(times, kind="stable")

        self.entity_index: dict[str, int] = {}
        self.entities: list[str] = []
        n = len(rows)
        self.times = np.empty(n, dtype=np.float64)
        self.senders = np.empty(n, dtype=np.int64)
        self.receivers = np.empty(n, dtype=np.int64)
        # canonical pair key: (u, v) with u <= v lexicographically
        self.pair_index: dict[tuple[str, str], list[int]] = {}
        self.pair_rows: dict[tuple[str, str], list[int]] = {}
        self.self_loop_count = 0

        def handle(token: str) -> int:
            h = self.entity_index.get(token)
            if h is None:
                h = len(self.entities)
                self.entity_index[token] = h
                self.entities.append(token)
            return h

        for i, j in enumerate(order):
            e = rows[j]
            self.times[i] = e.timestamp
            self.senders[i] = handle(e.sender)
            self.receivers[i] = handle(e.receiver)
            if e.sender == e.receiver:
                self.self_loop_count += 1
                continue
            key = (e.sender, e.receiver) if e.sender <= e.receiver else (e.receiver, e.sender)
            counts = self.pair_index.get(key)
            if counts is None:
                counts = [0, 0]
                self.pair_index[key] = counts
                self.pair_rows[key] = []
            counts[0 if e.sender == key[0] else 1] += 1
            self.pair_rows[key].append(i)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def events(self) -> list[Event]:
        return list(self.iter_events())

    def iter_events(self) -> Iterator[Event]:
        for i in range(len(self.times)):
            yield Event(
                self.entities[self.senders[i]],
                self.entities[self.receivers[i]],
                float(self.times[i]),
            )

    @property
    def span(self) -> tuple[float, float]:
        if len(self.times) == 0:
            return (0.0, 0.0)
        return (float(self.times[0]), float(self.times[-1]))

    def pair_sequence(self, a: str, b: str) -> PairSequence:
        """All events with endpoints {a, b}, direction-tagged relative to a."""
        a, b = str(a), str(b)
        if a == b:
            raise InvalidPairError(f"pair endpoints must differ, got {a!r} twice")
        key = (a, b) if a <= b else (b, a)
        rows = self.pair_rows.get(key)
        if not rows:
            return PairSequence(a, b, np.empty(0), np.zeros(0, dtype=bool))
        idx = np.asarray(rows, dtype=np.intp)
        a_handle = self.entity_index.get(a, -1)
        return PairSequence(a, b, self.times[idx], self.senders[idx] == a_handle)

    def pair_counts(self, a: str, b: str) -> tuple[int, int]:
        """(a->b, b->a) message counts for the pair {a, b}."""
        a, b = str(a), str(b)
        if a == b:
            raise InvalidPairError(f"pair endpoints must differ, got {a!r} twice")
        key = (a, b) if a <= b else (b, a)
        c = self.pair_index.get(key, (0, 0))
        return (c[0], c[1]) if a == key[0] else (c[1], c[0])

    def list_pairs(self, min_messages: int = 1) -> list[tuple[tuple[str, str], int, int]]:
        """Unordered pairs with >= min_messages total, busiest first.

        Each entry is ((a, b), count_ab, count_ba) with a the lexicographically
        smaller id; ties on total count break on the pair id.
        """
        if min_messages < 1:
            raise ValueError("min_messages must be >= 1")
        out = [
            (key, c[0], c[1])
            for key, c in self.pair_index.items()
            if c[0] + c[1] >= min_messages
        ]
        out.sort(key=lambda r: (-(r[1] + r[2]), r[0]))
        return out

    def to_text(self, stream: TextIO) -> None:
        """Write the log as whitespace triples; re-parsing restores it exactly."""
        for i in range(len(self.times)):
            t = self.times[i]
            ts = str(int(t)) if float(t).is_integer() else repr(float(t))
            stream.write(
                f"{self.entities[self.senders[i]]} {self.entities[self.receivers[i]]} {ts}\n"
            )


def _parse_whitespace(lines: list[str], strict: bool, report: ParseReport) -> list[Event]:
    events = []
    for line_no, line in enumerate(lines, start=1):
        report.lines_total += 1
        stripped = line.strip()
        if not stripped:
            report.blanks += 1
            continue
        if stripped.startswith("#"):
            report.comments += 1
            continue
        parts = stripped.split()
        if len(parts) != 3:
            _skip(report, line_no, "wrong field count", strict)
            continue
        t = _timestamp(parts[2])
        if t is None:
            _skip(report, line_no, "malformed timestamp", strict)
            continue
        events.append(Event(parts[0], parts[1], t))
    return events


def _parse_csv(lines: list[str], strict: bool, report: ParseReport) -> list[Event]:
    import csv

    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        return []
    report.lines_total += 1
    cols = {name.strip().lower(): i for i, name in enumerate(header)}
    try:
        i_s, i_r, i_t = cols["sender"], cols["receiver"], cols["timestamp"]
    except KeyError as missing:
        raise ParseError(1, f"header lacks column {missing}") from None

    needed = max(i_s, i_r, i_t) + 1
    events = []
    for line_no, row in enumerate(reader, start=2):
        report.lines_total += 1
        if not row or all(not c.strip() for c in row):
            report.blanks += 1
            continue
        if len(row) < needed:
            _skip(report, line_no, "wrong field count", strict)
            continue
        t = _timestamp(row[i_t].strip())
        if t is None:
            _skip(report, line_no, "malformed timestamp", strict)
            continue
        events.append(Event(row[i_s].strip(), row[i_r].strip(), t))
    return events


def _timestamp(token: str) -> float | None:
    try:
        t = float(token)
    except ValueError:
        return None
    return t if math.isfinite(t) else None


def _skip(report: ParseReport, line_no: int, reason: str, strict: bool) -> None:
    if strict:
        raise ParseError(line_no, reason)
    report.skipped += 1
    report.skip_reasons[reason] += 1
    if len(report.skipped_lines) < SKIPPED_LINES_KEPT:
        report.skipped_lines.append((line_no, reason))


def parse_events(
    stream: TextIO | str,
    fmt: str = "auto",
    strict: bool = False,
) -> tuple[EventLog, ParseReport]:
    """Parse a character stream into an `EventLog` plus its `ParseReport`.

    fmt is "whitespace", "csv", or "auto" (csv when the first content line
    contains a comma). In strict mode the first malformed record raises
    `ParseError` with its line number; otherwise bad records are skipped
    and reported. Empty input yields an empty log.
    """
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.splitlines()
    if fmt == "auto":
        first = next((l for l in lines if l.strip() and not l.startswith("#")), "")
        fmt = "csv" if "," in first else "whitespace"
    report = ParseReport()
    if fmt == "csv":
        events = _parse_csv(lines, strict, report)
    elif fmt == "whitespace":
        events = _parse_whitespace(lines, strict, report)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    log = EventLog(events)
    report.events = len(log)
    report.self_loops = log.self_loop_count
    report.entities = len(log.entities)
    report.unordered_pairs = len(log.pair_index)
    directed = set()
    for i in range(len(log)):
        directed.add((int(log.senders[i]), int(log.receivers[i])))
    report.directed_pairs = len(directed)
    if len(log):
        report.t_min, report.t_max = log.span
    return log, report


def load_events(
    path: str | Path,
    fmt: str = "auto",
    strict: bool = False,
) -> tuple[EventLog, ParseReport]:
    """Parse a log file; ``.gz`` paths are transparently decompressed."""
    path = Path(path)
    if path.suffix == ".gz":
        opener = lambda: gzip.open(path, "rt", encoding="utf-8")
        if fmt == "auto":
            fmt = "csv" if path.name.endswith(".csv.gz") else "auto"
    else:
        opener = lambda: open(path, "r", encoding="utf-8")
        if fmt == "auto" and path.suffix == ".csv":
            fmt = "csv"
    with opener() as f:
        return parse_events(f, fmt=fmt, strict=strict)


def pair_sequence(log: EventLog, a: str, b: str) -> PairSequence:
    return log.pair_sequence(a, b)


def list_pairs(log: EventLog, min_messages: int = 1):
    return log.list_pairs(min_messages)
