"""Readers for recorded profiling data.

Two CSV layouts are understood, one concern per file::

    timestamp_ns,vaddr,tier,weight      # sampled demand-load misses
    timestamp_ns,event,value,phase      # counter stream, one row per event per interval

Addresses may be hex (``0x`` prefix) or decimal. Files ending in ``.gz``
are decompressed transparently.
"""

from __future__ import annotations

import csv
import gzip
import io
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, TextIO

from .model import PhaseProfile, ValidationError

TIERS = ("local", "remote")
SAMPLE_HEADER = ("timestamp_ns", "vaddr", "tier", "weight")
COUNTER_HEADER = ("timestamp_ns", "event", "value", "phase")
DEFAULT_INTERVAL_S = 1.0


class ParseError(ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f"row {row}" + (f", column {column}" if column else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class AccessSample:
    timestamp_ns: int
    virtual_address: int
    tier: str
    weight: int = 1


@dataclass(frozen=True)
class CounterRecord:
    timestamp_ns: int
    event: str
    value: int
    phase_tag: str = ""


@dataclass(frozen=True)
class PageHistogram:
    page_size_bytes: int
    counts: Mapping[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)


def open_text(path: str | Path) -> TextIO:
    """Open a record file as text, gunzipping ``*.gz``."""
    path = Path(path)
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def _rows(stream: TextIO | str, header: tuple[str, ...]):
    if isinstance(stream, str):
        stream = io.StringIO(stream, newline="")
    reader = csv.reader(stream)
    first = next(reader, None)
    if first is None:
        return
    if tuple(c.strip() for c in first) != header:
        raise ParseError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", row=0)
    for n, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=n)
        yield n, [c.strip() for c in row]


def _int(text: str, row: int, column: str, *, minimum: int | None = None, hex_ok: bool = False) -> int:
    try:
        value = int(text, 0) if hex_ok and text.lower().startswith(("0x", "-0x")) else int(text)
    except ValueError:
        raise ParseError(f"not an integer: {text!r}", row, column) from None
    if minimum is not None and value < minimum:
        raise ParseError(f"must be >= {minimum}, got {value}", row, column)
    return value


def parse_access_samples(stream: TextIO | str) -> list[AccessSample]:
    samples = []
    for n, (ts, vaddr, tier, weight) in _rows(stream, SAMPLE_HEADER):
        if tier not in TIERS:
            raise ParseError(f"tier must be one of {TIERS}, got {tier!r}", n, "tier")
        samples.append(
            AccessSample(
                _int(ts, n, "timestamp_ns", minimum=0),
                _int(vaddr, n, "vaddr", minimum=0, hex_ok=True),
                tier,
                _int(weight, n, "weight", minimum=1),
            )
        )
    return samples


def format_access_samples(samples: Iterable[AccessSample]) -> str:
    out = io.StringIO()
    out.write(",".join(SAMPLE_HEADER) + "\n")
    for s in samples:
        out.write(f"{s.timestamp_ns},{s.virtual_address:#x},{s.tier},{s.weight}\n")
    return out.getvalue()


def parse_counter_records(stream: TextIO | str) -> list[CounterRecord]:
    records = []
    for n, (ts, event, value, phase) in _rows(stream, COUNTER_HEADER):
        if not event:
            raise ParseError("event name is empty", n, "event")
        records.append(
            CounterRecord(_int(ts, n, "timestamp_ns"), event, _int(value, n, "value", minimum=0), phase)
        )
    return records


def format_counter_records(records: Iterable[CounterRecord]) -> str:
    out = io.StringIO()
    out.write(",".join(COUNTER_HEADER) + "\n")
    for r in records:
        out.write(f"{r.timestamp_ns},{r.event},{r.value},{r.phase_tag}\n")
    return out.getvalue()


def aggregate_pages(
    samples: Iterable[AccessSample], page_size: int, tier_filter: str | None = None
) -> PageHistogram:
    """Sum sample weights per page, optionally for one tier only."""
    if not isinstance(page_size, int) or page_size <= 0 or page_size & (page_size - 1):
        raise ValidationError(f"page_size must be a power of two, got {page_size!r}")
    if tier_filter is not None and tier_filter not in TIERS:
        raise ValidationError(f"tier_filter must be one of {TIERS}")
    shift = page_size.bit_length() - 1
    counts: dict[int, int] = defaultdict(int)
    for s in samples:
        if tier_filter is None or s.tier == tier_filter:
            counts[s.virtual_address >> shift] += s.weight
    return PageHistogram(page_size, dict(counts))


def segment_phases(
    records: Iterable[CounterRecord],
    flop_events: Iterable[str],
    local_byte_events: Iterable[str],
    remote_byte_events: Iterable[str],
    interval_s: float = DEFAULT_INTERVAL_S,
) -> list[PhaseProfile]:
    """Fold a tagged counter stream into one PhaseProfile per tag.

    Untagged records are ignored. A phase lasts from its first to its last
    record, but never less than one collector interval.
    """
    roles: dict[str, str] = {}
    for role, events in (("flops", flop_events), ("bytes_local", local_byte_events), ("bytes_remote", remote_byte_events)):
        for event in events:
            if event in roles and roles[event] != role:
                raise ValidationError(f"event {event!r} assigned to both {roles[event]} and {role}")
            roles[event] = role

    order: list[str] = []
    sums: dict[str, dict[str, int]] = {}
    counters: dict[str, dict[str, int]] = {}
    span: dict[str, list[int]] = {}
    for r in records:
        tag = r.phase_tag
        if not tag:
            continue
        if tag not in sums:
            order.append(tag)
            sums[tag] = {"flops": 0, "bytes_local": 0, "bytes_remote": 0}
            counters[tag] = defaultdict(int)
            span[tag] = [r.timestamp_ns, r.timestamp_ns]
        role = roles.get(r.event)
        if role:
            sums[tag][role] += r.value
        counters[tag][r.event] += r.value
        lo, hi = span[tag]
        span[tag] = [min(lo, r.timestamp_ns), max(hi, r.timestamp_ns)]

    phases = []
    for tag in order:
        lo, hi = span[tag]
        phases.append(
            PhaseProfile(
                tag=tag,
                duration_s=max((hi - lo) / 1e9, interval_s),
                flops=float(sums[tag]["flops"]),
                bytes_local=float(sums[tag]["bytes_local"]),
                bytes_remote=float(sums[tag]["bytes_remote"]),
                counters=dict(sorted(counters[tag].items())),
            )
        )
    return phases


def counters_by_phase(records: Iterable[CounterRecord], untagged: str = "program") -> dict[str, dict[str, int]]:
    """Total every event per phase tag, in first-appearance order."""
    out: dict[str, dict[str, int]] = {}
    for r in records:
        bucket = out.setdefault(r.phase_tag or untagged, defaultdict(int))
        bucket[r.event] += r.value
    return {tag: dict(events) for tag, events in out.items()}
