"""Prefetch quality, arithmetic intensity and tier-balance metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .model import PhaseProfile, SystemSpec, ValidationError

PREFETCH_EVENTS = ("PF_L2_DATA_RD", "PF_L2_RFO", "L2_LINES_IN", "USELESS_HWPF")

BELOW_BAND = "below_band"
WITHIN_BAND = "within_band"
ABOVE_BAND = "above_band"
ILL_BALANCED = "ill_balanced"


class MetricError(ValueError):
    """A metric is undefined for the given inputs."""


@dataclass(frozen=True)
class PrefetchCounters:
    pf_l2_data_rd: int
    pf_l2_rfo: int
    l2_lines_in: int
    useless_hwpf: int

    def __post_init__(self):
        problems = [
            f"{name} must be a non-negative integer"
            for name in ("pf_l2_data_rd", "pf_l2_rfo", "l2_lines_in", "useless_hwpf")
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0
        ]
        if not problems:
            if self.useless_hwpf > self.prefetched:
                problems.append("useless_hwpf exceeds prefetched lines")
            if self.useless_hwpf > self.l2_lines_in:
                problems.append("useless_hwpf exceeds l2_lines_in")
        if problems:
            raise ValidationError(problems)

    @property
    def prefetched(self) -> int:
        return self.pf_l2_data_rd + self.pf_l2_rfo

    @classmethod
    def from_events(cls, events: Mapping[str, int]) -> "PrefetchCounters":
        missing = [e for e in PREFETCH_EVENTS if e not in events]
        if missing:
            raise KeyError(missing[0])
        return cls(*(int(events[e]) for e in PREFETCH_EVENTS))


def prefetch_accuracy(c: PrefetchCounters) -> float:
    """Share of prefetched L2 lines that were later used."""
    if c.prefetched == 0:
        raise MetricError("accuracy undefined: no prefetches recorded")
    return (c.prefetched - c.useless_hwpf) / c.prefetched


def prefetch_coverage(c: PrefetchCounters) -> float:
    """Share of useful L2 fills that arrived by prefetch."""
    denom = c.l2_lines_in - c.useless_hwpf
    if denom <= 0:
        raise MetricError("coverage undefined: no useful L2 fills")
    return (c.prefetched - c.useless_hwpf) / denom


def excess_traffic(traffic_pf_on: float, traffic_pf_off: float) -> float:
    # Negative when prefetching reduces traffic; deliberately not clamped.
    if not traffic_pf_off > 0:
        raise MetricError("baseline traffic must be positive")
    return traffic_pf_on / traffic_pf_off - 1.0


def _bytes(p: PhaseProfile) -> float:
    total = p.bytes_local + p.bytes_remote
    if total <= 0:
        raise MetricError(f"phase {p.tag!r} moved no bytes")
    return total


def arithmetic_intensity(p: PhaseProfile) -> float:
    return p.flops / _bytes(p)


def remote_access_ratio(p: PhaseProfile) -> float:
    return p.bytes_remote / _bytes(p)


def local_access_ratio(p: PhaseProfile) -> float:
    return 1.0 - remote_access_ratio(p)


def capacity_ratio(s: SystemSpec) -> float:
    total = s.local.capacity_bytes + s.remote.capacity_bytes
    if total <= 0:
        raise MetricError("system has no memory capacity")
    return s.remote.capacity_bytes / total


def bandwidth_ratio(s: SystemSpec) -> float:
    lbw, rbw = s.local.bandwidth_bytes_per_s, s.remote.bandwidth_bytes_per_s
    return rbw / (lbw + rbw)


@dataclass(frozen=True)
class TieringReport:
    r_access: float
    r_cap: float
    r_bw: float
    classification: str
    phase: str = ""

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "r_access": self.r_access,
            "r_cap": self.r_cap,
            "r_bw": self.r_bw,
            "classification": self.classification,
        }


def classify_band(r_access: float, r_cap: float, r_bw: float) -> str:
    """Place a remote-access ratio against the capacity/bandwidth band.

    The band runs from the capacity ratio up to the bandwidth ratio, both
    ends inclusive. When the capacity ratio already exceeds the bandwidth
    ratio there is no band and the tiers themselves are ill-balanced.
    """
    if r_cap > r_bw:
        return ILL_BALANCED
    if r_access < r_cap:
        return BELOW_BAND
    if r_access > r_bw:
        return ABOVE_BAND
    return WITHIN_BAND


def tiering_gap(p: PhaseProfile, s: SystemSpec) -> TieringReport:
    r_access, r_cap, r_bw = remote_access_ratio(p), capacity_ratio(s), bandwidth_ratio(s)
    return TieringReport(r_access, r_cap, r_bw, classify_band(r_access, r_cap, r_bw), p.tag)
