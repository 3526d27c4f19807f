"""Domain types shared by every analysis: tiers, systems, phases, apps."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

GiB = 1024**3


class ValidationError(ValueError):
    """Raised when a domain object violates an invariant.

    ``diagnostics`` holds one message per violated invariant.
    """

    def __init__(self, diagnostics: Sequence[str] | str):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


@dataclass(frozen=True)
class TierSpec:
    name: str
    capacity_bytes: int
    bandwidth_bytes_per_s: float
    latency_ns: float


@dataclass(frozen=True)
class SystemSpec:
    """A two-tier pool system: node-local DRAM plus a fabric-attached pool.

    Link *data* capacity bounds payload bytes; link *traffic* capacity is the
    raw link rate including protocol overhead, so it is never smaller.
    """

    local: TierSpec
    remote: TierSpec
    link_data_capacity_bytes_per_s: float
    link_traffic_capacity_bytes_per_s: float
    peak_flops_per_s: float
    peak_loi_traffic_bytes_per_s: float

    @property
    def data_per_traffic(self) -> float:
        """Payload bytes carried per byte of raw link traffic."""
        return self.link_data_capacity_bytes_per_s / self.link_traffic_capacity_bytes_per_s

    def traffic_to_data(self, traffic_bytes_per_s: float) -> float:
        return traffic_bytes_per_s * self.data_per_traffic


def _tier_diagnostics(tier: TierSpec, prefix: str) -> list[str]:
    out = []
    if not isinstance(tier.capacity_bytes, int) or isinstance(tier.capacity_bytes, bool):
        out.append(f"{prefix}.capacity_bytes: must be an integer")
    elif tier.capacity_bytes < 0:
        out.append(f"{prefix}.capacity_bytes: must be non-negative")
    for name in ("bandwidth_bytes_per_s", "latency_ns"):
        value = getattr(tier, name)
        if not _finite(value):
            out.append(f"{prefix}.{name}: must be a finite number")
        elif value <= 0:
            out.append(f"{prefix}.{name}: must be strictly positive")
    return out


def system_diagnostics(spec: SystemSpec) -> list[str]:
    """Every invariant violation in ``spec``, one message each."""
    out = _tier_diagnostics(spec.local, "local") + _tier_diagnostics(spec.remote, "remote")
    scalars = (
        "link_data_capacity_bytes_per_s",
        "link_traffic_capacity_bytes_per_s",
        "peak_flops_per_s",
        "peak_loi_traffic_bytes_per_s",
    )
    ok = set()
    for name in scalars:
        value = getattr(spec, name)
        if not _finite(value):
            out.append(f"{name}: must be a finite number")
        elif value <= 0:
            out.append(f"{name}: must be strictly positive")
        else:
            ok.add(name)
    data, traffic = spec.link_data_capacity_bytes_per_s, spec.link_traffic_capacity_bytes_per_s
    if {"link_data_capacity_bytes_per_s", "link_traffic_capacity_bytes_per_s"} <= ok and traffic < data:
        out.append(
            "link_traffic_capacity_bytes_per_s: negative protocol overhead "
            f"(traffic capacity {traffic:g} < data capacity {data:g})"
        )
    rbw = spec.remote.bandwidth_bytes_per_s
    if "link_data_capacity_bytes_per_s" in ok and _finite(rbw) and rbw > data:
        out.append(
            f"remote.bandwidth_bytes_per_s: remote bandwidth exceeds link ({rbw:g} > {data:g})"
        )
    if {"peak_loi_traffic_bytes_per_s", "link_traffic_capacity_bytes_per_s"} <= ok:
        if spec.peak_loi_traffic_bytes_per_s > traffic:
            out.append(
                "peak_loi_traffic_bytes_per_s: exceeds link traffic capacity "
                f"({spec.peak_loi_traffic_bytes_per_s:g} > {traffic:g})"
            )
    return out


def validate_system(spec: SystemSpec) -> SystemSpec:
    diagnostics = system_diagnostics(spec)
    if diagnostics:
        raise ValidationError(diagnostics)
    return spec


@dataclass(frozen=True)
class PhaseProfile:
    """Counter totals for one tagged phase of a run.

    ``bytes_local``/``bytes_remote`` are bytes moved from each tier during
    ``duration_s``; their ratio to the duration is the phase's demand rate.
    """

    tag: str
    duration_s: float
    flops: float = 0.0
    bytes_local: float = 0.0
    bytes_remote: float = 0.0
    counters: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        problems = []
        if not _finite(self.duration_s) or self.duration_s <= 0:
            problems.append(f"phase {self.tag!r}: duration_s must be finite and > 0")
        for name in ("flops", "bytes_local", "bytes_remote"):
            value = getattr(self, name)
            if not _finite(value) or value < 0:
                problems.append(f"phase {self.tag!r}: {name} must be finite and >= 0")
        for event, value in self.counters.items():
            if not isinstance(value, int) or value < 0:
                problems.append(f"phase {self.tag!r}: counter {event} must be a non-negative integer")
        if problems:
            raise ValidationError(problems)

    @property
    def total_bytes(self) -> float:
        return self.bytes_local + self.bytes_remote

    @property
    def remote_demand(self) -> float:
        """Remote bytes per second the phase asks of the link."""
        return self.bytes_remote / self.duration_s


@dataclass(frozen=True)
class AppModel:
    """A workload as an ordered list of phase profiles plus time weights.

    Each phase profile describes the phase's behaviour normalised to a full
    run, so the run's runtime is the weighted sum of phase runtimes.
    """

    name: str
    footprint_bytes: int
    phases: tuple[PhaseProfile, ...]
    weight_per_phase: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "weight_per_phase", tuple(float(w) for w in self.weight_per_phase))
        problems = []
        if not isinstance(self.footprint_bytes, int) or self.footprint_bytes <= 0:
            problems.append(f"app {self.name!r}: footprint_bytes must be a positive integer")
        if not self.phases:
            problems.append(f"app {self.name!r}: needs at least one phase")
        if len(self.weight_per_phase) != len(self.phases):
            problems.append(f"app {self.name!r}: one weight per phase required")
        elif self.phases:
            if any(not _finite(w) or not 0.0 <= w <= 1.0 for w in self.weight_per_phase):
                problems.append(f"app {self.name!r}: weights must lie in [0, 1]")
            elif abs(math.fsum(self.weight_per_phase) - 1.0) > 1e-9:
                problems.append(f"app {self.name!r}: weights must sum to 1")
        if problems:
            raise ValidationError(problems)

    @property
    def has_remote_traffic(self) -> bool:
        return any(p.bytes_remote > 0 for p, w in zip(self.phases, self.weight_per_phase) if w > 0)


def app_from_phases(name: str, footprint_bytes: int, phases: Sequence[PhaseProfile]) -> AppModel:
    """Build an AppModel from back-to-back measured phases.

    Weights become each phase's share of wall time and every profile is
    rescaled (rates preserved) to the whole run's duration.
    """
    total = math.fsum(p.duration_s for p in phases)
    scaled = []
    for p in phases:
        k = total / p.duration_s
        scaled.append(
            PhaseProfile(p.tag, total, p.flops * k, p.bytes_local * k, p.bytes_remote * k, dict(p.counters))
        )
    return AppModel(name, footprint_bytes, tuple(scaled), tuple(p.duration_s / total for p in phases))


# JSON documents ------------------------------------------------------------

_TIER_KEYS = {f.name for f in fields(TierSpec)}
_SYSTEM_KEYS = {f.name for f in fields(SystemSpec)}


def system_from_dict(doc: Mapping[str, Any]) -> SystemSpec:
    """Parse a SystemSpec document; unknown or missing keys are errors."""
    if not isinstance(doc, Mapping):
        raise ValidationError("system document must be a JSON object")
    problems = []
    extra = set(doc) - _SYSTEM_KEYS
    missing = _SYSTEM_KEYS - set(doc)
    problems += [f"{k}: unknown key" for k in sorted(extra)]
    problems += [f"{k}: missing key" for k in sorted(missing)]
    tiers = {}
    for name in ("local", "remote"):
        sub = doc.get(name)
        if sub is None:
            continue
        if not isinstance(sub, Mapping):
            problems.append(f"{name}: must be an object")
            continue
        problems += [f"{name}.{k}: unknown key" for k in sorted(set(sub) - _TIER_KEYS)]
        problems += [f"{name}.{k}: missing key" for k in sorted(_TIER_KEYS - set(sub))]
        if _TIER_KEYS <= set(sub):
            tiers[name] = TierSpec(**{k: sub[k] for k in _TIER_KEYS})
    if problems:
        raise ValidationError(problems)
    spec = SystemSpec(
        local=tiers["local"],
        remote=tiers["remote"],
        **{k: doc[k] for k in _SYSTEM_KEYS - {"local", "remote"}},
    )
    return validate_system(spec)


def system_to_dict(spec: SystemSpec) -> dict:
    return asdict(spec)


def load_system(path: str | Path) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))


def phase_from_dict(doc: Mapping[str, Any]) -> PhaseProfile:
    try:
        return PhaseProfile(
            tag=str(doc["tag"]),
            duration_s=doc["duration_s"],
            flops=doc.get("flops", 0.0),
            bytes_local=doc.get("bytes_local", 0.0),
            bytes_remote=doc.get("bytes_remote", 0.0),
            counters=dict(doc.get("counters", {})),
        )
    except KeyError as exc:
        raise ValidationError(f"phase: missing key {exc.args[0]}") from None


def phase_to_dict(p: PhaseProfile) -> dict:
    return {
        "tag": p.tag,
        "duration_s": p.duration_s,
        "flops": p.flops,
        "bytes_local": p.bytes_local,
        "bytes_remote": p.bytes_remote,
        "counters": dict(sorted(p.counters.items())),
    }


def app_from_dict(doc: Mapping[str, Any]) -> AppModel:
    try:
        return AppModel(
            name=str(doc["name"]),
            footprint_bytes=doc["footprint_bytes"],
            phases=tuple(phase_from_dict(p) for p in doc["phases"]),
            weight_per_phase=tuple(doc["weight_per_phase"]),
        )
    except KeyError as exc:
        raise ValidationError(f"app: missing key {exc.args[0]}") from None


def app_to_dict(app: AppModel, note: str | None = None) -> dict:
    doc = {
        "name": app.name,
        "footprint_bytes": app.footprint_bytes,
        "phases": [phase_to_dict(p) for p in app.phases],
        "weight_per_phase": list(app.weight_per_phase),
    }
    if note:
        doc["note"] = note
    return doc


def load_app(path: str | Path) -> AppModel:
    with open(path, encoding="utf-8") as fh:
        return app_from_dict(json.load(fh))
