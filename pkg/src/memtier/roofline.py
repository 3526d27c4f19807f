"""DRAM roofline with a second-tier slope and an interference-reduced slope."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import arithmetic_intensity
from .model import PhaseProfile, SystemSpec, ValidationError

MEMORY_BOUND = "memory_bound"
COMPUTE_BOUND = "compute_bound"


@dataclass(frozen=True)
class RooflinePoint:
    label: str
    intensity_flops_per_byte: float
    throughput_flops_per_s: float

    def __post_init__(self):
        if not self.intensity_flops_per_byte > 0:
            raise ValidationError(f"{self.label}: intensity must be > 0")
        if not self.throughput_flops_per_s >= 0:
            raise ValidationError(f"{self.label}: throughput must be >= 0")


def phase_point(p: PhaseProfile) -> RooflinePoint:
    return RooflinePoint(p.tag, arithmetic_intensity(p), p.flops / p.duration_s)


def attainable(peak_flops: float, bandwidth: float, intensity: float) -> float:
    if not (peak_flops > 0 and bandwidth > 0 and intensity > 0):
        raise ValidationError("peak flops, bandwidth and intensity must all be > 0")
    return min(peak_flops, bandwidth * intensity)


def ridge_point(peak_flops: float, bandwidth: float) -> float:
    return peak_flops / bandwidth


def multi_tier_bandwidth(s: SystemSpec) -> float:
    """Aggregate DRAM slope when both tiers stream concurrently."""
    return s.local.bandwidth_bytes_per_s + s.remote.bandwidth_bytes_per_s


def interference_adjusted_bandwidth(s: SystemSpec, loi: float) -> float:
    """Aggregate slope with the pool share reduced by background interference.

    Only the pooled tier is affected; local DRAM never sees pool congestion.
    """
    if not 0.0 <= loi <= 1.0:
        raise ValidationError(f"loi must be in [0, 1], got {loi!r}")
    return s.local.bandwidth_bytes_per_s + s.remote.bandwidth_bytes_per_s * (1.0 - loi)


def classify_phase(point: RooflinePoint, peak_flops: float, bandwidth: float) -> str:
    # Ridge point itself counts as compute bound.
    if point.intensity_flops_per_byte < ridge_point(peak_flops, bandwidth):
        return MEMORY_BOUND
    return COMPUTE_BOUND


def intensity_grid(lo: float = 1 / 64, hi: float = 1024.0, per_decade: int = 8) -> np.ndarray:
    n = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.geomspace(lo, hi, n)


def roof_table(peak_flops: float, slopes: dict[str, float], grid) -> list[dict]:
    """Attainable flop/s per named slope at each grid intensity."""
    rows = []
    for i in grid:
        row = {"intensity": float(i)}
        for name, bw in slopes.items():
            row[name] = attainable(peak_flops, bw, float(i))
        rows.append(row)
    return rows
