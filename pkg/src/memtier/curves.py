"""Bandwidth-capacity scaling curve: share of accesses vs. share of footprint.

Pages are ranked hottest first, so the curve always sits on or above the
diagonal; how far above says how much of the footprint carries the traffic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .ingest import PageHistogram
from .model import ValidationError


@dataclass(frozen=True)
class ScalingCurve:
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValidationError("curve needs at least one point")
        if pts[-1] != (1.0, 1.0):
            raise ValidationError("curve must end at (1, 1)")
        prev = (0.0, 0.0)
        for x, y in pts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValidationError(f"point {(x, y)} outside the unit square")
            if x < prev[0] or y < prev[1]:
                raise ValidationError("curve coordinates must be non-decreasing")
            if y < x:
                raise ValidationError(f"point {(x, y)} falls below the diagonal")
            prev = (x, y)

    @property
    def footprint(self) -> np.ndarray:
        return np.array([0.0] + [p[0] for p in self.points])

    @property
    def access(self) -> np.ndarray:
        return np.array([0.0] + [p[1] for p in self.points])


def build_scaling_curve(hist: PageHistogram) -> ScalingCurve:
    if not hist.counts:
        raise ValidationError("cannot build a scaling curve from an empty histogram")
    pages = np.fromiter(hist.counts.keys(), dtype=np.int64, count=len(hist.counts))
    counts = np.fromiter(hist.counts.values(), dtype=np.int64, count=len(hist.counts))
    # Descending count, ties by ascending page number.
    order = np.lexsort((pages, -counts))
    cum = np.cumsum(counts[order])
    n = len(counts)
    total = int(cum[-1])
    ks = np.arange(1, n + 1)
    return ScalingCurve(tuple(zip((ks / n).tolist(), (cum / total).tolist())))


def _check_fraction(value: float, what: str):
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{what} must be in [0, 1], got {value!r}")


def access_fraction_at(curve: ScalingCurve, footprint_fraction: float) -> float:
    """Share of accesses served by the hottest ``footprint_fraction`` of pages."""
    _check_fraction(footprint_fraction, "footprint_fraction")
    return float(np.interp(footprint_fraction, curve.footprint, curve.access))


def footprint_for_access(curve: ScalingCurve, access_target: float) -> float:
    """Smallest footprint share whose hottest pages cover ``access_target``."""
    _check_fraction(access_target, "access_target")
    if access_target <= 0.0:
        return 0.0
    xs, ys = curve.footprint, curve.access
    i = int(np.searchsorted(ys, access_target, side="left"))
    if ys[i] == access_target:
        return float(xs[i])
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return float(x0 + (access_target - y0) / (y1 - y0) * (x1 - x0))


def curve_to_csv(curve: ScalingCurve, fmt=lambda v: f"{v:.9g}") -> str:
    out = io.StringIO()
    out.write("footprint_frac,access_frac\n")
    for x, y in curve.points:
        out.write(f"{fmt(x)},{fmt(y)}\n")
    return out.getvalue()
