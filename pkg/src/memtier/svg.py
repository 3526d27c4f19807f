"""Minimal line/scatter charts written directly as SVG text.

Output depends only on the input numbers, so plots can be golden-tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from typing import Sequence

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 64, 16, 24, 48


@dataclass
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    style: str = "line"  # line | dashed | points


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    xlog: bool = False
    ylog: bool = False
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    series: list[Series] = field(default_factory=list)

    def add(self, label, xs, ys, style="line") -> "Chart":
        self.series.append(Series(label, list(xs), list(ys), style))
        return self


def _n(v: float) -> str:
    return f"{v:.2f}"


def _limits(values, log, given):
    if given:
        lo, hi = given
    else:
        vals = [v for v in values if (v > 0 if log else True)]
        lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi == lo:
        hi = lo + 1.0
    return lo, hi


def _ticks(lo, hi, log):
    if log:
        return [(10.0**e, e) for e in range(math.ceil(lo - 1e-9), math.floor(hi + 1e-9) + 1)]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step - 1e-9)
    return [(k * step, k * step) for k in range(first, math.floor(hi / step + 1e-9) + 1)]


def render(chart: Chart) -> str:
    xs = [x for s in chart.series for x in s.xs]
    ys = [y for s in chart.series for y in s.ys]
    x0, x1 = _limits(xs, chart.xlog, chart.xlim)
    y0, y1 = _limits(ys, chart.ylog, chart.ylim)
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        v = math.log10(x) if chart.xlog else x
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(y):
        v = math.log10(y) if chart.ylog else y
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="16" text-anchor="middle" font-size="13">{escape(chart.title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for value, pos in _ticks(x0, x1, chart.xlog):
        x = LEFT + (pos - x0) / (x1 - x0) * pw
        out.append(f'<line x1="{_n(x)}" y1="{TOP + ph}" x2="{_n(x)}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_n(x)}" y="{TOP + ph + 16}" text-anchor="middle">{value:g}</text>')
    for value, pos in _ticks(y0, y1, chart.ylog):
        y = TOP + ph - (pos - y0) / (y1 - y0) * ph
        out.append(f'<line x1="{LEFT - 4}" y1="{_n(y)}" x2="{LEFT}" y2="{_n(y)}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_n(y + 4)}" text-anchor="end">{value:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.0f}" y="{H - 10}" text-anchor="middle">{escape(chart.xlabel)}</text>')
    out.append(
        f'<text x="14" y="{TOP + ph / 2:.0f}" text-anchor="middle" transform="rotate(-90 14 {TOP + ph / 2:.0f})">'
        f"{escape(chart.ylabel)}</text>"
    )
    for k, s in enumerate(chart.series):
        color = PALETTE[k % len(PALETTE)]
        pts = [(px(x), py(y)) for x, y in zip(s.xs, s.ys)]
        if s.style == "points":
            out += [f'<circle cx="{_n(a)}" cy="{_n(b)}" r="3" fill="{color}"/>' for a, b in pts]
        else:
            dash = ' stroke-dasharray="6 4"' if s.style == "dashed" else ""
            coords = " ".join(f"{_n(a)},{_n(b)}" for a, b in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = TOP + 14 + 14 * k
        out.append(f'<rect x="{LEFT + 8}" y="{ly - 8}" width="10" height="3" fill="{color}"/>')
        out.append(f'<text x="{LEFT + 22}" y="{ly - 3}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
