"""Minimal SVG line charts, no plotting dependencies.

Just enough for trajectory plots: multiple named series on shared axes,
"nice" tick placement, a legend, and vertical stacking of several charts
into one document.  Output is a pure function of the input data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64.0, 16.0, 34.0, 44.0


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + step * 1e-9:
        ticks.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return ticks or [lo, hi]


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:.4g}"


@dataclass
class Series:
    name: str
    x: Sequence[float]
    y: Sequence[float]
    color: str


@dataclass
class LineChart:
    """One set of axes with any number of line series."""

    title: str
    xlabel: str = ""
    ylabel: str = ""
    width: float = 640.0
    height: float = 320.0
    series: list[Series] = field(default_factory=list)

    def add_series(self, name: str, x: Sequence[float], y: Sequence[float],
                   color: str | None = None) -> None:
        if len(x) != len(y):
            raise ValueError(f"series {name!r}: x and y lengths differ ({len(x)} vs {len(y)})")
        if color is None:
            color = _PALETTE[len(self.series) % len(_PALETTE)]
        self.series.append(Series(name, list(map(float, x)), list(map(float, y)), color))

    def _bounds(self) -> tuple[float, float, float, float]:
        xs = [v for s in self.series for v in s.x if math.isfinite(v)]
        ys = [v for s in self.series for v in s.y if math.isfinite(v)]
        if not xs or not ys:
            return 0.0, 1.0, 0.0, 1.0
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if y_hi == y_lo:
            y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
        pad = 0.04 * (y_hi - y_lo)
        return x_lo, max(x_hi, x_lo + 1e-12), y_lo - pad, y_hi + pad

    def render_group(self, y_offset: float = 0.0) -> str:
        """SVG fragment for this chart, translated down by ``y_offset``."""
        x_lo, x_hi, y_lo, y_hi = self._bounds()
        px_l, px_r = _MARGIN_L, self.width - _MARGIN_R
        px_t, px_b = _MARGIN_T, self.height - _MARGIN_B

        def sx(x: float) -> float:
            return px_l + (x - x_lo) / (x_hi - x_lo) * (px_r - px_l)

        def sy(y: float) -> float:
            return px_b - (y - y_lo) / (y_hi - y_lo) * (px_b - px_t)

        out = [f'<g transform="translate(0,{y_offset:g})">']
        out.append(
            f'<rect x="{px_l:g}" y="{px_t:g}" width="{px_r - px_l:g}" '
            f'height="{px_b - px_t:g}" fill="white" stroke="#333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{(px_l + px_r) / 2:g}" y="{px_t - 12:g}" text-anchor="middle" '
            f'font-size="14" font-family="sans-serif" font-weight="bold">{self.title}</text>'
        )
        for tick in _nice_ticks(x_lo, x_hi):
            x = sx(tick)
            out.append(f'<line x1="{x:.2f}" y1="{px_t:g}" x2="{x:.2f}" y2="{px_b:g}" '
                       'stroke="#ddd" stroke-width="0.5"/>')
            out.append(f'<text x="{x:.2f}" y="{px_b + 16:g}" text-anchor="middle" '
                       f'font-size="11" font-family="sans-serif">{_fmt(tick)}</text>')
        for tick in _nice_ticks(y_lo, y_hi):
            y = sy(tick)
            out.append(f'<line x1="{px_l:g}" y1="{y:.2f}" x2="{px_r:g}" y2="{y:.2f}" '
                       'stroke="#ddd" stroke-width="0.5"/>')
            out.append(f'<text x="{px_l - 6:g}" y="{y + 4:.2f}" text-anchor="end" '
                       f'font-size="11" font-family="sans-serif">{_fmt(tick)}</text>')
        if self.xlabel:
            out.append(f'<text x="{(px_l + px_r) / 2:g}" y="{px_b + 34:g}" text-anchor="middle" '
                       f'font-size="12" font-family="sans-serif">{self.xlabel}</text>')
        if self.ylabel:
            out.append(
                f'<text x="16" y="{(px_t + px_b) / 2:g}" text-anchor="middle" font-size="12" '
                f'font-family="sans-serif" transform="rotate(-90 16 {(px_t + px_b) / 2:g})">'
                f'{self.ylabel}</text>'
            )
        for s in self.series:
            pts = " ".join(
                f"{sx(x):.2f},{sy(y):.2f}"
                for x, y in zip(s.x, s.y)
                if math.isfinite(x) and math.isfinite(y)
            )
            out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
                       'stroke-width="1.5"/>')
        lx, ly = px_l + 10.0, px_t + 14.0
        for i, s in enumerate(self.series):
            yy = ly + 16.0 * i
            out.append(f'<line x1="{lx:g}" y1="{yy - 4:g}" x2="{lx + 22:g}" y2="{yy - 4:g}" '
                       f'stroke="{s.color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 28:g}" y="{yy:g}" font-size="11" '
                       f'font-family="sans-serif">{s.name}</text>')
        out.append("</g>")
        return "\n".join(out)


def render_svg(charts: Sequence[LineChart]) -> str:
    """Stack charts vertically into one standalone SVG document."""
    if not charts:
        raise ValueError("need at least one chart")
    width = max(c.width for c in charts)
    height = sum(c.height for c in charts)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="white"/>',
    ]
    offset = 0.0
    for chart in charts:
        parts.append(chart.render_group(offset))
        offset += chart.height
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def save_svg(charts: Sequence[LineChart], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(charts))
