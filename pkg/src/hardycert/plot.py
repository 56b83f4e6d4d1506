"""Minimal deterministic SVG line plot for sweep tables.

One polyline of ``value`` against ``eps1`` per distinct ``eps2``; a group
with a single row is drawn as a marker.  Output depends only on the rows.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")


def _num(v: float) -> str:
    return format(float(v), ".12g")


def _px(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [float(t) for t in np.linspace(lo, hi, n)]


def _span(vals: Sequence[float]) -> tuple[float, float]:
    lo, hi = float(min(vals)), float(max(vals))
    if hi == lo:
        pad = 0.5 if lo == 0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    return lo, hi


def sweep_svg(rows: Sequence[dict], title: str = "", source: str = "") -> str:
    """Render sweep rows (dicts with eps1, eps2, level, value, status) as SVG text."""
    rows = [r for r in rows if np.isfinite(r["value"])]
    if not rows:
        raise ValueError("no finite rows to plot")
    groups: dict[float, list[dict]] = {}
    for r in sorted(rows, key=lambda r: (r["eps2"], r["eps1"])):
        groups.setdefault(r["eps2"], []).append(r)
    x_lo, x_hi = _span([r["eps1"] for r in rows])
    y_lo, y_hi = _span([r["value"] for r in rows])
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return TOP + (1 - (v - y_lo) / (y_hi - y_lo)) * ph

    levels = sorted({r["level"] for r in rows})
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<!-- hardycert plot; source={escape(source)}; rows={len(rows)}; levels={','.join(map(str, levels))} -->",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{_px(LEFT + pw / 2)}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        out.append(f'<line x1="{_px(x)}" y1="{TOP + ph}" x2="{_px(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_px(x)}" y="{TOP + ph + 18}" text-anchor="middle" font-size="10">{_num(float(format(t, ".4g")))}</text>')
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_px(y)}" x2="{LEFT}" y2="{_px(y)}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_px(y + 3)}" text-anchor="end" font-size="10">{_num(float(format(t, ".4g")))}</text>')
    out.append(f'<text x="{_px(LEFT + pw / 2)}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">eps1</text>')
    out.append(f'<text x="16" y="{_px(TOP + ph / 2)}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {_px(TOP + ph / 2)})">value</text>')
    for k, (e2, grp) in enumerate(groups.items()):
        color = PALETTE[k % len(PALETTE)]
        if len(grp) == 1:
            r = grp[0]
            out.append(f'<circle cx="{_px(sx(r["eps1"]))}" cy="{_px(sy(r["value"]))}" r="3" fill="{color}"/>')
        else:
            pts = " ".join(f"{_px(sx(r['eps1']))},{_px(sy(r['value']))}" for r in grp)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 14 + 16 * k
        lx = WIDTH - RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}" font-size="10">eps2={_num(e2)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
