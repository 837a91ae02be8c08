"""Minimal SVG line plots and boundary drawings (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=50)
COLORS = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#2c3e50"]


def _num(x):
    return f"{x:.2f}"


def _ticks(lo, hi, n=5):
    """Round tick positions covering ``[lo, hi]``."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def _label(v):
    return f"{v:.4g}"


def _frame(title, xlabel, ylabel, x0, x1, y0, y1, width=WIDTH, height=HEIGHT):
    pw = width - MARGIN["left"] - MARGIN["right"]
    ph = height - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + ph - (y - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        x = sx(t)
        parts.append(f'<line x1="{_num(x)}" y1="{_num(sy(y0))}" x2="{_num(x)}" '
                     f'y2="{_num(sy(y0) + 5)}" stroke="black"/>')
        parts.append(f'<text x="{_num(x)}" y="{_num(sy(y0) + 18)}" text-anchor="middle">{_label(t)}</text>')
    for t in _ticks(y0, y1):
        y = sy(t)
        parts.append(f'<line x1="{_num(sx(x0) - 5)}" y1="{_num(y)}" x2="{_num(sx(x0))}" '
                     f'y2="{_num(y)}" stroke="black"/>')
        parts.append(f'<text x="{_num(sx(x0) - 8)}" y="{_num(y + 4)}" text-anchor="end">{_label(t)}</text>')
    parts.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{height - 12}" text-anchor="middle">'
                 f'{escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    return parts, sx, sy


def _range(values, pad=0.05):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def line_plot_svg(x, ys, labels, title="", xlabel="", ylabel="", markers=()):
    """Polyline plot of one or more series sharing ``x``; NaNs break the line."""
    x = np.asarray(x, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = _range(np.concatenate([np.asarray(y, dtype=float) for y in ys]))
    y0 = min(y0, 0.0) if y0 > 0 and y0 < 0.2 * y1 else y0
    parts, sx, sy = _frame(title, xlabel, ylabel, x0, x1, y0, y1)
    for k, (y, lab) in enumerate(zip(ys, labels)):
        color = COLORS[k % len(COLORS)]
        seg = []
        for xi, yi in zip(x, np.asarray(y, dtype=float)):
            if np.isfinite(yi):
                seg.append(f"{_num(sx(xi))},{_num(sy(yi))}")
            elif seg:
                parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                             f'points="{" ".join(seg)}"/>')
                seg = []
        if seg:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                         f'points="{" ".join(seg)}"/>')
        ly = MARGIN["top"] + 16 + 16 * k
        lx = WIDTH - MARGIN["right"] - 120
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                     'stroke-width="2"/>')
        parts.append(f'<text x="{lx + 26}" y="{ly}">{escape(str(lab))}</text>')
    for mx, my in markers:
        parts.append(f'<circle cx="{_num(sx(mx))}" cy="{_num(sy(my))}" r="3.5" fill="none" '
                     'stroke="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def boundary_svg(boundaries, labels, title="particle in the unit cell"):
    """Draw boundaries in the cell ``[-1/2, 1/2] x [0, 1]`` (plate at the bottom)."""
    pts = np.concatenate([b.points for b in boundaries])
    top = max(1.0, float(pts[:, 1].max()) + 0.05)
    side = 400
    parts, sx, sy = _frame(title, "x1", "x2", -0.5, 0.5, 0.0, top,
                           width=side + MARGIN["left"] + MARGIN["right"],
                           height=int(side * top) + MARGIN["top"] + MARGIN["bottom"])
    parts.append(f'<line x1="{_num(sx(-0.5))}" y1="{_num(sy(0))}" x2="{_num(sx(0.5))}" '
                 f'y2="{_num(sy(0))}" stroke="black" stroke-width="4"/>')
    for k, (b, lab) in enumerate(zip(boundaries, labels)):
        color = COLORS[k % len(COLORS)]
        for c in b.curves:
            p = np.vstack([c.points, c.points[:1]])
            coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in p)
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = MARGIN["top"] + 16 + 16 * k
        lx = MARGIN["left"] + side - 120
        parts.append(f'<text x="{lx}" y="{ly}" fill="{color}">{escape(str(lab))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
