"""Minimal native SVG line charts (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 960, 540
MARGIN = dict(left=90, right=200, top=50, bottom=70)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
LOG_FLOOR = 1e-300


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * abs(step):
        ticks.append(t)
        t += step
    return ticks


def line_chart(series, title: str = "", xlabel: str = "", ylabel: str = "", log_y: bool = False) -> str:
    """Render ``[(label, xs, ys), ...]`` as an SVG document string.

    With ``log_y`` the y values are plotted as ``log10`` (nonpositive values are
    clamped to a tiny floor).
    """
    prepared = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if log_y:
            ys = np.log10(np.maximum(ys, LOG_FLOOR))
        prepared.append((str(label), xs, ys))
    allx = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(1)
    ally = np.concatenate([p[2] for p in prepared]) if prepared else np.zeros(1)
    ally = ally[np.isfinite(ally)]
    if ally.size == 0:
        ally = np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if log_y:
        y0, y1 = math.floor(y0), math.ceil(y1)

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="13">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#444"/>',
    ]
    for t in _nice_ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{_fmt(X)}" y1="{MARGIN["top"] + ph}" x2="{_fmt(X)}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(X)}" y="{MARGIN["top"] + ph + 20}" text-anchor="middle">{t:g}</text>')
    yticks = range(int(y0), int(y1) + 1) if log_y else _nice_ticks(y0, y1)
    if log_y and len(yticks) > 12:
        stride = math.ceil(len(yticks) / 10)
        yticks = yticks[::stride]
    for t in yticks:
        Y = sy(t)
        label = f"1e{int(t)}" if log_y else f"{t:g}"
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{_fmt(Y)}" x2="{MARGIN["left"] + pw}" '
                   f'y2="{_fmt(Y)}" stroke="#ddd"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 20}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="22" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 22 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(prepared):
        color = PALETTE[k % len(PALETTE)]
        ok = np.isfinite(ys)
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xs[ok], ys[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN["top"] + 20 + 22 * k
        lx = MARGIN["left"] + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
