"""Minimal SVG line plots, so reports need no plotting dependency."""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 560, 360
MARGIN = 56
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _transform(v: float, log: bool) -> float:
    return math.log10(v) if log else v


def line_plot(series: dict[str, tuple[list[float], list[float]]], path: str | Path, *,
              title: str = "", xlabel: str = "", ylabel: str = "",
              logx: bool = False, logy: bool = False) -> Path:
    """Write one polyline per named series; non-finite or non-positive (on log
    axes) points are dropped."""
    pts = {}
    for name, (xs, ys) in series.items():
        keep = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if (logx and x <= 0) or (logy and y <= 0):
                continue
            keep.append((_transform(x, logx), _transform(y, logy)))
        if keep:
            pts[name] = keep
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
           f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#444"/>',
           f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" '
           f'font-size="13">{escape(title)}</text>',
           f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">'
           f'{escape(xlabel + (" (log10)" if logx else ""))}</text>',
           f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" '
           f'transform="rotate(-90 14 {HEIGHT / 2})">'
           f'{escape(ylabel + (" (log10)" if logy else ""))}</text>']
    for k in range(5):
        fx = x0 + k * (x1 - x0) / 4
        fy = y0 + k * (y1 - y0) / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{HEIGHT - MARGIN + 14}" '
                   f'text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{MARGIN - 4}" y="{sy(fy) + 4:.1f}" '
                   f'text-anchor="end">{fy:.3g}</text>')
    for i, (name, p) in enumerate(pts.items()):
        colour = COLOURS[i % len(COLOURS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}"/>')
        for x, y in p:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2" fill="{colour}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 + 14 * i}" '
                   f'text-anchor="end" fill="{colour}">{escape(name)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
