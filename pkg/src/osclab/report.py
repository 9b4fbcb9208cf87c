"""Report emission: CSV tables with exact rationals and static SVG plots.

CSV files are written deterministically (fixed column order, ``repr``
floats, rationals rendered ``p/q``) so re-running a scenario reproduces
byte-identical artifacts.  Plots are self-contained SVG polyline charts
with an optional fitted-slope annotation.
"""

from __future__ import annotations

import csv
import io
from fractions import Fraction

import numpy as np

__all__ = ["render_cell", "write_csv", "polyline_svg"]


def render_cell(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([render_cell(x) for x in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(x) for x in raw]


def polyline_svg(path, xs, ys, title: str = "", xlabel: str = "t",
                 ylabel: str = "value", fit_slope: float | None = None,
                 width: int = 640, height: int = 420):
    """Minimal deterministic SVG line chart; optionally overlays the line of
    the given slope through the last sample and annotates it."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if y1 - y0 < 1e-300:
        y0, y1 = y0 - 1.0, y1 + 1.0
    mx, my = 70.0, 46.0

    def X(x):
        return mx + (x - x0) / (x1 - x0 + 1e-300) * (width - 2 * mx)

    def Y(y):
        return height - my - (y - y0) / (y1 - y0) * (height - 2 * my)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="22" text-anchor="middle" '
        f'font-size="15" font-family="sans-serif">{title}</text>',
    ]
    # axes
    parts.append(f'<line x1="{mx}" y1="{height-my}" x2="{width-mx}" '
                 f'y2="{height-my}" stroke="black"/>')
    parts.append(f'<line x1="{mx}" y1="{my}" x2="{mx}" y2="{height-my}" '
                 f'stroke="black"/>')
    for tx in _ticks(x0, x1):
        parts.append(f'<text x="{X(tx):.1f}" y="{height-my+18:.1f}" '
                     f'text-anchor="middle" font-size="11" '
                     f'font-family="sans-serif">{tx:.3g}</text>')
    for ty in _ticks(y0, y1):
        parts.append(f'<text x="{mx-8:.1f}" y="{Y(ty)+4:.1f}" '
                     f'text-anchor="end" font-size="11" '
                     f'font-family="sans-serif">{ty:.3g}</text>')
    parts.append(f'<text x="{width/2:.1f}" y="{height-8}" '
                 f'text-anchor="middle" font-size="12" '
                 f'font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="16" y="{height/2:.1f}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif" '
                 f'transform="rotate(-90 16 {height/2:.1f})">{ylabel}</text>')
    pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" '
                 f'stroke-width="1.8"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="2.6" '
                     f'fill="#1f5fa8"/>')
    if fit_slope is not None:
        yy = ys[-1] + fit_slope * (xs - xs[-1])
        pts2 = " ".join(f"{X(x):.2f},{Y(min(max(y, y0), y1)):.2f}"
                        for x, y in zip(xs, yy))
        parts.append(f'<polyline points="{pts2}" fill="none" '
                     f'stroke="#c03a2b" stroke-width="1.2" '
                     f'stroke-dasharray="6 4"/>')
        parts.append(f'<text x="{width-mx:.1f}" y="{my+14:.1f}" '
                     f'text-anchor="end" font-size="12" fill="#c03a2b" '
                     f'font-family="sans-serif">slope {fit_slope:.6g}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
