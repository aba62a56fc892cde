"""Minimal SVG quick-look plots (no plotting dependency).

Static files only: component weights and current versus time, and
collapse-time histograms overlaid on the normalized capture curve.
"""

from __future__ import annotations

import io

import numpy as np

W, H = 720, 420
MARGIN = 50


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(values, dtype=float) - lo) / span * (out_hi - out_lo)


def _polyline(xs, ys, color, width=1.5):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
            f'points="{pts}"/>\n')


def _frame(title: str, xlabel: str, ylabel: str) -> tuple[io.StringIO, float, float]:
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
              f'viewBox="0 0 {W} {H}">\n')
    out.write(f'<rect width="{W}" height="{H}" fill="white"/>\n')
    out.write(f'<text x="{W / 2}" y="20" text-anchor="middle" '
              f'font-family="sans-serif" font-size="14">{title}</text>\n')
    out.write(f'<line x1="{MARGIN}" y1="{H - MARGIN}" x2="{W - MARGIN}" '
              f'y2="{H - MARGIN}" stroke="black"/>\n')
    out.write(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
              f'y2="{H - MARGIN}" stroke="black"/>\n')
    out.write(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" '
              f'font-family="sans-serif" font-size="12">{xlabel}</text>\n')
    out.write(f'<text x="16" y="{H / 2}" text-anchor="middle" '
              f'font-family="sans-serif" font-size="12" '
              f'transform="rotate(-90 16 {H / 2})">{ylabel}</text>\n')
    return out, MARGIN, W - MARGIN


def _legend(out, entries):
    y = MARGIN + 8
    for color, label in entries:
        out.write(f'<line x1="{W - 190}" y1="{y}" x2="{W - 160}" y2="{y}" '
                  f'stroke="{color}" stroke-width="2"/>\n')
        out.write(f'<text x="{W - 152}" y="{y + 4}" font-family="sans-serif" '
                  f'font-size="11">{label}</text>\n')
        y += 16


def weights_svg(weights, window=None) -> str:
    out, x_lo, x_hi = _frame("component weights and capture current", "time",
                             "weight / normalized current")
    t = weights.times
    xs = _scale(t, t[0], t[-1], x_lo, x_hi)
    peak = weights.current.max()
    j_norm = weights.current / peak if peak > 0 else weights.current
    y = lambda v: _scale(v, 0.0, 1.0, H - MARGIN, MARGIN)
    if window is not None and getattr(window, "exists", False):
        wx0 = float(_scale([window.window_start], t[0], t[-1], x_lo, x_hi)[0])
        wx1 = float(_scale([window.window_end], t[0], t[-1], x_lo, x_hi)[0])
        out.write(f'<rect x="{wx0:.2f}" y="{MARGIN}" width="{wx1 - wx0:.2f}" '
                  f'height="{H - 2 * MARGIN}" fill="#f0e8ff"/>\n')
    out.write(_polyline(xs, y(weights.p_no_capture), "#1f77b4"))
    out.write(_polyline(xs, y(weights.p_capture), "#d62728"))
    out.write(_polyline(xs, y(j_norm), "#2ca02c"))
    _legend(out, [("#1f77b4", "p_no_capture"), ("#d62728", "p_capture"),
                  ("#2ca02c", "current / peak")])
    out.write("</svg>\n")
    return out.getvalue()


def histogram_svg(summary, weights) -> str:
    out, x_lo, x_hi = _frame(f"collapse times: {summary.rule}", "time",
                             "fraction / CDF")
    t = weights.times
    bins = summary.collapse_time_histogram
    total = sum(c for _, _, c in bins) or 1
    peak_frac = max((c / total for _, _, c in bins), default=0.0) or 1.0
    for lo, hi, count in bins:
        if count == 0:
            continue
        x0 = float(_scale([lo], t[0], t[-1], x_lo, x_hi)[0])
        x1 = float(_scale([hi], t[0], t[-1], x_lo, x_hi)[0])
        frac = (count / total) / peak_frac
        y0 = H - MARGIN - frac * (H - 2 * MARGIN)
        out.write(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{max(x1 - x0, 0.5):.2f}" '
                  f'height="{H - MARGIN - y0:.2f}" fill="#9ecae1"/>\n')
    final = weights.p_capture[-1]
    if final > 0:
        cdf = weights.p_capture / final
        xs = _scale(t, t[0], t[-1], x_lo, x_hi)
        ys = _scale(cdf, 0.0, 1.0, H - MARGIN, MARGIN)
        out.write(_polyline(xs, ys, "#d62728"))
    _legend(out, [("#9ecae1", "collapse-time histogram"),
                  ("#d62728", "normalized capture CDF")])
    out.write("</svg>\n")
    return out.getvalue()
