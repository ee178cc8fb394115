"""Minimal self-contained SVG output (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

PANEL_W, PANEL_H = 260, 200
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 48, 16, 28, 36


def _fmt(v):
    return f"{v:.2f}"


def _header(width, height):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _axes(ox, oy, w, h, title, xticks, yticks, xlabel, ylabel):
    out = [
        f'<g transform="translate({ox},{oy})">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<text x="{w / 2}" y="-8" text-anchor="middle" font-size="11">{escape(title)}</text>',
        f'<text x="{w / 2}" y="{h + 28}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="-34" y="{h / 2}" text-anchor="middle" transform="rotate(-90 -34 {h / 2})">'
        f"{escape(ylabel)}</text>",
    ]
    for x, label in xticks:
        out.append(f'<line x1="{_fmt(x)}" y1="{h}" x2="{_fmt(x)}" y2="{h + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{h + 14}" text-anchor="middle">{escape(label)}</text>')
    for y, label in yticks:
        out.append(f'<line x1="-4" y1="{_fmt(y)}" x2="0" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="-6" y="{_fmt(y + 3)}" text-anchor="end">{escape(label)}</text>')
    return out


def badness_figure(panels, estimators, ps, zeta_max=1e6):
    """Grid of badness-set panels: one row per estimator, one column per p.

    ``panels[(estimator, p)]`` is a list of ``(zeta, intervals)``; ``zeta``
    is drawn on a log axis over [1, zeta_max] and ``inf`` in a separate
    column at the right edge. Each interval is a vertical segment; a
    degenerate interval is a dot.
    """
    w, h = PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B
    width = PANEL_W * len(ps)
    height = PANEL_H * len(estimators)
    out = _header(width, height)
    lmax = math.log10(zeta_max)
    inf_x = w - 10.0

    def xpos(z):
        if math.isinf(z):
            return inf_x
        lz = math.log10(max(z, 1.0))
        return (inf_x - 20.0) * min(lz, lmax) / lmax

    def ypos(v):
        return h * (1.0 - (max(-1.05, min(1.05, v)) + 1.05) / 2.1)

    decades = range(0, int(lmax) + 1, 2)
    xticks = [(xpos(10.0 ** d), f"1e{d}") for d in decades] + [(inf_x, "inf")]
    yticks = [(ypos(v), f"{v:g}") for v in (-1, -0.5, 0, 0.5, 1)]
    for r, est in enumerate(estimators):
        for c, p in enumerate(ps):
            ox = c * PANEL_W + MARGIN_L
            oy = r * PANEL_H + MARGIN_T
            out += _axes(ox, oy, w, h, f"{est}  p = {p:g}", xticks, yticks, "zeta", "badness set")
            for z, intervals in panels.get((est, p), []):
                x = xpos(z)
                for lo, hi in intervals:
                    y1, y2 = ypos(hi), ypos(lo)
                    if y2 - y1 < 1.0:
                        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y1)}" r="1.5" fill="steelblue"/>')
                    else:
                        out.append(
                            f'<line x1="{_fmt(x)}" y1="{_fmt(y1)}" x2="{_fmt(x)}" y2="{_fmt(y2)}" '
                            'stroke="steelblue" stroke-width="2"/>'
                        )
            out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter(series, title, xlabel, ylabel, logy=False):
    """Single-panel scatter. ``series`` maps a label to ``(xs, ys)``."""
    colors = ("steelblue", "darkorange", "seagreen", "firebrick", "purple")
    w, h = 420, 260
    width, height = w + 160, h + 70
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys)
           if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy)]
    out = _header(width, height)
    if not pts:
        out += _axes(56, 30, w, h, title, [], [], xlabel, ylabel) + ["</g>", "</svg>"]
        return "\n".join(out) + "\n"
    tf = (lambda v: math.log10(v)) if logy else (lambda v: v)
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(tf(p[1]) for p in pts), max(tf(p[1]) for p in pts)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def xp(v):
        return w * (v - x0) / (x1 - x0)

    def yp(v):
        return h * (1.0 - (tf(v) - y0) / (y1 - y0))

    xticks = [(xp(x0 + i * (x1 - x0) / 4), f"{x0 + i * (x1 - x0) / 4:.3g}") for i in range(5)]
    yt = [y0 + i * (y1 - y0) / 4 for i in range(5)]
    yticks = [(h * (1.0 - (v - y0) / (y1 - y0)), f"1e{v:.1f}" if logy else f"{v:.3g}") for v in yt]
    out += _axes(56, 30, w, h, title, xticks, yticks, xlabel, ylabel)
    for i, (label, (xs, ys)) in enumerate(series.items()):
        col = colors[i % len(colors)]
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy):
                out.append(f'<circle cx="{_fmt(xp(x))}" cy="{_fmt(yp(y))}" r="2" fill="{col}"/>')
        out.append(f'<text x="{w + 12}" y="{14 * i + 10}" fill="{col}">{escape(label)}</text>')
    out += ["</g>", "</svg>"]
    return "\n".join(out) + "\n"
