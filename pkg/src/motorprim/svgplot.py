"""Minimal self-contained SVG plotting: time series, planar paths, and
heat maps as pixel grids. No external tooling; output is deterministic
for identical inputs.
"""

from __future__ import annotations

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 34, 46


def _f(x):
    return format(float(x), ".6g")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step / 2, step)


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts = []
        self.xlim, self.ylim = xlim, ylim
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{_H}" viewBox="0 0 {_W} {_H}">')
        self.parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
        self.parts.append(
            f'<text x="{_W/2:.0f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>')
        self.parts.append(
            f'<text x="{_W/2:.0f}" y="{_H-8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{xlabel}</text>')
        self.parts.append(
            f'<text x="14" y="{_H/2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 14 {_H/2:.0f})">{ylabel}</text>')

    def x(self, v):
        lo, hi = self.xlim
        return _ML + (v - lo) / (hi - lo) * (_W - _ML - _MR)

    def y(self, v):
        lo, hi = self.ylim
        return _H - _MB - (v - lo) / (hi - lo) * (_H - _MT - _MB)

    def axes(self):
        x0, x1 = _ML, _W - _MR
        y0, y1 = _H - _MB, _MT
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1-x0}" height="{y0-y1}" '
            f'fill="none" stroke="black" stroke-width="1"/>')
        for v in _ticks(*self.xlim):
            px = self.x(v)
            if x0 - 0.5 <= px <= x1 + 0.5:
                self.parts.append(
                    f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" '
                    f'y2="{y0+4}" stroke="black"/>')
                self.parts.append(
                    f'<text x="{px:.1f}" y="{y0+16}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="10">{_f(v)}</text>')
        for v in _ticks(*self.ylim):
            py = self.y(v)
            if y1 - 0.5 <= py <= y0 + 0.5:
                self.parts.append(
                    f'<line x1="{x0-4}" y1="{py:.1f}" x2="{x0}" '
                    f'y2="{py:.1f}" stroke="black"/>')
                self.parts.append(
                    f'<text x="{x0-7}" y="{py+3:.1f}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="10">{_f(v)}</text>')

    def polyline(self, xs, ys, color, width=1.3, dash=None):
        pts = " ".join(f"{self.x(a):.2f},{self.y(b):.2f}"
                       for a, b in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{extra}/>')

    def legend(self, labels):
        x, y = _ML + 10, _MT + 14
        for i, lab in enumerate(labels):
            c = _COLORS[i % len(_COLORS)]
            self.parts.append(
                f'<line x1="{x}" y1="{y-4}" x2="{x+18}" y2="{y-4}" '
                f'stroke="{c}" stroke-width="2"/>')
            self.parts.append(
                f'<text x="{x+23}" y="{y}" font-family="sans-serif" '
                f'font-size="11">{lab}</text>')
            y += 15

    def save(self, path):
        self.parts.append("</svg>")
        with open(path, "w", newline="\n") as f:
            f.write("\n".join(self.parts) + "\n")


def _limits(arrays, pad=0.05):
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def line_plot(path, series, title="", xlabel="t [s]", ylabel=""):
    """``series`` is a list of (x, y, label) triples sharing the canvas."""
    xs = [np.asarray(s[0], dtype=float) for s in series]
    ys = [np.asarray(s[1], dtype=float) for s in series]
    cv = _Canvas(title, xlabel, ylabel, _limits(xs, 0.0), _limits(ys))
    cv.axes()
    for i, (x, y) in enumerate(zip(xs, ys)):
        step = max(1, len(x) // 1500)  # keep files small on long traces
        cv.polyline(x[::step], y[::step], _COLORS[i % len(_COLORS)])
    cv.legend([s[2] for s in series])
    cv.save(path)


def path_plot(path, curves, title="", xlabel="x [m]", ylabel="y [m]",
              markers=()):
    """Planar paths with equal axis scaling; ``markers`` are (x, y, label)."""
    xs = [np.asarray(c[0], dtype=float) for c in curves]
    ys = [np.asarray(c[1], dtype=float) for c in curves]
    xlim, ylim = _limits(xs), _limits(ys)
    # equalize scales about the midpoints
    span = max(xlim[1] - xlim[0], ylim[1] - ylim[0])
    xm, ym = (xlim[0] + xlim[1]) / 2, (ylim[0] + ylim[1]) / 2
    cv = _Canvas(title, xlabel, ylabel,
                 (xm - span / 2, xm + span / 2), (ym - span / 2, ym + span / 2))
    cv.axes()
    for i, (x, y) in enumerate(zip(xs, ys)):
        step = max(1, len(x) // 2000)
        cv.polyline(x[::step], y[::step], _COLORS[i % len(_COLORS)])
    for mx, my, lab in markers:
        px, py = cv.x(mx), cv.y(my)
        cv.parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" '
                        f'fill="black"/>')
        cv.parts.append(f'<text x="{px+6:.1f}" y="{py-5:.1f}" '
                        f'font-family="sans-serif" font-size="10">{lab}</text>')
    cv.legend([c[2] for c in curves])
    cv.save(path)


def _colormap(u):
    """Simple blue -> white -> red map on [0, 1]."""
    u = float(np.clip(u, 0.0, 1.0))
    if u < 0.5:
        f = u / 0.5
        r, g, b = 31 + f * (255 - 31), 119 + f * (255 - 119), 180 + f * (255 - 180)
    else:
        f = (u - 0.5) / 0.5
        r, g, b = 255 - f * (255 - 214), 255 - f * (255 - 39), 255 - f * (255 - 40)
    return f"rgb({r:.0f},{g:.0f},{b:.0f})"


def heatmap(path, Z, extent, title="", xlabel="", ylabel=""):
    """Pixel-grid heat map of a 2-D field; ``extent`` is (x0, x1, y0, y1).

    Low values plot blue, high values red; the value range is annotated in
    the title line.
    """
    Z = np.asarray(Z, dtype=float)
    zmin, zmax = float(Z.min()), float(Z.max())
    cv = _Canvas(f"{title} [{_f(zmin)}, {_f(zmax)}]", xlabel, ylabel,
                 (extent[0], extent[1]), (extent[2], extent[3]))
    n1, n2 = Z.shape
    dx = (extent[1] - extent[0]) / n1
    dy = (extent[3] - extent[2]) / n2
    rng = zmax - zmin if zmax > zmin else 1.0
    for i in range(n1):
        for j in range(n2):
            x0 = cv.x(extent[0] + i * dx)
            y0 = cv.y(extent[2] + (j + 1) * dy)
            w = cv.x(extent[0] + (i + 1) * dx) - x0
            h = cv.y(extent[2] + j * dy) - y0
            cv.parts.append(
                f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{w+0.3:.2f}" '
                f'height="{h+0.3:.2f}" fill="{_colormap((Z[i, j]-zmin)/rng)}"/>')
    cv.axes()
    cv.save(path)
