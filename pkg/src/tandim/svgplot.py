"""Minimal deterministic SVG line charts. No plotting dependency: artifacts
must be byte-identical across reruns, so everything is formatted with fixed
precision and emitted in input order."""

from __future__ import annotations

import math

from .errors import InputError

WIDTH = 640
HEIGHT = 420
MARGIN = 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    t = math.ceil(lo / step) * step
    out = []
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def line_chart(series, title: str = "", xlabel: str = "", ylabel: str = "",
               logy: bool = False) -> str:
    """series: iterable of (name, xs, ys). Returns an SVG document string."""
    series = [(str(name), [float(v) for v in xs], [float(v) for v in ys])
              for name, xs, ys in series]
    if not series or any(len(xs) != len(ys) or not xs for _, xs, ys in series):
        raise InputError("line_chart needs non-empty series of equal-length x and y")
    if logy:
        for _, _, ys in series:
            if any(v <= 0 for v in ys):
                raise InputError("log-scale chart needs positive y values")
        series = [(n, xs, [math.log10(v) for v in ys]) for n, xs, ys in series]
    x_lo = min(min(xs) for _, xs, _ in series)
    x_hi = max(max(xs) for _, xs, _ in series)
    y_lo = min(min(ys) for _, _, ys in series)
    y_hi = max(max(ys) for _, _, ys in series)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    iw = WIDTH - 2 * MARGIN
    ih = HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + iw * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        return HEIGHT - MARGIN - ih * (y - y_lo) / (y_hi - y_lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{iw}" height="{ih}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH // 2}" y="{MARGIN - 28}" '
                     f'text-anchor="middle" font-size="13">{title}</text>')
    for t in _ticks(x_lo, x_hi):
        X = _fmt(sx(t))
        parts.append(f'<line x1="{X}" y1="{HEIGHT - MARGIN}" x2="{X}" '
                     f'y2="{HEIGHT - MARGIN + 4}" stroke="#333"/>')
        parts.append(f'<text x="{X}" y="{HEIGHT - MARGIN + 16}" '
                     f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        Y = _fmt(sy(t))
        label = f"1e{_fmt(t)}" if logy else _fmt(t)
        parts.append(f'<line x1="{MARGIN - 4}" y1="{Y}" x2="{MARGIN}" '
                     f'y2="{Y}" stroke="#333"/>')
        parts.append(f'<text x="{MARGIN - 7}" y="{Y}" text-anchor="end" '
                     f'dominant-baseline="middle">{label}</text>')
    if xlabel:
        parts.append(f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" '
                     f'transform="rotate(-90 16 {HEIGHT // 2})">{ylabel}</text>')
    for k, (name, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        ly = MARGIN + 14 + 14 * k
        parts.append(f'<line x1="{WIDTH - MARGIN - 90}" y1="{ly - 4}" '
                     f'x2="{WIDTH - MARGIN - 72}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{WIDTH - MARGIN - 66}" y="{ly}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def ratio_chart(g, title: str = "") -> str:
    """g/h against log h for the first grid row and the middle row."""
    rows = [0, g.N // 2]
    series = []
    for i in rows:
        M = g.max_offset(i)
        if M < 1:
            continue
        hs, ys = [], []
        for m in range(1, M + 1):
            h = g.h_of(i, m)
            hs.append(math.log(h))
            ys.append(g.g_im(i, m) / h)
        series.append((f"t={_fmt(g.t[i])}", hs, ys))
    return line_chart(series, title=title or "ratio profile",
                      xlabel="log h", ylabel="g/h")
