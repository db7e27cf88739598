"""Tiny dependency-free SVG line plots for the emitted sweep data."""

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_WIDTH, _HEIGHT = 640, 440
_MARGIN = 70


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    value = start
    while value <= hi + 1e-12 * span:
        ticks.append(value)
        value += step
    return ticks


def write_line_plot(path, series, title="", xlabel="", ylabel=""):
    """Write a line plot to an SVG file.

    series: iterable of (x values, y values, label).
    """
    series = [(list(x), list(y), label) for x, y, label in series]
    xs = [v for x, _, _ in series for v in x]
    ys = [v for _, y, _ in series for v in y]
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def px(x):
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - 2 * _MARGIN)

    def py(y):
        return _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_HEIGHT - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{_HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_HEIGHT / 2})">{ylabel}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="black"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{px(tick):.1f}" y1="{_HEIGHT - _MARGIN}" x2="{px(tick):.1f}" '
            f'y2="{_HEIGHT - _MARGIN + 5}" stroke="black"/>'
            f'<text x="{px(tick):.1f}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
            f'font-size="10">{tick:.4g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{_MARGIN - 5}" y1="{py(tick):.1f}" x2="{_MARGIN}" y2="{py(tick):.1f}" '
            f'stroke="black"/>'
            f'<text x="{_MARGIN - 8}" y="{py(tick):.1f}" text-anchor="end" '
            f'font-size="10" dominant-baseline="middle">{tick:.4g}</text>'
        )
    for i, (x, y, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        points = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if label:
            y_leg = _MARGIN + 16 + 16 * i
            parts.append(
                f'<line x1="{_WIDTH - _MARGIN - 90}" y1="{y_leg}" x2="{_WIDTH - _MARGIN - 70}" '
                f'y2="{y_leg}" stroke="{color}" stroke-width="2"/>'
                f'<text x="{_WIDTH - _MARGIN - 64}" y="{y_leg + 4}" font-size="11">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as handle:
        handle.write("\n".join(parts) + "\n")
