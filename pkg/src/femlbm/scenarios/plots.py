"""Minimal standalone SVG line plots for scenario outputs.

No plotting dependency: each plot is a fixed-size SVG with axes, tick
labels, polyline series and an optional log-log slope reference line.
The numeric content always mirrors the CSV emitted alongside.
"""

import numpy as np

_WIDTH, _HEIGHT = 640, 480
_MARGIN = 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _transform(values, log):
    values = np.asarray(values, float)
    if log:
        if np.any(values <= 0.0):
            raise ValueError("log axis requires positive data")
        return np.log10(values)
    return values


def _axis_range(vals):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def _fmt(value, log):
    return f"{10.0 ** value:.3g}" if log else f"{value:.3g}"


def line_plot(path, series, xlabel="x", ylabel="y", title="",
              logx=False, logy=False, ref_slope=None):
    """Write an SVG line plot.

    `series` is a list of (label, x array, y array). With `ref_slope` and
    log axes, a dashed reference line of that log-log slope is anchored
    at the first point of the first series.
    """
    drawable = [
        (label, _transform(x, logx), _transform(y, logy))
        for label, x, y in series
        if len(np.atleast_1d(x))
    ]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    x0, x1 = _MARGIN, _WIDTH - _MARGIN
    y0, y1 = _HEIGHT - _MARGIN, _MARGIN
    if drawable:
        all_x = np.concatenate([x for _, x, _ in drawable])
        all_y = np.concatenate([y for _, _, y in drawable])
        xlo, xhi = _axis_range(all_x)
        ylo, yhi = _axis_range(all_y)

        def sx(v):
            return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

        def sy(v):
            return y0 - (v - ylo) / (yhi - ylo) * (y0 - y1)

        for tick in _ticks(xlo, xhi):
            px = sx(tick)
            parts.append(
                f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" '
                f'stroke="black"/>'
            )
            parts.append(
                f'<text x="{px:.2f}" y="{y0 + 20}" font-size="12" '
                f'text-anchor="middle">{_fmt(tick, logx)}</text>'
            )
        for tick in _ticks(ylo, yhi):
            py = sy(tick)
            parts.append(
                f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" '
                f'stroke="black"/>'
            )
            parts.append(
                f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="12" '
                f'text-anchor="end">{_fmt(tick, logy)}</text>'
            )
        for k, (label, x, y) in enumerate(drawable):
            color = _COLORS[k % len(_COLORS)]
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
            parts.append(
                f'<text x="{x1 - 8}" y="{y1 + 16 + 16 * k}" font-size="12" '
                f'text-anchor="end" fill="{color}">{label}</text>'
            )
        if ref_slope is not None and logx and logy:
            _, x, y = drawable[0]
            xa, xb = float(x.min()), float(x.max())
            ya = float(y[np.argmin(x)])
            yb = ya + ref_slope * (xb - xa)
            parts.append(
                f'<line x1="{sx(xa):.2f}" y1="{sy(ya):.2f}" '
                f'x2="{sx(xb):.2f}" y2="{sy(yb):.2f}" stroke="gray" '
                f'stroke-dasharray="6,4"/>'
            )
            parts.append(
                f'<text x="{sx(xb):.2f}" y="{sy(yb) - 6:.2f}" font-size="12" '
                f'text-anchor="end" fill="gray">slope {ref_slope:g}</text>'
            )
    #axes frame drawn last so it overlays series endpoints
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{(x0 + x1) / 2}" y="{_HEIGHT - 15}" font-size="14" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2}" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 18 {(y0 + y1) / 2})">'
        f'{ylabel}</text>'
    )
    if title:
        parts.append(
            f'<text x="{(x0 + x1) / 2}" y="30" font-size="16" '
            f'text-anchor="middle">{title}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
