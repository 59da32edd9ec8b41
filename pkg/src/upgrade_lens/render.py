"""Dependency-free deterministic SVG rendering for reports.

Histogram bars carry class="bar" and scatter points class="pt" (the
highlighted series additionally "highlight"), so emitted documents are
machine-checkable. Coordinates are formatted with fixed precision; the
same data always renders byte-identical output.
"""

from __future__ import annotations

from typing import Sequence

WIDTH = 640
HEIGHT = 480
MARGIN = 56

_HEADER = (
    '<svg xmlns="http://www.w3.org/2000/svg" '
    f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _frame(title: str, body: list[str]) -> str:
    parts = [
        _HEADER,
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{_escape(title)}</text>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _axes(x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> list[str]:
    left, right = MARGIN, WIDTH - MARGIN
    top, bottom = MARGIN, HEIGHT - MARGIN
    return [
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{left}" y="{bottom + 18}" font-size="10" text-anchor="middle">{_fmt(x_lo)}</text>',
        f'<text x="{right}" y="{bottom + 18}" font-size="10" text-anchor="middle">{_fmt(x_hi)}</text>',
        f'<text x="{left - 6}" y="{bottom}" font-size="10" text-anchor="end">{_fmt(y_lo)}</text>',
        f'<text x="{left - 6}" y="{top + 4}" font-size="10" text-anchor="end">{_fmt(y_hi)}</text>',
    ]


def _placeholder(title: str) -> str:
    return _frame(
        title,
        [f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT / 2:.0f}" text-anchor="middle" font-size="14">no data</text>'],
    )


def render_histogram_svg(edges: Sequence[float], counts: Sequence[int], title: str) -> str:
    """Standalone bar chart of a histogram; one rect per bin."""
    if not counts:
        return _placeholder(title)
    x_lo, x_hi = edges[0], edges[-1]
    span = (x_hi - x_lo) or 1.0
    y_hi = max(max(counts), 1)
    left, bottom = MARGIN, HEIGHT - MARGIN
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    body = _axes(x_lo, x_hi, 0, y_hi)
    for i, count in enumerate(counts):
        e_lo = edges[i] if len(edges) > i else x_lo
        e_hi = edges[i + 1] if len(edges) > i + 1 else x_hi
        x = left + (e_lo - x_lo) / span * plot_w
        w = max((e_hi - e_lo) / span * plot_w, 1.0)
        h = count / y_hi * plot_h
        y = bottom - h
        body.append(
            f'<rect class="bar" x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(h)}" fill="steelblue" stroke="white"/>'
        )
    return _frame(title, body)


def render_scatter_svg(
    points: Sequence[tuple[float, float]],
    highlight: Sequence[int],
    title: str,
) -> str:
    """Scatter plot; indices in ``highlight`` are drawn as a distinct red series."""
    if not points:
        return _placeholder(title)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    left, bottom = MARGIN, HEIGHT - MARGIN
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN
    marked = set(highlight)
    body = _axes(x_lo, x_hi, y_lo, y_hi)
    ordinary = [
        f'<circle class="pt" cx="{_fmt(left + (x - x_lo) / x_span * plot_w)}" '
        f'cy="{_fmt(bottom - (y - y_lo) / y_span * plot_h)}" r="3" fill="steelblue" fill-opacity="0.7"/>'
        for i, (x, y) in enumerate(points)
        if i not in marked
    ]
    flagged = [
        f'<circle class="pt highlight" cx="{_fmt(left + (x - x_lo) / x_span * plot_w)}" '
        f'cy="{_fmt(bottom - (y - y_lo) / y_span * plot_h)}" r="4" fill="red"/>'
        for i, (x, y) in enumerate(points)
        if i in marked
    ]
    return _frame(title, body + ordinary + flagged)
