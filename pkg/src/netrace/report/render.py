"""Timing diagrams: fixed-width text Gantt charts and hand-written SVG.

One lane per node.  A unit sent by a node occupies that node's lane from
its transmission start until it physically reaches the next node, so the
lane of a node is busy exactly while its outgoing link carries something.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional
from xml.sax.saxutils import escape

from ..core import EventKind, Timeline, format_seconds

K = EventKind

TEXT_MAX_COLUMNS = 120
LANE_HEIGHT = 40
SVG_LEFT = 90
SVG_TOP = 40

_MARKS = {
    K.QUERY_DISPATCH: ">", K.QUERY_RETURN: "<", K.CONNECTED: "+",
    K.SLOT_SUCCESS: "o", K.SLOT_COLLISION: "x",
}


def lanes(timeline: Timeline) -> list[str]:
    """Nodes in order of first appearance."""
    seen: dict[str, None] = {}
    for e in timeline.events:
        seen.setdefault(e.node, None)
    return list(seen)


def _pair_units(timeline: Timeline):
    """Yield (start, end, prop_end, lane, to_lane, indices) per transmitted unit."""
    open_tx: dict[str, list] = {}
    out = []
    for i, e in enumerate(timeline.events):
        if e.kind is K.TX_START:
            open_tx[e.actor] = [e.time, None, e.node, [i]]
        elif e.kind is K.TX_END and e.actor in open_tx:
            rec = open_tx[e.actor]
            rec[1] = e.time
            rec[3].append(i)
        elif e.kind is K.PHYSICAL_ARRIVAL and e.actor in open_tx:
            start, end, node, idx = open_tx.pop(e.actor)
            end = start if end is None else end
            out.append((start, end, e.time, node, e.node, idx + [i]))
    return out


def activity_intervals(timeline: Timeline) -> dict[str, list[tuple[Fraction, Fraction]]]:
    """Busy intervals of every sending lane: transmission start to arrival."""
    busy: dict[str, list] = {}
    for start, end, arrive, node, _, _ in _pair_units(timeline):
        busy.setdefault(node, []).append((start, max(end, arrive)))
    return {k: sorted(v) for k, v in busy.items()}


def _text(timeline: Timeline, spc: Optional[Fraction]) -> str:
    tmax = max(timeline.completion_time, max(e.time for e in timeline.events))
    if spc is None:
        spc = Fraction(1) if tmax <= TEXT_MAX_COLUMNS else Fraction(math.ceil(tmax / TEXT_MAX_COLUMNS))
    ncols = max(1, math.ceil(tmax / spc))
    names = lanes(timeline)
    rows = {n: [" "] * ncols for n in names}

    def cells(a, b):
        # columns whose span overlaps [a, b) with positive length
        lo = int(a // spc)
        hi = min(ncols, math.ceil(b / spc))
        return range(max(lo, 0), hi)

    for start, end, arrive, node, _, _ in _pair_units(timeline):
        for c in cells(end, arrive):
            if rows[node][c] == " ":
                rows[node][c] = "."
        for c in cells(start, end):
            rows[node][c] = "#"
    for e in timeline.events:
        mark = _MARKS.get(e.kind)
        if mark:
            c = min(ncols - 1, int(e.time // spc))
            if rows[e.node][c] == " ":
                rows[e.node][c] = mark

    width = max(len(n) for n in names)
    axis = [" "] * (ncols + 1)
    for c in range(0, ncols + 1, 10):
        label = format_seconds(c * spc)
        for j, ch in enumerate(label):
            if c + j < len(axis):
                axis[c + j] = ch
    lines = [f"{timeline.label or 'timeline'}: completion {format_seconds(timeline.completion_time)} s",
             f"scale: {format_seconds(spc)} s per column; # transmitting, . propagating",
             " " * (width + 1) + "".join(axis).rstrip()]
    for n in names:
        lines.append(f"{n:<{width}}|" + "".join(rows[n]) + "|")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    text = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _svg(timeline: Timeline, px_per_second: Optional[float]) -> str:
    tmax = float(max(timeline.completion_time, max(e.time for e in timeline.events)))
    if px_per_second is None:
        px_per_second = 10.0 if tmax <= 100 else 1000.0 / tmax
    names = lanes(timeline)
    row = {n: i for i, n in enumerate(names)}
    width = SVG_LEFT + tmax * px_per_second + 40
    height = SVG_TOP + LANE_HEIGHT * len(names) + 20

    def x(t) -> str:
        return _fmt(SVG_LEFT + float(t) * px_per_second)

    def mid(node) -> float:
        return SVG_TOP + LANE_HEIGHT * row[node] + LANE_HEIGHT / 2

    def title(idx) -> str:
        return "<title>events " + " ".join(str(i) for i in idx) + "</title>"

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_fmt(width)}" height="{_fmt(height)}">',
           f"<title>{escape(timeline.label or 'timeline')}</title>",
           f'<g class="axis" font-size="10" font-family="monospace">',
           f'<line x1="{x(0)}" y1="{SVG_TOP - 15}" x2="{x(tmax)}" y2="{SVG_TOP - 15}" stroke="black"/>']
    step = max(1, 10 ** math.floor(math.log10(tmax)) if tmax > 0 else 1)
    if tmax / step < 4:
        step = step / 2 if step > 1 else step
    t = 0.0
    while t <= tmax + 1e-9:
        out.append(f'<line x1="{x(t)}" y1="{SVG_TOP - 18}" x2="{x(t)}" y2="{SVG_TOP - 12}" stroke="black"/>')
        out.append(f'<text x="{x(t)}" y="{SVG_TOP - 22}" text-anchor="middle">{_fmt(t)}</text>')
        t += step
    out.append(f'<text x="{x(tmax)}" y="{SVG_TOP - 30}" text-anchor="end">seconds</text>')
    out.append("</g>")
    out.append('<g class="lanes" font-size="11" font-family="monospace">')
    for n in names:
        y = mid(n)
        out.append(f'<text x="5" y="{_fmt(y + 4)}">{escape(n)}</text>')
        out.append(f'<line x1="{x(0)}" y1="{_fmt(y)}" x2="{x(tmax)}" y2="{_fmt(y)}" '
                   f'stroke="#cccccc"/>')
    out.append("</g>")

    drawn: set[int] = set()
    out.append('<g class="units">')
    for start, end, arrive, node, to, idx in _pair_units(timeline):
        y = mid(node)
        out.append(f'<rect class="tx" x="{x(start)}" y="{_fmt(y - 8)}" '
                   f'width="{_fmt(float(end - start) * px_per_second)}" height="16" '
                   f'fill="#4477aa" stroke="black" stroke-width="0.5">{title(idx[:-1])}</rect>')
        out.append(f'<line class="prop" x1="{x(start)}" y1="{_fmt(y + 8)}" x2="{x(arrive)}" '
                   f'y2="{_fmt(mid(to) - 8)}" stroke="#aa3377" stroke-width="0.7">'
                   f'{title(idx[-1:])}</line>')
        drawn.update(idx)
    out.append("</g>")

    out.append('<g class="marks">')
    last_seen: dict[str, tuple] = {}
    for i, e in enumerate(timeline.events):
        if i in drawn:
            last_seen[e.actor] = (e.time, e.node)
            continue
        prev = last_seen.get(e.actor)
        if e.kind is K.PHYSICAL_ARRIVAL and prev is not None and prev[1] != e.node:
            out.append(f'<line class="runner" x1="{x(prev[0])}" y1="{_fmt(mid(prev[1]))}" '
                       f'x2="{x(e.time)}" y2="{_fmt(mid(e.node))}" stroke="#228833" '
                       f'stroke-dasharray="3,2">{title([i])}</line>')
        else:
            out.append(f'<circle class="{e.kind.value}" cx="{x(e.time)}" cy="{_fmt(mid(e.node))}" '
                       f'r="2.5" fill="#ee6677">{title([i])}</circle>')
        last_seen[e.actor] = (e.time, e.node)
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_timeline(timeline: Timeline, fmt: str = "text", scale=None) -> str:
    """Render ``timeline`` as ``"text"`` or ``"svg"``.

    ``scale`` is seconds per column for text and pixels per second for SVG;
    by default text uses 1 s per column, coarsened to stay within 120
    columns, and SVG uses 10 px/s, shrunk for runs longer than 100 s.
    """
    if not timeline.events:
        raise ValueError("cannot render an empty timeline")
    if fmt == "text":
        return _text(timeline, None if scale is None else Fraction(scale))
    if fmt == "svg":
        return _svg(timeline, scale)
    raise ValueError(f"unknown render format {fmt!r}")
