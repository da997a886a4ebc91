"""Matplotlib versions of the timing diagram and the flow-size sweep."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..core import Timeline  # noqa: E402
from .render import activity_intervals, lanes  # noqa: E402

# fixed metadata keeps repeated runs byte-identical
_META = {"Software": None}


def timeline_figure(timeline: Timeline, path, width: float = 8.0) -> None:
    names = lanes(timeline)
    busy = activity_intervals(timeline)
    fig, ax = plt.subplots(figsize=(width, 0.45 * len(names) + 1.2))
    for i, n in enumerate(names):
        spans = [(float(a), float(b - a)) for a, b in busy.get(n, [])]
        if spans:
            ax.broken_barh(spans, (i - 0.3, 0.6), facecolors="tab:blue", alpha=0.6)
    ax.set_yticks(range(len(names)), names)
    ax.invert_yaxis()
    ax.set_xlim(0, float(timeline.completion_time) * 1.02 or 1)
    ax.set_xlabel("time (s)")
    ax.set_title(f"{timeline.label}: {float(timeline.completion_time):g} s")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def sweep_figure(rows, path) -> None:
    """IP and SDN completion against flow size."""
    F = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(F, [float(r[1]) for r in rows], "o-", label="IP")
    ax.plot(F, [float(r[2]) for r in rows], "s-", label="SDN")
    ax.set_xlabel("packets per source")
    ax.set_ylabel("completion (s)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
