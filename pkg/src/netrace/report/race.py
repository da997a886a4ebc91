"""Race comparison: who finished first and by how much."""

from __future__ import annotations

import csv
import io

from ..core import RaceReport, Timeline, format_seconds


def compare_races(a: Timeline, b: Timeline, labels=("first", "second")) -> RaceReport:
    ta, tb = a.completion_time, b.completion_time
    if ta == tb:
        winner = "tie"
    else:
        winner = labels[0] if ta < tb else labels[1]
    return RaceReport(tuple(labels), (ta, tb), winner, abs(ta - tb), (a, b))


def outcome_line(rep: RaceReport) -> str:
    if rep.winner == "tie":
        return f"tie at {format_seconds(rep.times[0])} s"
    return f"{rep.winner} wins by {format_seconds(rep.margin)} s"


def format_race(rep: RaceReport) -> str:
    """Two-column aligned table followed by the outcome line."""
    left, right = rep.labels
    times = [f"{format_seconds(t)} s" for t in rep.times]
    w0 = max(len("configuration"), len(left), len(right))
    w1 = max(len("completion"), *(len(t) for t in times))
    lines = [f"{'configuration':<{w0}}  {'completion':>{w1}}",
             f"{'-' * w0}  {'-' * w1}",
             f"{left:<{w0}}  {times[0]:>{w1}}",
             f"{right:<{w0}}  {times[1]:>{w1}}",
             outcome_line(rep)]
    return "\n".join(lines) + "\n"


def race_csv(rep: RaceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["configuration", "seconds"])
    for label, t in zip(rep.labels, rep.times):
        w.writerow([label, format_seconds(t)])
    w.writerow(["winner", rep.winner])
    w.writerow(["margin", format_seconds(rep.margin)])
    return buf.getvalue()


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["F", "ip_seconds", "sdn_seconds", "winner"])
    for F, ip, sdn, winner in rows:
        w.writerow([F, format_seconds(ip), format_seconds(sdn), winner])
    return buf.getvalue()
