"""Rendering of timelines and race results.

The field planner lives in :mod:`netrace.report.plan` and matplotlib figures
in :mod:`netrace.report.figures`; neither is imported here so the
simulators can use this package without pulling them in.
"""

from .race import compare_races, format_race, race_csv, sweep_csv
from .render import activity_intervals, render_timeline

__all__ = ["compare_races", "format_race", "race_csv", "sweep_csv",
           "render_timeline", "activity_intervals"]
