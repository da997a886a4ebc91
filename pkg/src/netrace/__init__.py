"""Discrete-event models of classroom networking races."""

from .core import (
    ArrivalConvention, ChainScenario, Event, EventKind, LinkSpec, RachScenario,
    ScenarioError, SdnScenario, Timeline, WebScenario, validate,
)

__version__ = "0.1.0"
