"""IP-vs-SDN routing race on the two-source field layout.

Sources ``A`` and ``B`` both feed switch ``a``; ``a`` reaches ``C`` over the
top route ``b, c`` or the bottom route ``d, e``.  Classic IP sends both
flows along the bottom route.  SDN routes flow A on top and flow B on the
bottom, but switch ``a`` may only forward a flow once the controller's
policy for it is back (and, with per-node runners, every switch on the
route waits for its own runner).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .core import (
    ArrivalConvention, Event, EventKind, Mode, PerNodeRunners, RaceReport, Release,
    SdnScenario, Timeline, ensure_valid,
)
from .des import Flow, reception_rule, simulate_packet_flow_network
from .report.race import compare_races

TOPOLOGY = {
    "A": ["a"], "B": ["a"],
    "a": ["b", "d"], "b": ["c"], "c": ["C"],
    "d": ["e"], "e": ["C"],
    "C": [],
}
TOP = ("a", "b", "c", "C")
BOTTOM = ("a", "d", "e", "C")


def flow_paths(mode: Mode) -> dict[str, tuple[str, ...]]:
    if mode is Mode.CLASSIC_IP:
        return {"A": ("A",) + BOTTOM, "B": ("B",) + BOTTOM}
    return {"A": ("A",) + TOP, "B": ("B",) + BOTTOM}


@dataclass(frozen=True)
class ControlPlan:
    """Release times per (flow, switch) and the runner events producing them."""

    releases: dict
    events: tuple[Event, ...]


def _one_way(sc: SdnScenario) -> Fraction:
    """Runner time between switch ``a`` and the controller, hypervisor detour included."""
    v = sc.controller_leg.runner_speed
    if sc.hypervisor is not None:
        return (sc.hypervisor.node_distance + sc.hypervisor.controller_distance) / v
    return sc.controller_leg.distance / v


def first_reception_at_a(sc: SdnScenario) -> Fraction:
    """When the first packet of each flow counts as received at ``a``."""
    rule = reception_rule(sc.switching)
    t = sc.link.prop_delay
    return t + sc.link.tx_time if rule is ArrivalConvention.FULL else t


def control_plan(sc: SdnScenario) -> ControlPlan:
    """Work out when each SDN switch learns each flow's policy.

    The staff member at ``a`` handles flow A's query first and only then
    runs again for flow B.  With a single runner the policy comes back to
    ``a`` with that runner; with per-node runners the controller sends one
    runner to every switch on the flow's route.
    """
    K = EventKind
    t1 = first_reception_at_a(sc)
    up = _one_way(sc)
    trip = 2 * up
    v = sc.controller_leg.runner_speed
    paths = flow_paths(Mode.SDN_CENTRAL)
    via = " via hypervisor" if sc.hypervisor is not None else ""
    releases: dict = {}
    events: list[Event] = []
    for k, flow in enumerate(("A", "B")):
        leave = t1 + k * trip
        events.append(Event(leave, "staff-a", K.QUERY_DISPATCH, "a", f"flow {flow} query{via}"))
        if isinstance(sc.config_style, PerNodeRunners):
            at_ctrl = leave + up
            events.append(Event(at_ctrl, "staff-a", K.PHYSICAL_ARRIVAL, "controller",
                                f"flow {flow} query"))
            events.append(Event(leave + trip, "staff-a", K.QUERY_RETURN, "a", "back at a"))
            for node in paths[flow][1:-1]:
                if sc.hypervisor is not None:
                    leg = up
                else:
                    leg = sc.config_style.distances[node] / v
                when = at_ctrl + leg
                releases[(flow, node)] = when
                events.append(Event(when, f"runner-{flow}-{node}", K.QUERY_RETURN, node,
                                    f"flow {flow} policy{via}"))
        else:
            releases[(flow, "a")] = leave + trip
            events.append(Event(leave + trip, "staff-a", K.QUERY_RETURN, "a",
                                f"flow {flow} policy{via}"))
    if sc.release is Release.AFTER_BOTH:
        both = max(releases[("A", "a")], releases[("B", "a")])
        releases[("A", "a")] = releases[("B", "a")] = both
    return ControlPlan(releases, tuple(events))


def simulate_sdn(sc: SdnScenario, mode: Optional[Mode] = None) -> Timeline:
    """One network of the race; ``mode`` overrides ``sc.mode``."""
    ensure_valid(sc)
    mode = sc.mode if mode is None else mode
    flows = [Flow(name, path, sc.flow_size) for name, path in flow_paths(mode).items()]
    label = "IP" if mode is Mode.CLASSIC_IP else "SDN"
    if mode is Mode.CLASSIC_IP:
        return simulate_packet_flow_network(TOPOLOGY, flows, sc.link, sc.switching, label=label)
    plan = control_plan(sc)
    data = simulate_packet_flow_network(TOPOLOGY, flows, sc.link, sc.switching,
                                        plan.releases, label=label)
    merged = Timeline.build(data.events + plan.events, label)
    return Timeline(merged.events, data.completion_time, label)


def flow_completion(timeline: Timeline, flow: str) -> Fraction:
    """Latest delivery at ``C`` of any packet of ``flow``."""
    times = [e.time for e in timeline.events
             if e.delivery and e.actor.startswith(flow) and e.actor[len(flow):].isdigit()]
    return max(times)


def run_race(sc: SdnScenario) -> RaceReport:
    """Run both networks on the same field and report who gets everyone to C first."""
    ip = simulate_sdn(sc, Mode.CLASSIC_IP)
    sdn = simulate_sdn(sc, Mode.SDN_CENTRAL)
    return compare_races(ip, sdn, ("IP", "SDN"))


def break_even_flow_size(sc: SdnScenario, F_max: int) -> Optional[int]:
    """Smallest flow size in 1..F_max where SDN strictly beats IP, else None."""
    if F_max < 1:
        raise ValueError("F_max must be at least 1")
    for F in range(1, F_max + 1):
        rep = run_race(replace(sc, flow_size=F))
        if rep.times[1] < rep.times[0]:
            return F
    return None


def sweep(sc: SdnScenario, F_max: int) -> list[tuple[int, Fraction, Fraction, str]]:
    """``(F, ip_seconds, sdn_seconds, winner)`` for F = 1..F_max."""
    rows = []
    for F in range(1, F_max + 1):
        rep = run_race(replace(sc, flow_size=F))
        rows.append((F, rep.times[0], rep.times[1], rep.winner))
    return rows
