import re
import xml.etree.ElementTree as ET
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from netrace.core import (
    ChainScenario, ControllerLeg, Event, EventKind, LinkSpec, Mode, PerNodeRunners, RachScenario,
    SdnScenario, Timeline, WebLink, WebScenario,
)
from netrace.des import simulate_chain, simulate_web
from netrace.presets import FIELD_LINK
from netrace.random_access import trial_timeline
from netrace.report import compare_races, format_race, race_csv, render_timeline, sweep_csv
from netrace.report.plan import ClassTooSmall, Role, field_plan, format_plan
from netrace.report.render import activity_intervals, lanes
from netrace.sdn_race import simulate_sdn, sweep

from strategies import chains

SVG = "{http://www.w3.org/2000/svg}"
MESSAGE = ChainScenario(12, 12, 3, FIELD_LINK)
PACKET = ChainScenario(12, 3, 3, FIELD_LINK)


def _tl(t, label="x"):
    return Timeline((), Fraction(t), label)


def test_compare_races():
    rep = compare_races(_tl(88), _tl(61), ("message switching", "packet switching"))
    assert rep.winner == "packet switching" and rep.margin == 27
    fast = compare_races(_tl(68), _tl(41), ("m", "p"))
    assert fast.margin == 27
    tie = compare_races(_tl(5), _tl(5), ("a", "b"))
    assert tie.winner == "tie" and tie.margin == 0
    assert format_race(rep).splitlines()[-1] == "packet switching wins by 27 s"
    assert format_race(tie).splitlines()[-1] == "tie at 5 s"
    assert race_csv(rep).splitlines() == ["configuration,seconds", "message switching,88",
                                          "packet switching,61", "winner,packet switching",
                                          "margin,27"]


def test_sweep_csv():
    rows = sweep(SdnScenario(1, FIELD_LINK, ControllerLeg(2, 1)), 2)
    assert sweep_csv(rows).splitlines() == ["F,ip_seconds,sdn_seconds,winner",
                                            "1,45,52,IP", "2,47,53,IP"]


def _busy_columns(text):
    rows = [ln for ln in text.splitlines() if "|" in ln]
    cells = [ln.split("|")[1] for ln in rows]
    return [{i for i, ch in enumerate(c) if ch in "#."} for c in cells]


def test_message_diagram_one_link_at_a_time():
    text = render_timeline(simulate_chain(MESSAGE), "text")
    busy = _busy_columns(text)
    assert len(busy) == 5  # A, n1, n2, n3 and the receiving end B
    active = [b for b in busy if b]
    assert len(active) == 4
    for i, a in enumerate(active):
        for b in active[i + 1:]:
            assert not a & b
    assert "scale: 1 s per column" in text


def test_packet_diagram_pipelines():
    text = render_timeline(simulate_chain(PACKET), "text")
    busy = _busy_columns(text)
    assert any(sum(c in b for b in busy) >= 2 for c in range(61))


def test_text_rescales_long_runs():
    long = simulate_chain(ChainScenario(12, 12, 3, LinkSpec(1, 100, 1)))
    text = render_timeline(long, "text")
    assert "scale: 4 s per column" in text
    assert all(len(ln.split("|")[1]) <= 120 for ln in text.splitlines() if "|" in ln)


def _svg_tree(t):
    doc = render_timeline(t, "svg")
    return doc, ET.fromstring(doc.encode())


def _drawn_indices(root):
    seen = set()
    for title in root.iter(SVG + "title"):
        m = re.fullmatch(r"events ([\d ]+)", title.text or "")
        if m:
            seen.update(int(i) for i in m.group(1).split())
    return seen


@pytest.mark.parametrize("timeline", [
    simulate_chain(MESSAGE), simulate_chain(PACKET),
    simulate_web(WebScenario(3, (6, 6, 6), WebLink(15, 3, 1))),
    simulate_sdn(SdnScenario(3, FIELD_LINK, ControllerLeg(2, 1)), Mode.SDN_CENTRAL),
    simulate_sdn(SdnScenario(2, FIELD_LINK, ControllerLeg(2, 1),
                             config_style=PerNodeRunners(dict.fromkeys("abcde", 3))),
                 Mode.SDN_CENTRAL),
    trial_timeline(RachScenario(5, 3, seed=2)),
], ids=["message", "packet", "web", "sdn", "sdn-runners", "rach"])
def test_svg_well_formed_and_complete(timeline):
    doc, root = _svg_tree(timeline)
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    assert _drawn_indices(root) == set(range(len(timeline.events)))
    assert doc == render_timeline(timeline, "svg")


def test_svg_bar_widths_follow_bitrate():
    t = simulate_chain(ChainScenario(2, 1, 0, LinkSpec(2, 10, 1)))
    _, root = _svg_tree(t)
    widths = {r.get("width") for r in root.iter(SVG + "rect") if r.get("class") == "tx"}
    assert widths == {"5"}  # 1/R = 0.5 s at 10 px/s


def test_single_event_timeline():
    t = Timeline.build([Event(Fraction(0), "u", EventKind.TX_START, "A")], "one")
    assert lanes(t) == ["A"]
    text = render_timeline(t, "text")
    assert [ln for ln in text.splitlines() if "|" in ln] == ["A| |"]
    _, root = _svg_tree(t)
    assert _drawn_indices(root) == {0}


def test_empty_and_unknown_format():
    with pytest.raises(ValueError):
        render_timeline(Timeline((), Fraction(0)), "text")
    with pytest.raises(ValueError):
        render_timeline(simulate_chain(PACKET), "pdf")


def test_activity_intervals_message():
    busy = activity_intervals(simulate_chain(MESSAGE))
    assert busy["A"][0][0] == 0 and busy["A"][-1][1] == 21
    assert min(s for s, _ in busy["n1"]) == 22


# field plans

def _count(plan, role, group=None, staff=False):
    return sum(a.count for a in plan.roles
               if a.role is role and a.staff == staff and (group is None or a.group == group))


def test_chain_plan_for_24():
    plan = field_plan(PACKET, 24)
    assert plan.student_count == 24
    assert _count(plan, Role.BIT_STUDENT, "message switching") == 12
    assert _count(plan, Role.BIT_STUDENT, "packet switching") == 12
    assert plan.predicted_times == {"message switching": 88, "packet switching P=3": 61}
    assert {m.distance for m in plan.markings} == {10}
    assert len(plan.markings) == 8
    assert "students assigned: 24" in format_plan(plan)


def test_sdn_plan_for_24():
    plan = field_plan(SdnScenario(6, FIELD_LINK, ControllerLeg(2, 1)), 24)
    assert plan.student_count == 24
    for g in ("IP", "SDN"):
        assert _count(plan, Role.PACKET_STUDENT, g) == 12
    notes = {a.note for a in plan.roles if a.role is Role.PACKET_STUDENT}
    assert notes == {"6 at A, 6 at B"}
    assert plan.predicted_times == {"IP": 55, "SDN": 57}


@pytest.mark.parametrize("scenario, minimum", [
    (PACKET, 24),
    (SdnScenario(6, FIELD_LINK, ControllerLeg(2, 1)), 24),
    (WebScenario(3, (6, 6, 6), WebLink(15, 3, 1)), 10),
    (RachScenario(12, 4), 24),
])
def test_class_too_small(scenario, minimum):
    with pytest.raises(ClassTooSmall) as err:
        field_plan(scenario, 0)
    assert err.value.minimum == minimum
    assert field_plan(scenario, minimum).student_count == minimum


@settings(max_examples=60, deadline=None)
@given(chains(max_bits=16), st.integers(0, 40))
def test_plan_counts_sum_to_class(sc, extra):
    size = 2 * sc.message_bits + extra
    plan = field_plan(sc, size)
    assert plan.student_count == size
    assert _count(plan, Role.RECORD_KEEPER) + _count(plan, Role.RECORD_KEEPER, staff=True) == 2
    staffed = sum(a.count for a in plan.roles if a.role is Role.NODE_STAFF)
    assert staffed == 2 * sc.intermediate_nodes
    assert {m.distance for m in plan.markings} == {sc.link.length}


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 30))
def test_sdn_plan_counts(F, extra):
    sc = SdnScenario(F, FIELD_LINK, ControllerLeg(2, 1))
    plan = field_plan(replace(sc, flow_size=F), 4 * F + extra)
    assert plan.student_count == 4 * F + extra
