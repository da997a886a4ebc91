import json
from fractions import Fraction

import pytest
from hypothesis import given

from netrace.config import ConfigError, dumps, loads
from netrace.core import (
    ArrivalConvention, ChainScenario, Event, EventKind, LinkSpec, PerNodeRunners, RachScenario,
    ScenarioError, SdnScenario, ControllerLeg, Timeline, WebLink, WebScenario, as_fraction,
    ensure_valid, format_seconds, validate,
)
from netrace.presets import FIELD_LINK, PRESETS, preset

from strategies import chains, rachs, sdns, webs


def test_non_dividing_packet_size_is_reported():
    assert validate(ChainScenario(12, 5, 3, FIELD_LINK)) == ["packet_bits must divide message_bits"]


def test_field_chain_is_valid():
    assert validate(ChainScenario(12, 3, 3, LinkSpec(1, 10, 1))) == []


def test_zero_bitrate():
    assert validate(LinkSpec(0, 10, 1)) == ["bitrate must be positive"]


def test_violations_name_the_field():
    sc = ChainScenario(0, 1, -1, LinkSpec(1, -2, 0))
    problems = validate(sc)
    assert "message_bits must be positive" in problems
    assert "intermediate_nodes must be at least 0" in problems
    assert "link.length must be non-negative" in problems
    assert "link.prop_speed must be positive" in problems
    with pytest.raises(ScenarioError):
        ensure_valid(sc)


def test_other_kinds():
    assert validate(RachScenario(0, 0)) == ["contenders must be positive", "slots must be positive"]
    w = WebScenario(3, (6, 0), WebLink(15, 0, 1))
    assert validate(w) == ["embedded_objects[1] must be positive",
                           "server_link.runner_speed must be positive"]
    sdn = SdnScenario(6, FIELD_LINK, ControllerLeg(2, 1), config_style=PerNodeRunners({"a": 1}))
    assert validate(sdn) == ["config_style.distances missing b, c, d, e"]


def test_presets_are_valid():
    for name in PRESETS:
        for sc in preset(name).values():
            assert validate(sc) == [], name
    with pytest.raises(KeyError):
        preset("nope")


def test_link_derived_delays():
    link = LinkSpec(2, 10, 4)
    assert link.tx_time == Fraction(1, 2)
    assert link.prop_delay == Fraction(5, 2)
    assert WebLink(3, 3, 1).rtt == 2


def test_as_fraction_and_formatting():
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction("3/4") == Fraction(3, 4)
    assert format_seconds(Fraction(88)) == "88"
    assert format_seconds(Fraction(1, 3)) == "0.333333"
    assert format_seconds(Fraction(5, 2)) == "2.5"


def test_timeline_sorting_and_completion():
    ev = [Event(Fraction(3), "x", EventKind.FULL_ARRIVAL, "B", delivery=True),
          Event(Fraction(1), "x", EventKind.TX_START, "A"),
          Event(Fraction(2), "x", EventKind.TX_END, "A")]
    t = Timeline.build(ev, "demo")
    assert [e.time for e in t.events] == [1, 2, 3]
    assert t.completion_time == 3
    assert t.to_log().splitlines()[0] == "1\tx\tTxStart\tnode=A"
    back = Timeline.from_dict(json.loads(t.to_json()))
    assert back == t


# config documents

@given(chains())
def test_chain_round_trip(sc):
    assert loads(dumps([sc])) == {"chain": sc}


@given(webs())
def test_web_round_trip(w):
    assert loads(dumps([w])) == {"web": w}


@given(rachs())
def test_rach_round_trip(rs):
    assert loads(dumps([rs])) == {"rach": rs}


@given(sdns())
def test_sdn_round_trip(sc):
    assert loads(dumps([sc])) == {"sdn": sc}


def test_document_defaults():
    doc = {"chain": {"message_bits": 12, "packet_bits": 3, "intermediate_nodes": 3,
                     "link": {"bitrate": 1, "length": 10, "prop_speed": "1"}}}
    sc = loads(json.dumps(doc))["chain"]
    assert sc == ChainScenario(12, 3, 3, FIELD_LINK, ArrivalConvention.FULL)
    sdn = loads(json.dumps({"sdn": {"flow_size": 2, "link": {"bitrate": 1, "length": 10,
                                                             "prop_speed": 2},
                                    "controller_leg": {"distance": 4}}}))["sdn"]
    assert sdn.controller_leg.runner_speed == 2


@pytest.mark.parametrize("text, fragment", [
    ("", "document is empty"),
    ("{", "not valid JSON"),
    ("{}", "at least one of keys"),
    ('{"tree": {}}', "tree is not a known scenario kind"),
    ('{"rach": {"contenders": 2, "slots": 2, "colour": 1}}', "rach.colour"),
    ('{"rach": {"slots": 2}}', "rach.contenders"),
])
def test_bad_documents(text, fragment):
    with pytest.raises(ConfigError) as err:
        loads(text)
    assert any(fragment in p for p in err.value.problems)
