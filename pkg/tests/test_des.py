from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import given, settings

from netrace.analytic import cached_download_delay, packet_switching_delay, web_download_delay
from netrace.core import (
    ArrivalConvention, CacheSpec, ChainScenario, CutThrough, EventKind, LinkSpec, StoreAndForward,
    WebLink, WebScenario,
)
from netrace.des import (
    Flow, TopologyError, simulate_chain, simulate_packet_flow_network, simulate_web, web_rounds,
)

from oracles import enumerate_packets
from strategies import chains, webs

K = EventKind
FULL, PHYS = ArrivalConvention.FULL, ArrivalConvention.PHYSICAL
FIELD = LinkSpec(1, 10, 1)
HTTP = WebLink(15, 3, 1)
ROUTES = {"A": ["a"], "B": ["a"], "a": ["b", "d"], "b": ["c"], "c": ["C"],
          "d": ["e"], "e": ["C"], "C": []}


def _closed_form(sc):
    return packet_switching_delay(sc.message_bits, sc.packet_bits, sc.link,
                                  sc.intermediate_nodes, sc.convention).total


@pytest.mark.parametrize("sc, expected", [
    (ChainScenario(12, 12, 3, FIELD), 88),
    (ChainScenario(12, 3, 3, FIELD), 61),
    (ChainScenario(12, 12, 3, FIELD, PHYS), 84),
    (ChainScenario(12, 3, 3, FIELD, PHYS), 57),
    (ChainScenario(12, 1, 3, FIELD), 55),
    (ChainScenario(12, 3, 3, LinkSpec(1, 10, 2)), 41),
    (ChainScenario(1, 1, 0, FIELD, PHYS), 10),
])
def test_chain_examples(sc, expected):
    assert simulate_chain(sc).completion_time == expected


def test_first_packet_delivery():
    t = simulate_chain(ChainScenario(12, 3, 3, FIELD))
    bits_of_first = [e.time for e in t.events if e.delivery and e.actor.startswith("m.p0.")]
    assert max(bits_of_first) == 52


@settings(max_examples=150, deadline=None)
@given(chains(max_bits=24, max_nodes=4))
def test_chain_matches_closed_form(sc):
    assert simulate_chain(sc).completion_time == _closed_form(sc)


def _units(t):
    """actor -> {kind: [(time, node, detail)]} in timeline order."""
    seen = defaultdict(lambda: defaultdict(list))
    for e in t.events:
        seen[e.actor][e.kind].append((e.time, e.node, e.detail))
    return seen


@settings(max_examples=60, deadline=None)
@given(chains(max_bits=24, max_nodes=4))
def test_causality_and_pacing(sc):
    t = simulate_chain(sc)
    times = [e.time for e in t.events]
    assert times == sorted(times)
    tx = sc.link.tx_time
    for actor, kinds in _units(t).items():
        starts, ends, arrivals = kinds[K.TX_START], kinds[K.TX_END], kinds[K.PHYSICAL_ARRIVAL]
        assert len(starts) == len(ends) == len(arrivals) == sc.intermediate_nodes + 1
        for (s, _, _), (e, _, _), (a, _, _) in zip(starts, ends, arrivals):
            assert e == s + tx
            assert a == s + sc.link.prop_delay
        full = kinds[K.FULL_ARRIVAL]
        for (a, node, _), (f, node2, _) in zip(arrivals, full):
            assert node == node2
            assert f == a + (tx if sc.convention is FULL else 0)
    per_link = defaultdict(list)
    for e in t.of_kind(K.TX_START):
        per_link[e.detail].append(e.time)
    for starts in per_link.values():
        assert all(b - a >= tx for a, b in zip(starts, starts[1:]))


def _packet_of(actor: str, bits_per_packet: int) -> int:
    # actors are m<k> (one-bit packets), m.b<j> (one packet) or m.p<k>.b<j>
    if bits_per_packet == 1:
        return int(actor[1:])
    return int(actor.split(".p")[1].split(".")[0]) if ".p" in actor else 0


@settings(max_examples=40, deadline=None)
@given(chains(max_bits=24, max_nodes=4))
def test_fifo_and_work_conservation(sc):
    """Packets leave every node in order, as soon as they are whole and the link is free."""
    t = simulate_chain(sc)
    P, tx = sc.packet_bits, sc.link.tx_time
    received = K.FULL_ARRIVAL if sc.convention is FULL else K.PHYSICAL_ARRIVAL
    got = defaultdict(list)   # (node, packet) -> reception times of its bits
    sent = defaultdict(list)  # node -> [(start time, packet)]
    for e in t.events:
        pkt = _packet_of(e.actor, P)
        if e.kind is received:
            got[(e.node, pkt)].append(e.time)
        elif e.kind is K.TX_START:
            sent[e.node].append((e.time, pkt))
    for node, starts in sent.items():
        pkts = [p for _, p in starts]
        order = sorted(set(pkts), key=pkts.index)
        assert order == sorted(order)
        if node == "A":
            continue
        link_free = Fraction(0)
        for k in range(0, len(starts), P):
            start, pkt = starts[k]
            ready = max(got[(node, pkt)])
            assert start == max(ready, link_free)
            link_free = starts[k + P - 1][0] + tx


def test_determinism():
    sc = ChainScenario(12, 3, 3, FIELD)
    assert simulate_chain(sc).to_json() == simulate_chain(sc).to_json()


# packet flow networks

def _bottom(src):
    return (src, "a", "d", "e", "C")


def _completion_by_flow(t):
    out = {}
    for e in t.events:
        if e.delivery:
            out[e.actor[0]] = max(out.get(e.actor[0], 0), e.time)
    return out


def test_shared_bottom_route():
    flows = [Flow("A", _bottom("A"), 6), Flow("B", _bottom("B"), 6)]
    t = simulate_packet_flow_network(ROUTES, flows, FIELD)
    assert t.completion_time == 55
    assert _completion_by_flow(t) == enumerate_packets(
        {"A": _bottom("A"), "B": _bottom("B")}, 6, 1, 10)


def test_disjoint_routes():
    top = ("A", "a", "b", "c", "C")
    flows = [Flow("A", top, 6), Flow("B", _bottom("B"), 6)]
    t = simulate_packet_flow_network(ROUTES, flows, FIELD)
    # last departures from a at 16, then three 11 s hops
    assert t.completion_time == 16 + 3 * 11 == 49
    assert _completion_by_flow(t) == enumerate_packets({"A": top, "B": _bottom("B")}, 6, 1, 10)


def test_tie_break_puts_flow_a_first():
    flows = [Flow("B", _bottom("B"), 1), Flow("A", _bottom("A"), 1)]
    t = simulate_packet_flow_network(ROUTES, flows, FIELD)
    at_a = [e.actor for e in t.of_kind(K.TX_START) if e.node == "a"]
    assert at_a == ["A0", "B0"]


@pytest.mark.parametrize("switching, full", [
    (StoreAndForward(PHYS), False), (CutThrough(), False), (StoreAndForward(FULL), True)])
def test_reception_rules_agree_with_enumerator(switching, full):
    paths = {"A": _bottom("A"), "B": _bottom("B")}
    releases = {("A", "d"): 30, ("B", "a"): 14}
    flows = [Flow(n, p, 4) for n, p in paths.items()]
    t = simulate_packet_flow_network(ROUTES, flows, FIELD, switching, releases)
    assert _completion_by_flow(t) == enumerate_packets(paths, 4, 1, 10, full, releases)


def test_single_flow_reduces_to_chain():
    sc = ChainScenario(5, 1, 2, LinkSpec(2, 3, 1))
    chain = simulate_chain(sc)
    flows = [Flow("m", tuple(sc.node_names()), 5)]
    routes = {"A": ["n1"], "n1": ["n2"], "n2": ["B"], "B": []}
    assert simulate_packet_flow_network(routes, flows, sc.link).completion_time == chain.completion_time


@pytest.mark.parametrize("routes, path", [
    ({"x": ["y"], "y": ["x"]}, ("x", "y")),
    ({"x": ["y"]}, ("x", "y", "z")),
    ({"x": ["y"], "y": [], "z": []}, ("x", "z")),
])
def test_bad_topologies(routes, path):
    with pytest.raises(TopologyError):
        simulate_packet_flow_network(routes, [Flow("f", path, 1)], FIELD)


# web download

def test_basic_download_trace():
    w = WebScenario(3, (6, 6, 6), HTTP)
    t = simulate_web(w)
    assert t.completion_time == 101
    assert len(t.of_kind(K.CONNECTED)) == 4


def test_parallel_download_trace():
    w = WebScenario(3, (3,) * 6, HTTP, 2)
    t = simulate_web(w)
    assert t.completion_time == 92
    assert len(web_rounds(w)) - 1 == 3
    assert len(t.of_kind(K.CONNECTED)) == 7


def test_base_page_only():
    t = simulate_web(WebScenario(3, (), HTTP))
    assert len(t.of_kind(K.CONNECTED)) == 1
    assert t.completion_time == 23


def test_cached_download_trace():
    w = WebScenario(3, (6, 6, 6), HTTP, cache=CacheSpec(3, 3, 1))
    t = simulate_web(w)
    assert t.completion_time == 53
    visits = [e.node for e in t.of_kind(K.PHYSICAL_ARRIVAL) if e.actor.startswith("tcp.")]
    assert visits == ["server", "cache", "cache", "cache"]


def test_heterogeneous_round():
    assert simulate_web(WebScenario(3, (6, 3), HTTP, 2)).completion_time == 49


@settings(max_examples=60, deadline=None)
@given(webs())
def test_web_matches_closed_form(w):
    expected = cached_download_delay(w) if w.cache is not None else web_download_delay(w)
    assert simulate_web(w).completion_time == expected
