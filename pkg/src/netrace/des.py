"""Deterministic discrete-event engine for store-and-forward networks.

One engine serves both student models: the chain race moves individual
bits grouped into packets (``bits_per_packet > 1``), the flow network moves
whole packets (``bits_per_packet == 1``).  Time is kept internally as
integer ticks of a common denominator so results are exact.

Rules, in the order the engine applies them:

* a unit put on a link at ``t`` ends transmission at ``t + 1/R`` and
  physically arrives at ``t + l/s``; under the full-arrival rule it counts
  as received at ``t + l/s + 1/R``;
* a packet becomes eligible at a node once all its units are received, and
  joins the output link's queue at ``max(eligible, release)``;
* a free link serves its queue in (join time, flow name, packet index)
  order and sends the units back to back, one per 1/R.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import (
    ArrivalConvention, ChainScenario, CutThrough, Event, EventKind, LinkSpec,
    StoreAndForward, Switching, Timeline, WebScenario, ensure_valid,
)

K = EventKind

_ARRIVE, _RECEIVE, _WAKE = 0, 1, 2


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Flow:
    """A train of packets following a fixed path from ``path[0]``.

    ``channel`` separates flows that travel between the same two nodes on
    distinct parallel links (the parallel TCP ropes of the web download).
    """

    name: str
    path: tuple[str, ...]
    packets: int
    bits_per_packet: int = 1
    start: Fraction = Fraction(0)
    channel: str = ""

    def actor(self, pkt: int, bit: int) -> str:
        if self.bits_per_packet == 1:
            return f"{self.name}{pkt}"
        if self.packets == 1:
            return f"{self.name}.b{bit}"
        return f"{self.name}.p{pkt}.b{bit}"


def _denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def run_flows(flows: Sequence[Flow], link: LinkSpec, rule: ArrivalConvention,
              releases: Optional[Mapping[tuple[str, str], Fraction]] = None,
              label: str = "") -> Timeline:
    """Simulate ``flows`` over identical links and return the event timeline.

    ``releases`` maps ``(flow name, node)`` to the earliest time the node may
    forward that flow.  Deliveries are receptions at each flow's last node.
    """
    releases = dict(releases or {})
    tx, prop = link.tx_time, link.prop_delay
    denom = _denominator([tx, prop, *releases.values(), *(f.start for f in flows)])
    TX, PROP = int(tx * denom), int(prop * denom)
    rel = {key: int(Fraction(v) * denom) for key, v in releases.items()}
    full = rule is ArrivalConvention.FULL
    rank = {name: i for i, name in enumerate(sorted({f.name for f in flows}))}

    raw: list[tuple] = []  # (tick, seq, actor, kind, node, detail, delivery)
    heap: list[tuple] = []
    queues: dict[tuple, list] = {}
    free_at: dict[tuple, int] = defaultdict(int)
    got: dict[tuple, int] = defaultdict(int)
    seq = 0

    def record(tick, actor, kind, node, detail="", delivery=False):
        nonlocal seq
        raw.append((tick, seq, actor, kind, node, detail, delivery))
        seq += 1

    def push(tick, what, payload):
        nonlocal seq
        heapq.heappush(heap, (tick, what, seq, payload))
        seq += 1

    def join(fi, pkt, hop, tick):
        f = flows[fi]
        node = f.path[hop]
        key = (f.channel, node, f.path[hop + 1])
        at = max(tick, rel.get((f.name, node), 0))
        heapq.heappush(queues.setdefault(key, []), (at, rank[f.name], pkt, fi, hop))
        push(at, _WAKE, None)

    def receive(fi, pkt, bit, hop, tick):
        f = flows[fi]
        last = hop == len(f.path) - 1
        if full:
            record(tick, f.actor(pkt, bit), K.FULL_ARRIVAL, f.path[hop], delivery=last)
        if last:
            return
        got[(fi, pkt, hop)] += 1
        if got[(fi, pkt, hop)] == f.bits_per_packet:
            join(fi, pkt, hop, tick)

    def dispatch(tick):
        for key in sorted(queues):
            q = queues[key]
            if not q or free_at[key] > tick or q[0][0] > tick:
                continue
            _, _, pkt, fi, hop = heapq.heappop(q)
            f = flows[fi]
            nxt = f.path[hop + 1]
            detail = f"link {f.path[hop]}->{nxt}"
            for bit in range(f.bits_per_packet):
                t0 = tick + bit * TX
                actor = f.actor(pkt, bit)
                record(t0, actor, K.TX_START, f.path[hop], detail)
                record(t0 + TX, actor, K.TX_END, f.path[hop], detail)
                push(t0 + PROP, _ARRIVE, (fi, pkt, bit, hop + 1))
            free_at[key] = tick + f.bits_per_packet * TX
            push(free_at[key], _WAKE, None)

    for fi, f in enumerate(flows):
        start = int(Fraction(f.start) * denom)
        for pkt in range(f.packets):
            join(fi, pkt, 0, start)

    while heap:
        now = heap[0][0]
        while heap and heap[0][0] == now:
            _, what, _, payload = heapq.heappop(heap)
            if what == _ARRIVE:
                fi, pkt, bit, hop = payload
                f = flows[fi]
                last = hop == len(f.path) - 1
                record(now, f.actor(pkt, bit), K.PHYSICAL_ARRIVAL, f.path[hop],
                       delivery=last and not full)
                if full:
                    push(now + TX, _RECEIVE, payload)
                else:
                    receive(fi, pkt, bit, hop, now)
            elif what == _RECEIVE:
                receive(*payload, now)
        dispatch(now)

    raw.sort(key=lambda r: (r[0], r[1]))
    cache: dict[int, Fraction] = {}
    events = []
    for tick, _, actor, kind, node, detail, delivery in raw:
        t = cache.get(tick)
        if t is None:
            t = cache[tick] = Fraction(tick, denom)
        events.append(Event(t, actor, kind, node, detail, delivery))
    done = [r[0] for r in raw if r[6]]
    completion = Fraction(max(done), denom) if done else Fraction(0)
    return Timeline(tuple(events), completion, label)


def _check_topology(topology: Mapping[str, Sequence[str]], flows: Sequence[Flow]):
    nodes = set(topology) | {v for vs in topology.values() for v in vs}
    state: dict[str, int] = {}

    def visit(u):
        state[u] = 1
        for v in topology.get(u, ()):
            if state.get(v) == 1:
                raise TopologyError(f"topology has a cycle through {v}")
            if v not in state:
                visit(v)
        state[u] = 2

    for u in sorted(nodes):
        if u not in state:
            visit(u)
    for f in flows:
        if len(set(f.path)) != len(f.path):
            raise TopologyError(f"flow {f.name} path revisits a node (cyclic path)")
        for u, v in zip(f.path, f.path[1:]):
            if u not in nodes or v not in nodes:
                raise TopologyError(f"flow {f.name} uses unknown node {u if u not in nodes else v}")
            if v not in topology.get(u, ()):
                raise TopologyError(f"flow {f.name} uses missing link {u}->{v}")


def reception_rule(switching: Switching) -> ArrivalConvention:
    """Cut-through forwards on physical arrival, like the physical convention."""
    if isinstance(switching, CutThrough):
        return ArrivalConvention.PHYSICAL
    return switching.convention


def simulate_packet_flow_network(topology: Mapping[str, Sequence[str]], flows: Sequence[Flow],
                                 link: LinkSpec, switching: Switching = StoreAndForward(),
                                 releases: Optional[Mapping[tuple[str, str], Fraction]] = None,
                                 label: str = "") -> Timeline:
    """Packet-level run of several flows over a DAG of identical links.

    ``topology`` maps each node to its successors.  Raises
    :class:`TopologyError` for cycles, unknown nodes or missing links.
    """
    _check_topology(topology, flows)
    return run_flows(flows, link, reception_rule(switching), releases, label)


def simulate_chain(sc: ChainScenario, label: str = "") -> Timeline:
    """Bit-level run of one message over the N+1 link chain."""
    ensure_valid(sc)
    flow = Flow("m", tuple(sc.node_names()), sc.packets, sc.packet_bits)
    return run_flows([flow], sc.link, sc.convention,
                     label=label or f"chain M={sc.message_bits} P={sc.packet_bits}")


def web_rounds(w: WebScenario) -> list[tuple[str, list[tuple[str, int]], object]]:
    """Ordered download rounds: ``(source, [(object name, bits)], link)``."""
    rounds = [("server", [("base", w.base_bits)], w.server_link)]
    cached = set(w.cached_indices())
    C = w.parallel_connections
    for source, link, keep in (("cache", w.cache, True), ("server", w.server_link, False)):
        items = [(f"obj{i}", o) for i, o in enumerate(w.embedded_objects)
                 if (i in cached) == keep]
        for j in range(0, len(items), C):
            rounds.append((source, items[j:j + C], link))
    return rounds


def simulate_web(w: WebScenario, label: str = "") -> Timeline:
    """Event trace of a non-persistent HTTP download, round by round.

    Every object gets its own connection: a TCP runner goes to the source
    and back (one RTT), then the HTTP request runner walks over and the
    object bits are sent back over that connection at the link bitrate.
    A round of parallel connections ends when its last bit is received.
    """
    ensure_valid(w)
    events: list[Event] = []
    t = Fraction(0)
    for r, (source, items, wl) in enumerate(web_rounds(w)):
        half = wl.length / wl.runner_speed
        flows = []
        for c, (name, bits) in enumerate(items):
            conn = f"r{r}c{c}"
            tcp, http = f"tcp.{conn}", f"http.{conn}"
            events += [
                Event(t, tcp, K.QUERY_DISPATCH, "client", f"connect to {source}"),
                Event(t + half, tcp, K.PHYSICAL_ARRIVAL, source),
                Event(t + 2 * half, tcp, K.QUERY_RETURN, "client"),
                Event(t + 2 * half, conn, K.CONNECTED, "client", f"round {r} with {source}"),
                Event(t + 2 * half, http, K.QUERY_DISPATCH, "client", f"request {name}"),
                Event(t + 3 * half, http, K.PHYSICAL_ARRIVAL, source),
            ]
            flows.append(Flow(name, (source, "client"), 1, bits, t + 3 * half, conn))
        part = run_flows(flows, wl.as_link(), ArrivalConvention.FULL)
        events += part.events
        t = part.completion_time
    return Timeline.build(events, label or "web download")
