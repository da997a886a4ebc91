"""Closed-form delays for the linear chain race and the web page download."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import ArrivalConvention, LinkSpec, ScenarioError, WebLink, WebScenario


@dataclass(frozen=True)
class PacketDelay:
    first_packet: Fraction
    total: Fraction


def _hop(units: int, link: LinkSpec, conv: ArrivalConvention) -> Fraction:
    # store-and-forward time for one hop of a group of ``units`` bits
    bits = units if conv is ArrivalConvention.FULL else units - 1
    return bits / link.bitrate + link.prop_delay


def message_switching_delay(M: int, link: LinkSpec, N: int,
                            conv: ArrivalConvention = ArrivalConvention.FULL) -> Fraction:
    """Whole message stored and forwarded at every one of the N+1 hops."""
    return (N + 1) * _hop(M, link, conv)


def packet_switching_delay(M: int, P: int, link: LinkSpec, N: int,
                           conv: ArrivalConvention = ArrivalConvention.FULL) -> PacketDelay:
    """First packet delay and total message delay with pipelined packets.

    After the first packet, one more packet completes every P/R seconds.
    """
    if P < 1 or M % P:
        raise ScenarioError(["packet_bits must divide message_bits"])
    first = (N + 1) * _hop(P, link, conv)
    return PacketDelay(first, first + (M // P - 1) * P / link.bitrate)


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def optimal_packet_size(M: int, link: LinkSpec, N: int,
                        conv: ArrivalConvention = ArrivalConvention.FULL
                        ) -> tuple[int, Fraction]:
    """Exhaustive search over the divisors of M; ties go to the smaller size."""
    best = None
    for P in divisors(M):
        total = packet_switching_delay(M, P, link, N, conv).total
        if best is None or total < best[1]:
            best = (P, total)
    return best


def download_rounds(sizes: Sequence[int], connections: int) -> list[tuple[int, ...]]:
    """Group objects into rounds of ``connections`` in listed order."""
    return [tuple(sizes[i:i + connections]) for i in range(0, len(sizes), connections)]


def _rounds_delay(sizes: Sequence[int], connections: int, link: WebLink) -> Fraction:
    return sum((2 * link.rtt + Fraction(max(r)) / link.bitrate
                for r in download_rounds(sizes, connections)), Fraction(0))


def web_download_delay(w: WebScenario) -> Fraction:
    """Non-persistent HTTP download time, every object fetched from the server.

    Each connection costs one RTT to set up and one more RTT plus the
    transmission time to request and receive its object.  Parallel
    connections finish a round when their largest object arrives.  Any
    cache on ``w`` is ignored here; see :func:`cached_download_delay`.
    """
    link = w.server_link
    base = 2 * link.rtt + Fraction(w.base_bits) / link.bitrate
    return base + _rounds_delay(w.embedded_objects, w.parallel_connections, link)


def cached_download_delay(w: WebScenario) -> Fraction:
    if w.cache is None:
        raise ScenarioError(["cache must be present for a cached download"])
    link = w.server_link
    cached = set(w.cached_indices())
    near = [o for i, o in enumerate(w.embedded_objects) if i in cached]
    far = [o for i, o in enumerate(w.embedded_objects) if i not in cached]
    base = 2 * link.rtt + Fraction(w.base_bits) / link.bitrate
    return (base + _rounds_delay(near, w.parallel_connections, w.cache)
            + _rounds_delay(far, w.parallel_connections, link))
