"""Musical-chairs model of LTE random access connection establishment.

Randomness
----------
Slot choices come from a counter-based generator: the slot of contender
``i`` in round ``r`` of trial ``t`` is derived from
``splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ t) ^ r) ^ i)``, mapped
to ``[0, S)`` by taking the high 32 bits times ``S`` shifted right by 32.
Every draw is therefore a pure function of (seed, trial, round,
contender), so trials are independent, can be run in any order or in
parallel, and reproduce bit for bit in any language with 64-bit integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import (
    AdmitPerRound, BatchAfterDrain, Barring, Coordinated, Event, EventKind,
    RachScenario, Timeline, Uncoordinated, ensure_valid,
)

MASK = (1 << 64) - 1
EXACT_LIMIT = 10


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def slot_draw(seed: int, trial: int, rnd: int, contender: int, slots: int) -> int:
    """Slot picked by one contender; scalar reference for :func:`_slot_draws`."""
    h = splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ rnd) ^ contender)
    return ((h >> 32) * slots) >> 32


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _slot_draws(seed: int, trials: np.ndarray, rnd: int, contenders: int,
                slots: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        base = _mix(np.full(trials.shape, splitmix64(seed), dtype=np.uint64)
                    ^ trials.astype(np.uint64))
        base = _mix(base ^ np.uint64(rnd))
        h = _mix(base[:, None] ^ np.arange(contenders, dtype=np.uint64)[None, :])
        return (((h >> np.uint64(32)) * np.uint64(slots)) >> np.uint64(32)).astype(np.int64)


@dataclass(frozen=True)
class RoundsResult:
    """Outcome of a batch of trials.

    ``rounds_per_trial`` holds ``max_rounds`` for trials that hit the cap;
    those are listed in ``overflowed`` and left out of the mean.
    """

    rounds_per_trial: tuple[int, ...]
    mean: float
    std_error: float
    connected_trace: tuple[int, ...]
    overflowed: tuple[int, ...] = ()
    strategy: str = ""

    @property
    def completed(self) -> list[int]:
        skip = set(self.overflowed)
        return [r for i, r in enumerate(self.rounds_per_trial) if i not in skip]

    @property
    def min(self) -> Optional[int]:
        done = self.completed
        return min(done) if done else None

    @property
    def max(self) -> Optional[int]:
        done = self.completed
        return max(done) if done else None


def strategy_name(strategy) -> str:
    if isinstance(strategy, Uncoordinated):
        return "uncoordinated"
    if isinstance(strategy, Coordinated):
        return "coordinated"
    if isinstance(strategy.policy, AdmitPerRound):
        return f"barring B={strategy.initially_admitted} +{strategy.policy.k}/round"
    return f"barring B={strategy.initially_admitted} batch-after-drain"


def coordinated_rounds(contenders: int, slots: int) -> int:
    """Rounds when the group agrees: S-1 sit alone, everybody else piles up."""
    if contenders <= slots:
        return 1
    if slots == 1:
        return contenders
    return math.ceil((contenders - slots) / (slots - 1)) + 1


def coordinated_trace(contenders: int, slots: int) -> list[int]:
    trace, left = [], contenders
    while left:
        n = left if left <= slots else (1 if slots == 1 else slots - 1)
        trace.append(n)
        left -= n
    return trace


def _admit(state: np.ndarray, round_no: int, strategy) -> None:
    # state: 0 barred, 1 active, 2 connected; admits in contender-id order
    if not isinstance(strategy, Barring) or round_no == 1:
        return
    barred = state == 0
    if isinstance(strategy.policy, BatchAfterDrain):
        drained = ~(state == 1).any(axis=1)
        state[barred & drained[:, None]] = 1
    else:
        order = np.cumsum(barred, axis=1)
        state[barred & (order <= strategy.policy.k)] = 1


def _initial_state(n_trials: int, rs: RachScenario) -> np.ndarray:
    state = np.ones((n_trials, rs.contenders), dtype=np.int8)
    if isinstance(rs.strategy, Barring):
        state[:, rs.strategy.initially_admitted:] = 0
    return state


def _run_batch(rs: RachScenario, trial_ids: np.ndarray, want_trace: bool):
    n, p, S = len(trial_ids), rs.contenders, rs.slots
    state = _initial_state(n, rs)
    rounds = np.full(n, rs.max_rounds, dtype=np.int64)
    live = np.arange(n)
    trace: list[int] = []
    for r in range(1, rs.max_rounds + 1):
        if live.size == 0:
            break
        st = state[live]
        _admit(st, r, rs.strategy)
        active = st == 1
        picks = _slot_draws(rs.seed, trial_ids[live], r, p, S)
        picks[~active] = S  # parked outside the slot range
        flat = (np.arange(live.size)[:, None] * (S + 1) + picks).ravel()
        counts = np.bincount(flat, minlength=live.size * (S + 1)).reshape(live.size, S + 1)
        alone = np.take_along_axis(counts, picks, axis=1) == 1
        success = active & alone
        st[success] = 2
        state[live] = st
        if want_trace and live.size and live[0] == 0:
            trace.append(int(success[0].sum()))
        finished = ~(st != 2).any(axis=1)
        rounds[live[finished]] = r
        live = live[~finished]
    return rounds, live, trace


def simulate_rach(rs: RachScenario, trials: int, batch: int = 20_000) -> RoundsResult:
    """Monte Carlo rounds-to-connect-everybody over ``trials`` games."""
    ensure_valid(rs)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    name = strategy_name(rs.strategy)
    if isinstance(rs.strategy, Coordinated):
        k = coordinated_rounds(rs.contenders, rs.slots)
        if k > rs.max_rounds:
            return RoundsResult((rs.max_rounds,) * trials, math.nan, math.nan, (),
                                tuple(range(trials)), name)
        return RoundsResult((k,) * trials, float(k), 0.0,
                            tuple(coordinated_trace(rs.contenders, rs.slots)), (), name)
    all_rounds, over, trace = [], [], []
    for lo in range(0, trials, batch):
        ids = np.arange(lo, min(trials, lo + batch), dtype=np.int64)
        rounds, stuck, tr = _run_batch(rs, ids, want_trace=lo == 0)
        if lo == 0:
            trace = tr
        all_rounds.append(rounds)
        over.extend(int(ids[i]) for i in stuck)
    rounds = np.concatenate(all_rounds)
    mask = np.ones(trials, dtype=bool)
    mask[over] = False
    done = rounds[mask].astype(float)
    if done.size:
        mean = float(done.mean())
        se = float(done.std(ddof=1) / math.sqrt(done.size)) if done.size > 1 else 0.0
    else:
        mean = se = math.nan
    return RoundsResult(tuple(int(x) for x in rounds), mean, se, tuple(trace),
                        tuple(over), name)


def trial_timeline(rs: RachScenario, trial: int = 0) -> Timeline:
    """Round-by-round events of one trial; event time is the round number.

    Uses the scalar generator, independent of the vectorized batch code.
    Coordinated play is drawn with the agreed seating instead of draws.
    """
    ensure_valid(rs)
    K = EventKind
    events: list[Event] = []
    p, S = rs.contenders, rs.slots
    if isinstance(rs.strategy, Coordinated):
        left = list(range(p))
        for r, n in enumerate(coordinated_trace(p, S), start=1):
            winners, left = left[:n], left[n:]
            for i in winners:
                events.append(Event(Fraction(r), f"phone{i}", K.SLOT_SUCCESS, f"slot{winners.index(i)}"))
                events.append(Event(Fraction(r), f"phone{i}", K.CONNECTED, "cell", delivery=True))
            for i in left:
                events.append(Event(Fraction(r), f"phone{i}", K.SLOT_COLLISION, f"slot{S - 1}"))
        return Timeline.build(events, "rach coordinated")
    state = [1] * p
    if isinstance(rs.strategy, Barring):
        state = [1 if i < rs.strategy.initially_admitted else 0 for i in range(p)]
    for r in range(1, rs.max_rounds + 1):
        if all(s == 2 for s in state):
            break
        if isinstance(rs.strategy, Barring) and r > 1:
            barred = [i for i in range(p) if state[i] == 0]
            if isinstance(rs.strategy.policy, BatchAfterDrain):
                if not any(s == 1 for s in state):
                    for i in barred:
                        state[i] = 1
            else:
                for i in barred[:rs.strategy.policy.k]:
                    state[i] = 1
        picks = {i: slot_draw(rs.seed, trial, r, i, S) for i in range(p) if state[i] == 1}
        load: dict[int, int] = {}
        for s in picks.values():
            load[s] = load.get(s, 0) + 1
        t = Fraction(r)
        for i, s in picks.items():
            events.append(Event(t, f"phone{i}", K.SLOT_PICK, f"slot{s}"))
        for i, s in picks.items():
            if load[s] == 1:
                state[i] = 2
                events.append(Event(t, f"phone{i}", K.SLOT_SUCCESS, f"slot{s}"))
                events.append(Event(t, f"phone{i}", K.CONNECTED, "cell", delivery=True))
            else:
                events.append(Event(t, f"phone{i}", K.SLOT_COLLISION, f"slot{s}",
                                    f"{load[s]} requests"))
    return Timeline.build(events, f"rach {strategy_name(rs.strategy)} trial {trial}")


# -- exact expectation ---------------------------------------------------------

def _no_singleton_assignments(m: int, b: int) -> int:
    """Ways to drop m labelled requests into b labelled slots, no slot holding exactly one."""
    return sum((-1) ** j * math.comb(b, j) * math.perm(m, j) * (b - j) ** (m - j)
               for j in range(min(m, b) + 1))


@lru_cache(maxsize=None)
def singleton_distribution(n: int, slots: int) -> tuple[Fraction, ...]:
    """P(exactly k requests succeed) for k = 0..n when n contend for ``slots``."""
    total = slots ** n
    dist = []
    for k in range(n + 1):
        if k > slots:
            dist.append(Fraction(0))
            continue
        ways = math.comb(slots, k) * math.perm(n, k) * _no_singleton_assignments(n - k, slots - k)
        dist.append(Fraction(ways, total))
    return tuple(dist)


def expected_rounds_fraction(contenders: int, slots: int) -> Optional[Fraction]:
    """Exact expected rounds, or None when the game can never finish."""
    E = [Fraction(0)]
    for n in range(1, contenders + 1):
        q = singleton_distribution(n, slots)
        if q[0] == 1:
            return None
        E.append((1 + sum(q[k] * E[n - k] for k in range(1, n + 1))) / (1 - q[0]))
    return E[contenders]


def expected_rounds_exact(contenders: int, slots: int) -> float:
    """Mean rounds of uncoordinated play from the absorbing chain on unconnected count.

    Infinite when two or more contenders share a single slot forever.
    """
    if not (1 <= contenders <= EXACT_LIMIT and 1 <= slots <= EXACT_LIMIT):
        raise ValueError(f"exact computation supports 1..{EXACT_LIMIT} contenders and slots")
    value = expected_rounds_fraction(contenders, slots)
    return math.inf if value is None else float(value)
