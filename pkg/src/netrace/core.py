"""Domain types shared by the simulators, calculators and renderers.

All times and rates are kept as :class:`fractions.Fraction` so that field
values such as ``88`` seconds come out exactly.  Scenario constructors are
permissive; call :func:`validate` to get the list of rule violations, or
:func:`ensure_valid` to raise on the first batch of them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Optional, Sequence, Union

Number = Union[int, float, str, Fraction]


class ScenarioError(ValueError):
    """Raised when a scenario violates its invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def as_fraction(value: Number) -> Fraction:
    """Exact conversion; floats go through their shortest repr (0.1 -> 1/10)."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a number")


def _coerce(value):
    # keep bad input around so validate() can report it instead of crashing
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        return value


def format_seconds(value: Fraction, places: int = 6) -> str:
    """Render an exact time with at most ``places`` decimals, no trailing zeros."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    text = f"{float(round(value, places)):.{places}f}".rstrip("0").rstrip(".")
    return text


class ArrivalConvention(str, enum.Enum):
    """When a unit counts as received at the next node.

    ``FULL`` adds one transmission time (1/R) after the physical arrival,
    which is the student rule for modelling a bit that takes 1/R to send.
    """

    FULL = "full"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class LinkSpec:
    bitrate: Fraction
    length: Fraction
    prop_speed: Fraction

    def __post_init__(self):
        for name in ("bitrate", "length", "prop_speed"):
            object.__setattr__(self, name, _coerce(getattr(self, name)))

    @property
    def tx_time(self) -> Fraction:
        """Transmission time of a single unit, 1/R."""
        return 1 / self.bitrate

    @property
    def prop_delay(self) -> Fraction:
        return self.length / self.prop_speed


@dataclass(frozen=True)
class ChainScenario:
    message_bits: int
    packet_bits: int
    intermediate_nodes: int
    link: LinkSpec
    convention: ArrivalConvention = ArrivalConvention.FULL

    @property
    def packets(self) -> int:
        return self.message_bits // self.packet_bits

    def node_names(self) -> list[str]:
        return ["A"] + [f"n{i}" for i in range(1, self.intermediate_nodes + 1)] + ["B"]


@dataclass(frozen=True)
class WebLink:
    """Client-server geometry of the web download field."""

    length: Fraction
    runner_speed: Fraction
    bitrate: Fraction

    def __post_init__(self):
        for name in ("length", "runner_speed", "bitrate"):
            object.__setattr__(self, name, _coerce(getattr(self, name)))

    @property
    def rtt(self) -> Fraction:
        return 2 * self.length / self.runner_speed

    def as_link(self) -> LinkSpec:
        return LinkSpec(self.bitrate, self.length, self.runner_speed)


@dataclass(frozen=True)
class CacheSpec(WebLink):
    # None means every embedded object is cached
    cached_objects: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        super().__post_init__()
        if self.cached_objects is not None:
            object.__setattr__(self, "cached_objects", tuple(self.cached_objects))


@dataclass(frozen=True)
class WebScenario:
    base_bits: int
    embedded_objects: tuple[int, ...]
    server_link: WebLink
    parallel_connections: int = 1
    cache: Optional[CacheSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "embedded_objects", tuple(self.embedded_objects))

    def cached_indices(self) -> tuple[int, ...]:
        if self.cache is None:
            return ()
        if self.cache.cached_objects is None:
            return tuple(range(len(self.embedded_objects)))
        return tuple(self.cache.cached_objects)


# -- random access strategies ------------------------------------------------

@dataclass(frozen=True)
class Uncoordinated:
    pass


@dataclass(frozen=True)
class Coordinated:
    pass


@dataclass(frozen=True)
class BatchAfterDrain:
    pass


@dataclass(frozen=True)
class AdmitPerRound:
    k: int


@dataclass(frozen=True)
class Barring:
    initially_admitted: int
    policy: Union[BatchAfterDrain, AdmitPerRound] = BatchAfterDrain()


Strategy = Union[Uncoordinated, Coordinated, Barring]


@dataclass(frozen=True)
class RachScenario:
    contenders: int
    slots: int
    strategy: Strategy = Uncoordinated()
    seed: int = 0
    max_rounds: int = 10_000


# -- SDN race ------------------------------------------------------------------

class Mode(str, enum.Enum):
    CLASSIC_IP = "classic_ip"
    SDN_CENTRAL = "sdn_central"


class Release(str, enum.Enum):
    PER_FLOW = "per_flow_release"
    AFTER_BOTH = "after_both_queries"


@dataclass(frozen=True)
class StoreAndForward:
    convention: ArrivalConvention = ArrivalConvention.FULL


@dataclass(frozen=True)
class CutThrough:
    pass


Switching = Union[StoreAndForward, CutThrough]


@dataclass(frozen=True)
class ControllerLeg:
    distance: Fraction
    runner_speed: Fraction

    def __post_init__(self):
        object.__setattr__(self, "distance", _coerce(self.distance))
        object.__setattr__(self, "runner_speed", _coerce(self.runner_speed))

    @property
    def round_trip(self) -> Fraction:
        return 2 * self.distance / self.runner_speed


@dataclass(frozen=True)
class SingleRunnerAtA:
    pass


SDN_SWITCHES = ("a", "b", "c", "d", "e")


@dataclass(frozen=True)
class PerNodeRunners:
    """Controller-to-switch distances for the individual control runners."""

    distances: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "distances",
                           {str(k): _coerce(v) for k, v in dict(self.distances).items()})


ConfigStyle = Union[SingleRunnerAtA, PerNodeRunners]


@dataclass(frozen=True)
class Hypervisor:
    controller_distance: Fraction
    node_distance: Fraction

    def __post_init__(self):
        object.__setattr__(self, "controller_distance", _coerce(self.controller_distance))
        object.__setattr__(self, "node_distance", _coerce(self.node_distance))


@dataclass(frozen=True)
class SdnScenario:
    flow_size: int
    link: LinkSpec
    controller_leg: ControllerLeg
    mode: Mode = Mode.SDN_CENTRAL
    switching: Switching = StoreAndForward()
    config_style: ConfigStyle = SingleRunnerAtA()
    hypervisor: Optional[Hypervisor] = None
    release: Release = Release.PER_FLOW


Scenario = Union[LinkSpec, ChainScenario, WebScenario, RachScenario, SdnScenario]


# -- validation ----------------------------------------------------------------

def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, Fraction)


def _check_int(out: list, path: str, value, minimum: int):
    if not _is_int(value):
        out.append(f"{path} must be an integer")
    elif value < minimum:
        rule = "positive" if minimum == 1 else f"at least {minimum}"
        out.append(f"{path} must be {rule}")


def _check_num(out: list, path: str, value, strict: bool):
    if not _is_num(value):
        out.append(f"{path} must be a number")
    elif strict and value <= 0:
        out.append(f"{path} must be positive")
    elif not strict and value < 0:
        out.append(f"{path} must be non-negative")


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


def _validate_link(link, prefix: str) -> list[str]:
    if not isinstance(link, LinkSpec):
        return [f"{prefix or 'link'} must be a LinkSpec"]
    out: list[str] = []
    _check_num(out, _join(prefix, "bitrate"), link.bitrate, strict=True)
    _check_num(out, _join(prefix, "length"), link.length, strict=False)
    _check_num(out, _join(prefix, "prop_speed"), link.prop_speed, strict=True)
    return out


def _validate_weblink(link, prefix: str) -> list[str]:
    out: list[str] = []
    _check_num(out, _join(prefix, "length"), link.length, strict=False)
    _check_num(out, _join(prefix, "runner_speed"), link.runner_speed, strict=True)
    _check_num(out, _join(prefix, "bitrate"), link.bitrate, strict=True)
    return out


def _validate_chain(sc: ChainScenario) -> list[str]:
    out: list[str] = []
    _check_int(out, "message_bits", sc.message_bits, 1)
    _check_int(out, "packet_bits", sc.packet_bits, 1)
    _check_int(out, "intermediate_nodes", sc.intermediate_nodes, 0)
    if not out:
        if sc.packet_bits > sc.message_bits:
            out.append("packet_bits must not exceed message_bits")
        elif sc.message_bits % sc.packet_bits:
            out.append("packet_bits must divide message_bits")
    out += _validate_link(sc.link, "link")
    if not isinstance(sc.convention, ArrivalConvention):
        out.append("convention must be 'full' or 'physical'")
    return out


def _validate_web(w: WebScenario) -> list[str]:
    out: list[str] = []
    _check_int(out, "base_bits", w.base_bits, 1)
    for i, size in enumerate(w.embedded_objects):
        _check_int(out, f"embedded_objects[{i}]", size, 1)
    _check_int(out, "parallel_connections", w.parallel_connections, 1)
    out += _validate_weblink(w.server_link, "server_link")
    if w.cache is not None:
        out += _validate_weblink(w.cache, "cache")
        idx = w.cache.cached_objects
        if idx is not None:
            if len(set(idx)) != len(idx):
                out.append("cache.cached_objects must not repeat an index")
            for i in idx:
                if not _is_int(i) or not 0 <= i < len(w.embedded_objects):
                    out.append(f"cache.cached_objects index {i!r} out of range")
    return out


def _validate_rach(rs: RachScenario) -> list[str]:
    out: list[str] = []
    _check_int(out, "contenders", rs.contenders, 1)
    _check_int(out, "slots", rs.slots, 1)
    _check_int(out, "max_rounds", rs.max_rounds, 1)
    if not _is_int(rs.seed) or not 0 <= rs.seed < 2**64:
        out.append("seed must be an integer in [0, 2**64)")
    st = rs.strategy
    if isinstance(st, Barring):
        _check_int(out, "strategy.initially_admitted", st.initially_admitted, 1)
        if _is_int(st.initially_admitted) and _is_int(rs.contenders) \
                and st.initially_admitted > rs.contenders:
            out.append("strategy.initially_admitted must not exceed contenders")
        if isinstance(st.policy, AdmitPerRound):
            _check_int(out, "strategy.policy.k", st.policy.k, 1)
        elif not isinstance(st.policy, BatchAfterDrain):
            out.append("strategy.policy must be batch_after_drain or admit_per_round")
    elif not isinstance(st, (Uncoordinated, Coordinated)):
        out.append("strategy must be uncoordinated, coordinated or barring")
    return out


def _validate_sdn(sc: SdnScenario) -> list[str]:
    out: list[str] = []
    _check_int(out, "flow_size", sc.flow_size, 1)
    out += _validate_link(sc.link, "link")
    _check_num(out, "controller_leg.distance", sc.controller_leg.distance, strict=False)
    _check_num(out, "controller_leg.runner_speed", sc.controller_leg.runner_speed, strict=True)
    if not isinstance(sc.mode, Mode):
        out.append("mode must be classic_ip or sdn_central")
    if not isinstance(sc.release, Release):
        out.append("release must be per_flow_release or after_both_queries")
    if isinstance(sc.switching, StoreAndForward):
        if not isinstance(sc.switching.convention, ArrivalConvention):
            out.append("switching.convention must be 'full' or 'physical'")
    elif not isinstance(sc.switching, CutThrough):
        out.append("switching must be store_and_forward or cut_through")
    cs = sc.config_style
    if isinstance(cs, PerNodeRunners):
        missing = [n for n in SDN_SWITCHES if n not in cs.distances]
        extra = sorted(set(cs.distances) - set(SDN_SWITCHES))
        if missing:
            out.append("config_style.distances missing " + ", ".join(missing))
        if extra:
            out.append("config_style.distances has unknown nodes " + ", ".join(extra))
        for node in SDN_SWITCHES:
            if node in cs.distances:
                _check_num(out, f"config_style.distances.{node}",
                           cs.distances[node], strict=False)
    elif not isinstance(cs, SingleRunnerAtA):
        out.append("config_style must be single_runner_at_a or per_node_runners")
    if sc.hypervisor is not None:
        _check_num(out, "hypervisor.controller_distance",
                   sc.hypervisor.controller_distance, strict=False)
        _check_num(out, "hypervisor.node_distance", sc.hypervisor.node_distance, strict=False)
    return out


def validate(scenario) -> list[str]:
    """Return the invariant violations of ``scenario`` (empty when valid).

    Each message starts with the dotted field path it concerns.
    """
    if isinstance(scenario, LinkSpec):
        return _validate_link(scenario, "")
    if isinstance(scenario, ChainScenario):
        return _validate_chain(scenario)
    if isinstance(scenario, WebScenario):
        return _validate_web(scenario)
    if isinstance(scenario, RachScenario):
        return _validate_rach(scenario)
    if isinstance(scenario, SdnScenario):
        return _validate_sdn(scenario)
    return [f"unsupported scenario type {type(scenario).__name__}"]


def ensure_valid(scenario) -> None:
    problems = validate(scenario)
    if problems:
        raise ScenarioError(problems)


# -- timelines -----------------------------------------------------------------

class EventKind(str, enum.Enum):
    TX_START = "TxStart"
    TX_END = "TxEnd"
    PHYSICAL_ARRIVAL = "PhysicalArrival"
    FULL_ARRIVAL = "FullArrival"
    QUERY_DISPATCH = "QueryDispatch"
    QUERY_RETURN = "QueryReturn"
    SLOT_PICK = "SlotPick"
    SLOT_SUCCESS = "SlotSuccess"
    SLOT_COLLISION = "SlotCollision"
    CONNECTED = "Connected"


@dataclass(frozen=True)
class Event:
    time: Fraction
    actor: str
    kind: EventKind
    node: str = ""
    detail: str = ""
    delivery: bool = False

    def to_dict(self) -> dict:
        d = {"time": _dump_number(self.time), "actor": self.actor,
             "kind": self.kind.value, "node": self.node, "detail": self.detail}
        if self.delivery:
            d["delivery"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(as_fraction(d["time"]), d["actor"], EventKind(d["kind"]),
                   d.get("node", ""), d.get("detail", ""), bool(d.get("delivery", False)))


@dataclass(frozen=True)
class Timeline:
    """Time-ordered simulation events plus the instant the run completed.

    ``delivery`` marks the events that count as a unit being delivered at
    its final destination (or a connection being completed); the completion
    time is the latest of them.
    """

    events: tuple[Event, ...]
    completion_time: Fraction
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    @classmethod
    def build(cls, events: Iterable[Event], label: str = "") -> "Timeline":
        ordered = sorted(events, key=lambda e: e.time)  # stable: keeps emission order
        done = [e.time for e in ordered if e.delivery]
        completion = max(done) if done else (ordered[-1].time if ordered else Fraction(0))
        return cls(tuple(ordered), completion, label)

    def __len__(self):
        return len(self.events)

    def of_kind(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def to_log(self) -> str:
        """Tab separated ``time actor kind detail`` lines."""
        lines = []
        for e in self.events:
            detail = f"node={e.node}" + (f" {e.detail}" if e.detail else "")
            lines.append(f"{format_seconds(e.time)}\t{e.actor}\t{e.kind.value}\t{detail}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"label": self.label,
                "completion_time": _dump_number(self.completion_time),
                "events": [e.to_dict() for e in self.events]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Timeline":
        return cls(tuple(Event.from_dict(e) for e in d["events"]),
                   as_fraction(d["completion_time"]), d.get("label", ""))


def _dump_number(x: Fraction) -> Any:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class RaceReport:
    labels: tuple[str, str]
    times: tuple[Fraction, Fraction]
    winner: str  # one of labels, or "tie"
    margin: Fraction
    timelines: tuple[Optional[Timeline], Optional[Timeline]] = (None, None)
