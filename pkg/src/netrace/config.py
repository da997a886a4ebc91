"""Scenario documents: a JSON tree with one top-level key per scenario kind.

Numbers may be written as JSON numbers or as exact strings such as
``"1/3"``.  Unknown keys anywhere in the tree are rejected.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import (
    AdmitPerRound, ArrivalConvention, BatchAfterDrain, Barring, CacheSpec,
    ChainScenario, ControllerLeg, Coordinated, CutThrough, Hypervisor, LinkSpec,
    Mode, PerNodeRunners, RachScenario, Release, SdnScenario, SingleRunnerAtA,
    StoreAndForward, Uncoordinated, WebLink, WebScenario, as_fraction,
)

KINDS = ("chain", "web", "rach", "sdn")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# -- writing -------------------------------------------------------------------

def _num(x) -> Any:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _link(link: LinkSpec) -> dict:
    return {"bitrate": _num(link.bitrate), "length": _num(link.length),
            "prop_speed": _num(link.prop_speed)}


def _weblink(link: WebLink) -> dict:
    return {"length": _num(link.length), "runner_speed": _num(link.runner_speed),
            "bitrate": _num(link.bitrate)}


def _strategy(st) -> dict:
    if isinstance(st, Uncoordinated):
        return {"kind": "uncoordinated"}
    if isinstance(st, Coordinated):
        return {"kind": "coordinated"}
    policy = ({"kind": "batch_after_drain"} if isinstance(st.policy, BatchAfterDrain)
              else {"kind": "admit_per_round", "k": st.policy.k})
    return {"kind": "barring", "initially_admitted": st.initially_admitted, "policy": policy}


def scenario_to_dict(sc) -> dict:
    """Canonical tree for one scenario (without the top-level kind key)."""
    if isinstance(sc, ChainScenario):
        return {"message_bits": sc.message_bits, "packet_bits": sc.packet_bits,
                "intermediate_nodes": sc.intermediate_nodes, "link": _link(sc.link),
                "convention": sc.convention.value}
    if isinstance(sc, WebScenario):
        cache = None
        if sc.cache is not None:
            cache = _weblink(sc.cache)
            cache["cached_objects"] = (None if sc.cache.cached_objects is None
                                       else list(sc.cache.cached_objects))
        return {"base_bits": sc.base_bits, "embedded_objects": list(sc.embedded_objects),
                "parallel_connections": sc.parallel_connections,
                "server_link": _weblink(sc.server_link), "cache": cache}
    if isinstance(sc, RachScenario):
        return {"contenders": sc.contenders, "slots": sc.slots,
                "strategy": _strategy(sc.strategy), "seed": sc.seed,
                "max_rounds": sc.max_rounds}
    if isinstance(sc, SdnScenario):
        if isinstance(sc.switching, CutThrough):
            switching = {"kind": "cut_through"}
        else:
            switching = {"kind": "store_and_forward",
                         "convention": sc.switching.convention.value}
        if isinstance(sc.config_style, PerNodeRunners):
            style = {"kind": "per_node_runners",
                     "distances": {k: _num(v) for k, v in sorted(sc.config_style.distances.items())}}
        else:
            style = {"kind": "single_runner_at_a"}
        hyp = None
        if sc.hypervisor is not None:
            hyp = {"controller_distance": _num(sc.hypervisor.controller_distance),
                   "node_distance": _num(sc.hypervisor.node_distance)}
        return {"flow_size": sc.flow_size, "link": _link(sc.link),
                "controller_leg": {"distance": _num(sc.controller_leg.distance),
                                   "runner_speed": _num(sc.controller_leg.runner_speed)},
                "mode": sc.mode.value, "switching": switching, "config_style": style,
                "hypervisor": hyp, "release": sc.release.value}
    raise TypeError(f"not a scenario: {type(sc).__name__}")


def kind_of(sc) -> str:
    return {ChainScenario: "chain", WebScenario: "web",
            RachScenario: "rach", SdnScenario: "sdn"}[type(sc)]


def dumps(scenarios) -> str:
    """Serialize a scenario or an iterable of scenarios of distinct kinds."""
    if not isinstance(scenarios, (list, tuple)):
        scenarios = [scenarios]
    doc = {kind_of(sc): scenario_to_dict(sc) for sc in scenarios}
    return json.dumps(doc, indent=2) + "\n"


# -- reading -------------------------------------------------------------------

class _Reader:
    """Walks a JSON tree, collecting every problem instead of stopping at one."""

    def __init__(self):
        self.problems: list[str] = []

    def obj(self, value, path, required, optional=()):
        if not isinstance(value, dict):
            self.problems.append(f"{path} must be an object")
            return None
        allowed = set(required) | set(optional)
        for key in value:
            if key not in allowed:
                self.problems.append(f"{path}.{key} is not a known key")
        for key in required:
            if key not in value:
                self.problems.append(f"{path}.{key} is required")
        if any(k not in value for k in required):
            return None
        return value

    def number(self, value, path):
        try:
            return as_fraction(value)
        except (TypeError, ValueError, ZeroDivisionError):
            self.problems.append(f"{path} must be a number")
            return None

    def integer(self, value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            self.problems.append(f"{path} must be an integer")
            return None
        return value

    def choice(self, value, path, enum_cls):
        try:
            return enum_cls(value)
        except ValueError:
            names = ", ".join(repr(m.value) for m in enum_cls)
            self.problems.append(f"{path} must be one of {names}")
            return None

    def link(self, value, path):
        d = self.obj(value, path, ("bitrate", "length", "prop_speed"))
        if d is None:
            return None
        return LinkSpec(self.number(d["bitrate"], f"{path}.bitrate"),
                        self.number(d["length"], f"{path}.length"),
                        self.number(d["prop_speed"], f"{path}.prop_speed"))

    def weblink(self, value, path, extra=()):
        d = self.obj(value, path, ("length", "runner_speed", "bitrate"), extra)
        if d is None:
            return None, None
        return d, (self.number(d["length"], f"{path}.length"),
                   self.number(d["runner_speed"], f"{path}.runner_speed"),
                   self.number(d["bitrate"], f"{path}.bitrate"))

    def chain(self, value):
        d = self.obj(value, "chain", ("message_bits", "packet_bits", "intermediate_nodes", "link"),
                     ("convention",))
        if d is None:
            return None
        return ChainScenario(
            self.integer(d["message_bits"], "chain.message_bits"),
            self.integer(d["packet_bits"], "chain.packet_bits"),
            self.integer(d["intermediate_nodes"], "chain.intermediate_nodes"),
            self.link(d["link"], "chain.link"),
            self.choice(d.get("convention", "full"), "chain.convention", ArrivalConvention))

    def web(self, value):
        d = self.obj(value, "web", ("base_bits", "embedded_objects", "server_link"),
                     ("parallel_connections", "cache"))
        if d is None:
            return None
        objs = d["embedded_objects"]
        if not isinstance(objs, list):
            self.problems.append("web.embedded_objects must be a list")
            objs = []
        objs = [self.integer(o, f"web.embedded_objects[{i}]") for i, o in enumerate(objs)]
        _, server = self.weblink(d["server_link"], "web.server_link")
        cache = None
        if d.get("cache") is not None:
            cd, fields = self.weblink(d["cache"], "web.cache", ("cached_objects",))
            if cd is not None:
                idx = cd.get("cached_objects")
                if idx is not None:
                    if not isinstance(idx, list):
                        self.problems.append("web.cache.cached_objects must be a list or null")
                        idx = None
                    else:
                        idx = tuple(self.integer(i, "web.cache.cached_objects[]") for i in idx)
                cache = CacheSpec(*fields, cached_objects=idx)
        return WebScenario(
            self.integer(d["base_bits"], "web.base_bits"), tuple(objs),
            WebLink(*server) if server else None,
            self.integer(d.get("parallel_connections", 1), "web.parallel_connections"),
            cache)

    def strategy(self, value, path):
        if isinstance(value, str):
            value = {"kind": value}
        d = self.obj(value, path, ("kind",), ("initially_admitted", "policy"))
        if d is None:
            return None
        kind = d["kind"]
        if kind == "uncoordinated":
            return Uncoordinated()
        if kind == "coordinated":
            return Coordinated()
        if kind != "barring":
            self.problems.append(f"{path}.kind must be uncoordinated, coordinated or barring")
            return None
        if "initially_admitted" not in d:
            self.problems.append(f"{path}.initially_admitted is required")
            return None
        pol = d.get("policy", {"kind": "batch_after_drain"})
        if isinstance(pol, str):
            pol = {"kind": pol}
        pd = self.obj(pol, f"{path}.policy", ("kind",), ("k",))
        policy = None
        if pd is not None:
            if pd["kind"] == "batch_after_drain":
                policy = BatchAfterDrain()
            elif pd["kind"] == "admit_per_round":
                policy = AdmitPerRound(self.integer(pd.get("k"), f"{path}.policy.k"))
            else:
                self.problems.append(
                    f"{path}.policy.kind must be batch_after_drain or admit_per_round")
        return Barring(self.integer(d["initially_admitted"], f"{path}.initially_admitted"),
                       policy)

    def rach(self, value):
        d = self.obj(value, "rach", ("contenders", "slots"), ("strategy", "seed", "max_rounds"))
        if d is None:
            return None
        return RachScenario(
            self.integer(d["contenders"], "rach.contenders"),
            self.integer(d["slots"], "rach.slots"),
            self.strategy(d.get("strategy", "uncoordinated"), "rach.strategy"),
            self.integer(d.get("seed", 0), "rach.seed"),
            self.integer(d.get("max_rounds", 10_000), "rach.max_rounds"))

    def sdn(self, value):
        d = self.obj(value, "sdn", ("flow_size", "link", "controller_leg"),
                     ("mode", "switching", "config_style", "hypervisor", "release"))
        if d is None:
            return None
        link = self.link(d["link"], "sdn.link")
        legd = self.obj(d["controller_leg"], "sdn.controller_leg", ("distance",), ("runner_speed",))
        leg = None
        if legd is not None:
            speed = legd.get("runner_speed")
            if speed is None:
                speed = link.prop_speed if link is not None else 1
            leg = ControllerLeg(self.number(legd["distance"], "sdn.controller_leg.distance"),
                                self.number(speed, "sdn.controller_leg.runner_speed"))
        sw = d.get("switching", {"kind": "store_and_forward"})
        if isinstance(sw, str):
            sw = {"kind": sw}
        swd = self.obj(sw, "sdn.switching", ("kind",), ("convention",))
        switching = None
        if swd is not None:
            if swd["kind"] == "cut_through":
                switching = CutThrough()
            elif swd["kind"] == "store_and_forward":
                switching = StoreAndForward(self.choice(
                    swd.get("convention", "full"), "sdn.switching.convention", ArrivalConvention))
            else:
                self.problems.append("sdn.switching.kind must be store_and_forward or cut_through")
        cs = d.get("config_style", {"kind": "single_runner_at_a"})
        if isinstance(cs, str):
            cs = {"kind": cs}
        csd = self.obj(cs, "sdn.config_style", ("kind",), ("distances",))
        style = None
        if csd is not None:
            if csd["kind"] == "single_runner_at_a":
                style = SingleRunnerAtA()
            elif csd["kind"] == "per_node_runners":
                dist = csd.get("distances")
                if not isinstance(dist, dict):
                    self.problems.append("sdn.config_style.distances must be an object")
                    dist = {}
                style = PerNodeRunners({k: self.number(v, f"sdn.config_style.distances.{k}")
                                        for k, v in dist.items()})
            else:
                self.problems.append(
                    "sdn.config_style.kind must be single_runner_at_a or per_node_runners")
        hyp = None
        if d.get("hypervisor") is not None:
            hd = self.obj(d["hypervisor"], "sdn.hypervisor",
                          ("controller_distance", "node_distance"))
            if hd is not None:
                hyp = Hypervisor(
                    self.number(hd["controller_distance"], "sdn.hypervisor.controller_distance"),
                    self.number(hd["node_distance"], "sdn.hypervisor.node_distance"))
        return SdnScenario(
            self.integer(d["flow_size"], "sdn.flow_size"), link, leg,
            self.choice(d.get("mode", "sdn_central"), "sdn.mode", Mode), switching, style, hyp,
            self.choice(d.get("release", "per_flow_release"), "sdn.release", Release))


def loads(text: str) -> dict:
    """Parse a scenario document into ``{kind: scenario}``.

    Raises :class:`ConfigError` listing every structural problem found.
    Semantic rules (positivity, divisibility...) are left to ``validate``.
    """
    if not text.strip():
        raise ConfigError(["document is empty; expected one of keys " + ", ".join(KINDS)])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from None
    if not isinstance(doc, dict) or not doc:
        raise ConfigError(["document must be an object with at least one of keys "
                           + ", ".join(KINDS)])
    reader = _Reader()
    out = {}
    for key, value in doc.items():
        if key not in KINDS:
            reader.problems.append(f"{key} is not a known scenario kind")
            continue
        out[key] = getattr(reader, key)(value)
    if reader.problems:
        raise ConfigError(reader.problems)
    return out


def load(path) -> dict:
    return loads(Path(path).read_text(encoding="utf-8"))
