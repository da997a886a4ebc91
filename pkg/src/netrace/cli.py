"""Command line front end.

Every subcommand loads a scenario (``--preset`` or ``--config``), hands it
to the library and prints the formatted result.  Exit status is 0 on
success, 1 for invalid scenarios and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analytic, des, random_access, sdn_race
from .config import ConfigError, dumps, load
from .core import (
    AdmitPerRound, ArrivalConvention, BatchAfterDrain, Barring, CacheSpec, Coordinated,
    ControllerLeg, Mode, RachScenario, ScenarioError, StoreAndForward, Uncoordinated,
    format_seconds, validate,
)
from .presets import PRESETS, preset
from .report import format_race, race_csv, render_timeline, sweep_csv
from .report.race import compare_races


class _Fail(Exception):
    """Scenario-level failure: message goes to stderr, exit status 1."""


def _scenarios(args) -> dict:
    if args.config and args.preset:
        raise _Fail("give either --config or --preset, not both")
    if args.config:
        try:
            found = load(args.config)
        except OSError as exc:
            raise _Fail(f"cannot read {args.config}: {exc.strerror}") from None
        except ConfigError as exc:
            raise _Fail("\n".join(exc.problems)) from None
        return found
    return preset(args.preset) if args.preset else {}


def _pick(args, kind: str, default_preset: str):
    found = _scenarios(args)
    if not found and not args.config:
        found = preset(default_preset)
    if kind not in found:
        raise _Fail(f"scenario has no '{kind}' section")
    sc = found[kind]
    problems = validate(sc)
    if problems:
        raise _Fail("\n".join(problems))
    return sc


def _with_convention(args, sc):
    if args.convention is None:
        return sc
    conv = ArrivalConvention(args.convention)
    if hasattr(sc, "convention"):
        return replace(sc, convention=conv)
    if isinstance(getattr(sc, "switching", None), StoreAndForward):
        return replace(sc, switching=StoreAndForward(conv))
    return sc


class _Output:
    """Collects report text; writes artifacts into ``--outdir``."""

    def __init__(self, args):
        self.args = args
        self.parts: list[str] = []
        self.outdir = Path(args.outdir)

    def add(self, text: str) -> None:
        self.parts.append(text if text.endswith("\n") else text + "\n")

    def _write(self, name: str, text: str) -> str:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def timeline(self, tl, name: str) -> None:
        args = self.args
        if args.render == "text":
            self.add(render_timeline(tl, "text"))
        elif args.render == "svg":
            self.add(f"wrote {self._write(name + '.svg', render_timeline(tl, 'svg'))}")
        elif args.render == "png":
            from .report.figures import timeline_figure

            self.outdir.mkdir(parents=True, exist_ok=True)
            path = self.outdir / (name + ".png")
            timeline_figure(tl, path)
            self.add(f"wrote {path}")
        if args.log:
            self.add(f"wrote {self._write(name + '.tsv', tl.to_log())}")
            self.add(f"wrote {self._write(name + '.json', tl.to_json())}")

    def finish(self) -> None:
        text = "".join(self.parts)
        if self.args.out:
            Path(self.args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def _describe_link(link) -> str:
    return (f"R={format_seconds(link.bitrate)} bit/s, l={format_seconds(link.length)} m, "
            f"s={format_seconds(link.prop_speed)} m/s")


def cmd_linear(args, out: _Output) -> None:
    sc = _with_convention(args, _pick(args, "chain", "paper-linear"))
    if args.packet_bits is not None:
        sc = replace(sc, packet_bits=args.packet_bits)
        problems = validate(sc)
        if problems:
            raise _Fail("\n".join(problems))
    M, P, N, link, conv = (sc.message_bits, sc.packet_bits, sc.intermediate_nodes,
                           sc.link, sc.convention)
    out.add(f"store-and-forward race: M={M} bits, P={P} bits, N={N} nodes, "
            f"{_describe_link(link)}, {conv.value} arrival")
    message = des.simulate_chain(replace(sc, packet_bits=M), "message switching")
    packet = des.simulate_chain(sc, f"packet switching P={P}")
    rep = compare_races(message, packet, ("message switching", f"packet switching P={P}"))
    out.add(f"message {format_seconds(message.completion_time)} s, "
            f"packet {format_seconds(packet.completion_time)} s")
    out.add(race_csv(rep) if args.csv else format_race(rep))
    closed = (analytic.message_switching_delay(M, link, N, conv),
              analytic.packet_switching_delay(M, P, link, N, conv))
    out.add(f"first packet: {format_seconds(closed[1].first_packet)} s")
    best_p, best_t = analytic.optimal_packet_size(M, link, N, conv)
    out.add(f"fastest packet size: P={best_p} ({format_seconds(best_t)} s)")
    agree = message.completion_time == closed[0] and packet.completion_time == closed[1].total
    out.add("simulation matches closed form" if agree else "WARNING: simulation differs from closed form")
    out.timeline(message, "message")
    out.timeline(packet, "packet")


def cmd_http(args, out: _Output) -> None:
    w = _pick(args, "web", "paper-http")
    if args.connections is not None:
        w = replace(w, parallel_connections=args.connections)
    if args.cache and w.cache is None:
        link = w.server_link
        w = replace(w, cache=CacheSpec(args.cache_distance, link.runner_speed, link.bitrate))
    problems = validate(w)
    if problems:
        raise _Fail("\n".join(problems))
    link = w.server_link
    out.add(f"web download: b={w.base_bits} bits, objects={list(w.embedded_objects)}, "
            f"C={w.parallel_connections}, RTT={format_seconds(link.rtt)} s, "
            f"R={format_seconds(link.bitrate)} bit/s")
    plain = des.simulate_web(replace(w, cache=None), "from server")
    rounds = len(des.web_rounds(replace(w, cache=None))) - 1
    out.add(f"server only: {format_seconds(plain.completion_time)} s "
            f"({rounds} object rounds, closed form "
            f"{format_seconds(analytic.web_download_delay(w))} s)")
    out.timeline(plain, "http")
    if args.cache:
        cached = des.simulate_web(w, "with cache")
        out.add(f"cache RTT: {format_seconds(w.cache.rtt)} s")
        out.add(f"with cache: {format_seconds(cached.completion_time)} s "
                f"(closed form {format_seconds(analytic.cached_download_delay(w))} s)")
        rep = compare_races(plain, cached, ("server only", "with cache"))
        out.add(format_race(rep))
        out.timeline(cached, "http-cache")


def _rach_strategy(args):
    if args.strategy == "uncoordinated":
        return Uncoordinated()
    if args.strategy == "coordinated":
        return Coordinated()
    policy = (AdmitPerRound(args.admit_per_round) if args.admit_per_round
              else BatchAfterDrain())
    return Barring(args.admitted, policy)


def cmd_rach(args, out: _Output) -> None:
    base = _pick(args, "rach", "paper-rach") if (args.config or args.preset) else RachScenario(12, 4)
    changes = {k: v for k, v in (("contenders", args.contenders), ("slots", args.slots),
                                 ("seed", args.seed)) if v is not None}
    rs = replace(base, **changes)
    if args.strategy is not None:
        if args.strategy == "barring" and args.admitted is None:
            args.admitted = max(1, rs.contenders // 2)
        rs = replace(rs, strategy=_rach_strategy(args))
    problems = validate(rs)
    if problems:
        raise _Fail("\n".join(problems))
    out.add(f"connection establishment: {rs.contenders} phones, {rs.slots} slots, "
            f"seed {rs.seed}, {args.trials} trials")
    res = random_access.simulate_rach(rs, args.trials)
    if isinstance(rs.strategy, Coordinated):
        out.add(f"coordinated: {int(res.mean)} rounds")
    header = f"{'strategy':<32} {'mean':>9} {'std err':>9} {'min':>5} {'max':>5}"
    out.add(header)
    out.add("-" * len(header))
    out.add(f"{res.strategy:<32} {res.mean:>9.4f} {res.std_error:>9.4f} "
            f"{res.min if res.min is not None else '-':>5} "
            f"{res.max if res.max is not None else '-':>5}")
    if res.overflowed:
        out.add(f"{len(res.overflowed)} trials hit the {rs.max_rounds}-round cap "
                "and are excluded from the mean")
    if args.exact:
        try:
            e = random_access.expected_rounds_exact(rs.contenders, rs.slots)
            out.add(f"exact expected rounds (uncoordinated): {e:.6f}")
        except ValueError as exc:
            out.add(f"exact expected rounds: unavailable ({exc})")
    if args.trace:
        out.add("first trial, newly connected per round: "
                + " ".join(str(n) for n in res.connected_trace))
    if args.render or args.log:
        out.timeline(random_access.trial_timeline(rs, 0), "rach-trial0")


def cmd_sdn(args, out: _Output) -> None:
    sc = _with_convention(args, _pick(args, "sdn", "paper-sdn"))
    if args.flow_size is not None:
        sc = replace(sc, flow_size=args.flow_size)
    if args.controller_distance is not None:
        sc = replace(sc, controller_leg=ControllerLeg(args.controller_distance,
                                                      sc.controller_leg.runner_speed))
    problems = validate(sc)
    if problems:
        raise _Fail("\n".join(problems))
    if args.sweep is not None:
        rows = sdn_race.sweep(sc, args.sweep)
        out.add(sweep_csv(rows))
        be = next((F for F, ip, sdn, _ in rows if sdn < ip), None)
        out.add(f"break-even flow size: {be if be is not None else 'none up to ' + str(args.sweep)}")
        if args.render == "png":
            from .report.figures import sweep_figure

            out.outdir.mkdir(parents=True, exist_ok=True)
            path = out.outdir / "sdn-sweep.png"
            sweep_figure(rows, path)
            out.add(f"wrote {path}")
        return
    out.add(f"SDN race: {sc.flow_size} packets per source, {_describe_link(sc.link)}, "
            f"controller {format_seconds(sc.controller_leg.distance)} m away at "
            f"{format_seconds(sc.controller_leg.runner_speed)} m/s")
    modes = {"ip": [Mode.CLASSIC_IP], "sdn": [Mode.SDN_CENTRAL],
             "both": [Mode.CLASSIC_IP, Mode.SDN_CENTRAL]}[args.mode]
    timelines = {m: sdn_race.simulate_sdn(sc, m) for m in modes}
    for m, tl in timelines.items():
        flows = ", ".join(f"flow {f} {format_seconds(sdn_race.flow_completion(tl, f))} s"
                          for f in ("A", "B"))
        out.add(f"{tl.label}: {format_seconds(tl.completion_time)} s ({flows})")
    if len(timelines) == 2:
        rep = compare_races(timelines[Mode.CLASSIC_IP], timelines[Mode.SDN_CENTRAL], ("IP", "SDN"))
        out.add(race_csv(rep) if args.csv else format_race(rep))
    for m, tl in timelines.items():
        out.timeline(tl, f"sdn-{tl.label.lower()}")


def cmd_plan(args, out: _Output) -> None:
    from .report.plan import ClassTooSmall, field_plan, format_plan

    found = _scenarios(args) or preset("paper-linear")
    kind = args.kind or next(iter(found))
    if kind not in found:
        raise _Fail(f"scenario has no '{kind}' section")
    sc = _with_convention(args, found[kind])
    problems = validate(sc)
    if problems:
        raise _Fail("\n".join(problems))
    try:
        plan = field_plan(sc, args.class_size)
    except ClassTooSmall as exc:
        raise _Fail(str(exc)) from None
    out.add(format_plan(plan))


def cmd_validate(args, out: _Output) -> None:
    if args.file:
        args.config = args.file
    found = _scenarios(args)
    if not found:
        raise _Fail("nothing to validate: give a scenario file, --config or --preset")
    bad = False
    for kind, sc in found.items():
        problems = validate(sc)
        if problems:
            bad = True
            out.add(f"{kind}: invalid")
            for p in problems:
                out.add(f"  {kind}.{p}")
        else:
            out.add(f"{kind}: ok")
    if bad:
        out.finish()
        raise _Fail("validation failed")
    if args.show:
        out.add(dumps(list(found.values())))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="scenario document (JSON)")
    common.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    common.add_argument("--convention", choices=["full", "physical"],
                        help="override the arrival convention")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--outdir", default=".", metavar="DIR",
                        help="directory for diagrams and timeline logs (default: .)")
    common.add_argument("--render", choices=["text", "svg", "png"],
                        help="timing diagrams: inline text, SVG files or matplotlib PNG files")
    common.add_argument("--log", action="store_true",
                        help="write each timeline as .tsv event log and .json")
    common.add_argument("--csv", action="store_true", help="race results as CSV")

    parser = argparse.ArgumentParser(
        prog="netrace", description="Simulate and plan field races that model network protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linear", parents=[common], help="message vs packet switching race")
    p.add_argument("--packet-bits", type=int, help="packet size of the packet-switching team")
    p.set_defaults(func=cmd_linear)

    p = sub.add_parser("http", parents=[common], help="web page download")
    p.add_argument("--cache", action="store_true", help="also fetch embedded objects from a cache")
    p.add_argument("--cache-distance", type=float, default=3,
                   help="client-cache distance when the scenario has no cache (default 3 m)")
    p.add_argument("--connections", type=int, help="parallel connections C")
    p.set_defaults(func=cmd_http)

    p = sub.add_parser("rach", parents=[common], help="connection establishment musical chairs")
    p.add_argument("--contenders", type=int)
    p.add_argument("--slots", type=int)
    p.add_argument("--strategy", choices=["uncoordinated", "coordinated", "barring"])
    p.add_argument("--admitted", type=int, help="contenders admitted at first when barring")
    p.add_argument("--admit-per-round", type=int, metavar="K",
                   help="admit K barred contenders per round instead of after the drain")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--exact", action="store_true", help="also print the exact expectation")
    p.add_argument("--trace", action="store_true", help="per-round counts of the first trial")
    p.set_defaults(func=cmd_rach)

    p = sub.add_parser("sdn", parents=[common], help="IP vs SDN routing race")
    p.add_argument("--mode", choices=["ip", "sdn", "both"], default="both")
    p.add_argument("--sweep", type=int, metavar="F_MAX", help="CSV sweep of flow sizes 1..F_MAX")
    p.add_argument("--flow-size", type=int)
    p.add_argument("--controller-distance", type=float)
    p.set_defaults(func=cmd_sdn)

    p = sub.add_parser("plan", parents=[common], help="roles and markings for a class")
    p.add_argument("--class-size", type=int, required=True)
    p.add_argument("--kind", choices=["chain", "web", "rach", "sdn"])
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", parents=[common], help="check a scenario document")
    p.add_argument("file", nargs="?", help="scenario document")
    p.add_argument("--show", action="store_true", help="print the canonical document")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Output(args)
    try:
        args.func(args, out)
    except (_Fail, ScenarioError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"netrace {args.command}: {msg}", file=sys.stderr)
        return 1
    out.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
