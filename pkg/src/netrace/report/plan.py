"""Role assignment and ground markings for running an activity with a class."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction

from .. import analytic, random_access
from ..core import (
    ChainScenario, PerNodeRunners, RachScenario, SdnScenario, WebScenario,
    format_seconds,
)


class Role(str, enum.Enum):
    SOURCE_STAFF = "SourceStaff"
    NODE_STAFF = "NodeStaff"
    BIT_STUDENT = "BitStudent"
    PACKET_STUDENT = "PacketStudent"
    CONTROL_RUNNER = "ControlRunner"
    RECORD_KEEPER = "RecordKeeper"
    CLIENT = "Client"
    SERVER = "Server"
    TCP_RUNNER = "TcpRunner"
    HTTP_RUNNER = "HttpRunner"


class ClassTooSmall(ValueError):
    def __init__(self, class_size: int, minimum: int):
        self.class_size, self.minimum = class_size, minimum
        super().__init__(f"class of {class_size} is too small; this activity needs "
                         f"at least {minimum} students")


@dataclass(frozen=True)
class Assignment:
    role: Role
    count: int
    group: str = ""
    staff: bool = False  # filled by a teacher or outreach assistant, not a student
    note: str = ""


@dataclass(frozen=True)
class Marking:
    start: str
    end: str
    distance: Fraction


@dataclass(frozen=True)
class FieldPlan:
    activity: str
    class_size: int
    roles: tuple[Assignment, ...]
    markings: tuple[Marking, ...]
    predicted_times: dict

    @property
    def student_count(self) -> int:
        return sum(a.count for a in self.roles if not a.staff)


def _fill_support(groups, movers_role, movers, spare, node_roles):
    """Hand spare students the support roles, then spread the rest as reserves.

    ``movers``: per-group number of moving students the scenario needs.
    ``node_roles``: per-group list of node names that may be student-run.
    """
    roles: list[Assignment] = []
    for g in groups:
        roles.append(Assignment(movers_role, movers, g))
    for g in groups:
        if spare > 0:
            roles.append(Assignment(Role.RECORD_KEEPER, 1, g))
            spare -= 1
        else:
            roles.append(Assignment(Role.RECORD_KEEPER, 1, g, staff=True))
    for g in groups:
        nodes = node_roles.get(g, [])
        by_student = min(spare, len(nodes))
        spare -= by_student
        if by_student:
            roles.append(Assignment(Role.NODE_STAFF, by_student, g,
                                    note="nodes " + ", ".join(nodes[:by_student])))
        if len(nodes) > by_student:
            roles.append(Assignment(Role.NODE_STAFF, len(nodes) - by_student, g, staff=True,
                                    note="nodes " + ", ".join(nodes[by_student:])))
    share, extra = divmod(spare, len(groups))
    for i, g in enumerate(groups):
        n = share + (1 if i < extra else 0)
        if n:
            roles.append(Assignment(movers_role, n, g, note="reserves for a rerun"))
    return roles


def _chain_plan(sc: ChainScenario, class_size: int) -> FieldPlan:
    groups = ("message switching", "packet switching")
    need = 2 * sc.message_bits
    if class_size < need:
        raise ClassTooSmall(class_size, need)
    names = sc.node_names()
    inner = names[1:-1]
    roles = [Assignment(Role.SOURCE_STAFF, 1, g, staff=True, note="node A") for g in groups]
    roles += _fill_support(groups, Role.BIT_STUDENT, sc.message_bits, class_size - need,
                           {g: list(inner) for g in groups})
    marks = tuple(Marking(f"{g}:{u}", f"{g}:{v}", sc.link.length)
                  for g in groups for u, v in zip(names, names[1:]))
    M, P, N = sc.message_bits, sc.packet_bits, sc.intermediate_nodes
    predicted = {
        "message switching": analytic.message_switching_delay(M, sc.link, N, sc.convention),
        f"packet switching P={P}": analytic.packet_switching_delay(M, P, sc.link, N,
                                                                   sc.convention).total,
    }
    return FieldPlan("store-and-forward race", class_size, tuple(roles), marks, predicted)


def _web_plan(w: WebScenario, class_size: int) -> FieldPlan:
    C = w.parallel_connections
    carriers = max([w.base_bits, *w.embedded_objects]) * C
    fixed = 2 + 2 * C  # client, server, TCP and HTTP runners per connection
    need = fixed + carriers
    if class_size < need:
        raise ClassTooSmall(class_size, need)
    g = "web download"
    roles = [Assignment(Role.CLIENT, 1, g), Assignment(Role.SERVER, 1, g),
             Assignment(Role.TCP_RUNNER, C, g), Assignment(Role.HTTP_RUNNER, C, g)]
    roles += _fill_support((g,), Role.BIT_STUDENT, carriers, class_size - need, {})
    marks = [Marking("client", "server", w.server_link.length)]
    predicted = {"download from server": analytic.web_download_delay(w)}
    if w.cache is not None:
        marks.append(Marking("client", "cache", w.cache.length))
        predicted["download with cache"] = analytic.cached_download_delay(w)
    return FieldPlan("web page download", class_size, tuple(roles), tuple(marks), predicted)


def _rach_plan(rs: RachScenario, class_size: int) -> FieldPlan:
    groups = ("group 1", "group 2")
    need = 2 * rs.contenders
    if class_size < need:
        raise ClassTooSmall(class_size, need)
    roles = _fill_support(groups, Role.PACKET_STUDENT, rs.contenders, class_size - need, {})
    predicted = {"coordinated rounds": Fraction(
        random_access.coordinated_rounds(rs.contenders, rs.slots))}
    if rs.contenders <= random_access.EXACT_LIMIT and rs.slots <= random_access.EXACT_LIMIT:
        exact = random_access.expected_rounds_fraction(rs.contenders, rs.slots)
        if exact is not None:
            predicted["expected uncoordinated rounds"] = exact
    return FieldPlan("connection establishment (musical chairs)", class_size, tuple(roles),
                     (), predicted)


def _sdn_plan(sc: SdnScenario, class_size: int) -> FieldPlan:
    from .. import sdn_race  # deferred: sdn_race imports this package

    groups = ("IP", "SDN")
    per_group = 2 * sc.flow_size
    need = 2 * per_group
    if class_size < need:
        raise ClassTooSmall(class_size, need)
    roles = []
    for g in groups:
        roles.append(Assignment(Role.SOURCE_STAFF, 2, g, staff=True, note="sources A and B"))
        roles.append(Assignment(Role.NODE_STAFF, 1, g, staff=True, note="node a"))
    roles.append(Assignment(Role.CONTROL_RUNNER, 1, "SDN", staff=True, note="staff member at a"))
    if isinstance(sc.config_style, PerNodeRunners):
        roles.append(Assignment(Role.CONTROL_RUNNER, 6, "SDN", staff=True,
                                note="controller runners to a, b, c and a, d, e"))
    roles += _fill_support(groups, Role.PACKET_STUDENT, per_group, class_size - need,
                           {g: ["b", "c", "d", "e"] for g in groups})
    roles = [replace(a, note=f"{sc.flow_size} at A, {sc.flow_size} at B")
             if a.role is Role.PACKET_STUDENT and not a.note else a for a in roles]
    edges = [(u, v) for u, vs in sdn_race.TOPOLOGY.items() for v in vs]
    marks = [Marking(f"{g}:{u}", f"{g}:{v}", sc.link.length) for g in groups for u, v in edges]
    if sc.hypervisor is not None:
        marks.append(Marking("SDN:a", "SDN:hypervisor", sc.hypervisor.node_distance))
        marks.append(Marking("SDN:hypervisor", "SDN:controller",
                             sc.hypervisor.controller_distance))
    else:
        marks.append(Marking("SDN:a", "SDN:controller", sc.controller_leg.distance))
        if isinstance(sc.config_style, PerNodeRunners):
            for node in ("b", "c", "d", "e"):
                marks.append(Marking("SDN:controller", f"SDN:{node}",
                                     sc.config_style.distances[node]))
    rep = sdn_race.run_race(sc)
    predicted = {"IP": rep.times[0], "SDN": rep.times[1]}
    return FieldPlan("SDN networking race", class_size, tuple(roles), tuple(marks), predicted)


def field_plan(scenario, class_size: int) -> FieldPlan:
    """Assign roles for ``class_size`` students and attach predicted times.

    The scenario fixes how many moving students each group needs; source
    and node posts default to staff.  Spare students first become record
    keepers, then run intermediate nodes, and any remainder are split
    across groups as reserves.  Student counts always sum to the class size.
    """
    if isinstance(scenario, ChainScenario):
        return _chain_plan(scenario, class_size)
    if isinstance(scenario, WebScenario):
        return _web_plan(scenario, class_size)
    if isinstance(scenario, RachScenario):
        return _rach_plan(scenario, class_size)
    if isinstance(scenario, SdnScenario):
        return _sdn_plan(scenario, class_size)
    raise TypeError(f"no field plan for {type(scenario).__name__}")


def format_plan(plan: FieldPlan) -> str:
    lines = [f"{plan.activity} for a class of {plan.class_size}", "", "roles:"]
    for a in plan.roles:
        who = "staff" if a.staff else "students"
        where = f" [{a.group}]" if a.group else ""
        note = f" ({a.note})" if a.note else ""
        lines.append(f"  {a.count:>3} {a.role.value:<14} {who:<8}{where}{note}")
    lines.append(f"  students assigned: {plan.student_count}")
    if plan.markings:
        lines += ["", "markings:"]
        for m in plan.markings:
            lines.append(f"  {m.start} -> {m.end}: {format_seconds(m.distance)} m")
    lines += ["", "predicted:"]
    unit = "rounds" if plan.activity.startswith("connection") else "s"
    for k, v in plan.predicted_times.items():
        lines.append(f"  {k}: {format_seconds(v)} {unit}")
    return "\n".join(lines) + "\n"
