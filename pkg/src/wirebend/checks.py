"""Fabricability validation: per-vertex and per-edge diagnostics.

Three graph-level constraints gate fabrication: an Euler path must exist,
every bend must stay within the machine's bend range, and every edge must
meet the minimum length.  Program-level checks additionally enforce the
machine's operating intervals (minimum feed, stock budget, bend range,
cumulative rotation).

All problems are findings, never exceptions; the UI paints them red/green
and the CLI exits nonzero when anything fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instructions import BEND, FEED, ROTATE, InstructionProgram, path_bend_angles
from .machine import MachineProfile
from .wiregraph import WireframeGraph, euler_path, euler_status, EulerStatus

# Absolute slack on limit comparisons so values constructed to sit exactly on
# a boundary are not flipped by float rounding.  Far below any machine
# resolution.
LIMIT_GUARD = 1e-9

PASS = "pass"
FAIL = "fail"


@dataclass(frozen=True)
class VertexFinding:
    vertex: int
    check: str    # "eulericity" or "bend_angle"
    status: str   # PASS or FAIL
    detail: str
    measured: float | None = None

    def to_dict(self) -> dict:
        return {"vertex": self.vertex, "check": self.check, "status": self.status,
                "detail": self.detail, "measured": self.measured}


@dataclass(frozen=True)
class EdgeFinding:
    edge: tuple[int, int]
    check: str    # "min_length"
    status: str
    measured: float

    def to_dict(self) -> dict:
        return {"edge": list(self.edge), "check": self.check, "status": self.status,
                "measured": self.measured}


@dataclass(frozen=True)
class Diagnostics:
    euler: EulerStatus
    euler_pass: bool
    vertex_findings: tuple[VertexFinding, ...]
    edge_findings: tuple[EdgeFinding, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def overall_fabricable(self) -> bool:
        if not self.euler_pass:
            return False
        findings = list(self.vertex_findings) + list(self.edge_findings)
        return all(f.status == PASS for f in findings)

    def failures(self) -> list[VertexFinding | EdgeFinding]:
        return [f for f in (*self.vertex_findings, *self.edge_findings) if f.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "euler": {**self.euler.to_dict(), "pass": self.euler_pass},
            "vertex_findings": [f.to_dict() for f in self.vertex_findings],
            "edge_findings": [f.to_dict() for f in self.edge_findings],
            "warnings": list(self.warnings),
            "overall_fabricable": self.overall_fabricable,
        }


def _bend_findings_from_path(g: WireframeGraph, path: list[int],
                             closed: bool, max_bend: float) -> list[VertexFinding]:
    """One bend finding per distinct vertex with degree >= 2 on the path.

    A vertex visited more than once is judged by its worst (largest) bend.
    For circuits the closure angle at the start/end vertex is included.
    """
    pts = [g.vertices[v] for v in path]
    if closed:
        # Wrap one extra segment so the start vertex gets its closure angle.
        angles = path_bend_angles(pts + [g.vertices[path[1]]])
        visit_vertices = path[1:]
    else:
        angles = path_bend_angles(pts)
        visit_vertices = path[1:-1]

    worst: dict[int, float] = {}
    for vertex, angle in zip(visit_vertices, angles):
        worst[vertex] = max(worst.get(vertex, 0.0), angle)

    findings = []
    for vertex in sorted(worst):
        angle = worst[vertex]
        ok = angle <= max_bend + LIMIT_GUARD
        findings.append(VertexFinding(
            vertex, "bend_angle", PASS if ok else FAIL,
            f"bend {angle:.3f} deg {'within' if ok else 'exceeds'} +/-{max_bend} deg",
            measured=angle,
        ))
    return findings


def _bend_findings_degree_two(g: WireframeGraph, max_bend: float) -> list[VertexFinding]:
    """Fallback when no Euler path exists: judge unambiguous (degree-2) vertices."""
    adj = g.adjacency()
    findings = []
    for vertex, neighbors in enumerate(adj):
        if len(neighbors) != 2:
            continue
        a, b = neighbors
        angle = path_bend_angles([g.vertices[a], g.vertices[vertex], g.vertices[b]])[0]
        ok = angle <= max_bend + LIMIT_GUARD
        findings.append(VertexFinding(
            vertex, "bend_angle", PASS if ok else FAIL,
            f"bend {angle:.3f} deg {'within' if ok else 'exceeds'} +/-{max_bend} deg",
            measured=angle,
        ))
    return findings


def check_all(g: WireframeGraph, limits: MachineProfile) -> Diagnostics:
    """Run every graph-level fabrication check and collect findings."""
    status = euler_status(g)
    euler_pass = status.fabricable_path_exists

    vertex_findings: list[VertexFinding] = []
    for v in status.odd_vertices:
        ok = euler_pass  # odd vertices are fine when exactly two exist (trail ends)
        vertex_findings.append(VertexFinding(
            v, "eulericity", PASS if ok else FAIL,
            "trail endpoint" if ok else "odd degree breaks wire continuity",
        ))

    max_bend = limits.bend.max_bend
    if euler_pass and g.edge_count > 0:
        path = euler_path(g)
        vertex_findings.extend(_bend_findings_from_path(
            g, path, closed=status.classification == "circuit", max_bend=max_bend))
    else:
        vertex_findings.extend(_bend_findings_degree_two(g, max_bend))

    edge_findings = []
    for i, j in g.edges:
        length = g.edge_length(i, j)
        ok = length >= limits.limits.min_edge - LIMIT_GUARD
        edge_findings.append(EdgeFinding(
            (i, j), "min_length", PASS if ok else FAIL, measured=length))

    warnings = []
    isolated = g.isolated_vertices()
    if isolated:
        warnings.append(f"isolated vertices ignored by connectivity: {isolated}")
    if not status.connected and not isolated and g.edge_count > 0 and not status.odd_vertices:
        warnings.append("graph has even degrees but is disconnected")

    return Diagnostics(status, euler_pass, tuple(vertex_findings),
                       tuple(edge_findings), tuple(warnings))


@dataclass(frozen=True)
class ProgramFinding:
    index: int     # instruction index, -1 for whole-program findings
    check: str     # "min_feed", "stock_budget", "bend_range", "rotate_budget"
    status: str
    detail: str
    measured: float

    def to_dict(self) -> dict:
        return {"index": self.index, "check": self.check, "status": self.status,
                "detail": self.detail, "measured": self.measured}


@dataclass(frozen=True)
class ProgramDiagnostics:
    findings: tuple[ProgramFinding, ...]

    @property
    def ok(self) -> bool:
        return all(f.status == PASS for f in self.findings)

    def failures(self) -> list[ProgramFinding]:
        return [f for f in self.findings if f.status == FAIL]

    def to_dict(self) -> dict:
        return {"findings": [f.to_dict() for f in self.findings], "ok": self.ok}


def check_program(p: InstructionProgram, limits: MachineProfile) -> ProgramDiagnostics:
    """Validate a program against the machine's operating intervals.

    Feeds must be at least the machine minimum and fit the stock budget
    (stock length minus tail reserve, cumulatively).  Bends are checked
    against the design limit, or against the physical hard stop when the
    program has already been compensated (commanded angles legitimately
    exceed the design limit).  Rotation is a running signed sum that must
    stay within the cable-wrap interval.
    """
    findings: list[ProgramFinding] = []
    bend_limit = limits.bend.hard_stop if p.corrected else limits.bend.max_bend
    bend_check = "bend_range"

    cumulative_feed = 0.0
    cumulative_rotate = 0.0
    worst_rotate = 0.0
    for idx, ins in enumerate(p.instructions):
        if ins.kind == FEED:
            cumulative_feed += ins.magnitude
            ok = ins.magnitude >= limits.limits.min_feed - LIMIT_GUARD
            findings.append(ProgramFinding(
                idx, "min_feed", PASS if ok else FAIL,
                f"feed {ins.magnitude:.4f} mm vs minimum {limits.limits.min_feed} mm",
                measured=ins.magnitude))
        elif ins.kind == BEND:
            ok = abs(ins.magnitude) <= bend_limit + LIMIT_GUARD
            findings.append(ProgramFinding(
                idx, bend_check, PASS if ok else FAIL,
                f"bend {ins.magnitude:.4f} deg vs +/-{bend_limit} deg",
                measured=ins.magnitude))
        elif ins.kind == ROTATE:
            cumulative_rotate += ins.magnitude
            worst_rotate = max(worst_rotate, abs(cumulative_rotate))

    budget = limits.feed_budget
    ok = cumulative_feed <= budget + LIMIT_GUARD
    findings.append(ProgramFinding(
        -1, "stock_budget", PASS if ok else FAIL,
        f"total feed {cumulative_feed:.4f} mm vs budget {budget:.4f} mm "
        f"(stock {limits.limits.stock_length} - reserve {limits.limits.tail_reserve})",
        measured=cumulative_feed))

    max_cum = limits.rotate.max_cumulative
    ok = worst_rotate <= max_cum + LIMIT_GUARD
    findings.append(ProgramFinding(
        -1, "rotate_budget", PASS if ok else FAIL,
        f"peak cumulative rotation {worst_rotate:.4f} deg vs +/-{max_cum} deg",
        measured=worst_rotate))

    return ProgramDiagnostics(tuple(findings))
