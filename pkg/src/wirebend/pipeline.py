"""End-to-end pipeline helpers shared by the CLI and the HTTP service.

Keeping these in one place guarantees the two front ends produce identical
artifacts (byte-identical instruction text in particular).
"""

from __future__ import annotations

from pathlib import Path

from .checks import Diagnostics, ProgramDiagnostics, check_all, check_program
from .compensation import apply_corrections
from .instructions import InstructionProgram, compile_path, emit_text, parse_text
from .machine import MachineProfile
from .simulate import Timeline, WirePolyline, polyline_svg, self_intersections, simulate, timeline
from .wiregraph import WireframeGraph, euler_path, ingest_graph


def load_graph_file(path: str | Path) -> WireframeGraph:
    p = Path(path)
    fmt = "obj" if p.suffix.lower() == ".obj" else "json" if p.suffix.lower() == ".json" else None
    return ingest_graph(p.read_text(), fmt=fmt)


def load_program_file(path: str | Path) -> InstructionProgram:
    return parse_text(Path(path).read_bytes())


def compile_graph(g: WireframeGraph, profile: MachineProfile,
                  correct: bool = True) -> tuple[InstructionProgram, bytes]:
    """Euler path -> instructions -> (optionally) error compensation."""
    path = euler_path(g)
    program = compile_path(g, path)
    if correct:
        program = apply_corrections(program, profile.compensation,
                                    min_feed=profile.limits.min_feed)
    return program, emit_text(program)


def validate_graph(g: WireframeGraph, profile: MachineProfile) -> Diagnostics:
    return check_all(g, profile)


def simulation_bundle(p: InstructionProgram, profile: MachineProfile,
                      as_commanded: bool = False) -> dict:
    """Polyline, schedule, collision report, and program findings as one dict."""
    poly = simulate(p, compensation=profile.compensation,
                    undo_correction=not as_commanded)
    schedule = timeline(p, profile)
    hits = self_intersections(poly, profile.compensation.wire_diameter)
    findings = check_program(p, profile)
    return {
        "polyline": poly.to_dict(),
        "timeline": schedule.to_dict(),
        "intersections": [list(pair) for pair in hits],
        "program_findings": findings.to_dict(),
    }


def estimate_program(p: InstructionProgram, profile: MachineProfile) -> dict:
    """Fabrication time, wire consumption, and material cost."""
    schedule = timeline(p, profile)
    material = p.total_feed()
    return {
        "total_time_s": schedule.total_time,
        "material_mm": material,
        "material_cost_usd": material * profile.wire_cost_per_mm,
    }


def render_svg(p: InstructionProgram, profile: MachineProfile,
               plane: str = "xy") -> str:
    poly = simulate(p, compensation=profile.compensation)
    return polyline_svg(poly, plane=plane)
