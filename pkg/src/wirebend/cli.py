"""Command-line front end for the wirebending pipeline.

Profile resolution: --profile beats the WIREBEND_PROFILE environment
variable, which beats built-in defaults.  With --json, errors also go to
stdout as a machine-readable object and the exit code stays nonzero.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .compensation import DomainError
from .instructions import BEND, FEED, ROTATE, Instruction, InstructionError
from .machine import load_profile
from .protocol import MachineController, ProtocolError, TransportError, open_channel
from .wiregraph import GraphError

PROFILE_OPTION = click.option(
    "--profile", "profile_path", type=click.Path(exists=True, dir_okay=False),
    envvar="WIREBEND_PROFILE", default=None,
    help="Machine profile JSON (default: built-in reference machine).")

JSON_OPTION = click.option("--json", "as_json", is_flag=True, help="Emit JSON.")

PIPELINE_ERRORS = (GraphError, InstructionError, DomainError, ValueError, OSError)


def _fail(message: str, as_json: bool, code: int = 1) -> "click.exceptions.Exit":
    if as_json:
        click.echo(json.dumps({"error": message}))
    else:
        click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Design-to-fabrication toolkit for 3D wirebending."""


@main.command()
@click.argument("graph_file", type=click.Path(exists=True, dir_okay=False))
@PROFILE_OPTION
@JSON_OPTION
def check(graph_file: str, profile_path: str | None, as_json: bool) -> None:
    """Validate a wireframe; exit 0 only if it is fabricable."""
    try:
        profile = load_profile(profile_path)
        g = pipeline.load_graph_file(graph_file)
        diagnostics = pipeline.validate_graph(g, profile)
    except PIPELINE_ERRORS as exc:
        _fail(str(exc), as_json)
    if as_json:
        click.echo(json.dumps(diagnostics.to_dict(), indent=2))
    else:
        euler = diagnostics.euler
        click.echo(f"euler: {euler.classification} "
                   f"({'pass' if diagnostics.euler_pass else 'FAIL'})")
        for f in diagnostics.vertex_findings:
            mark = "ok " if f.status == "pass" else "FAIL"
            click.echo(f"  [{mark}] vertex {f.vertex:3d} {f.check}: {f.detail}")
        for f in diagnostics.edge_findings:
            mark = "ok " if f.status == "pass" else "FAIL"
            click.echo(f"  [{mark}] edge {f.edge} {f.check}: {f.measured:.3f} mm")
        for w in diagnostics.warnings:
            click.echo(f"  [warn] {w}")
        click.echo("fabricable" if diagnostics.overall_fabricable else "NOT fabricable")
    sys.exit(0 if diagnostics.overall_fabricable else 2)


@main.command(name="compile")
@click.argument("graph_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False),
              help="Instruction text file to write.")
@click.option("--no-correct", is_flag=True,
              help="Skip the error-compensation pass (raw design magnitudes).")
@PROFILE_OPTION
@JSON_OPTION
def compile_cmd(graph_file: str, output: str, no_correct: bool,
                profile_path: str | None, as_json: bool) -> None:
    """Compile a wireframe into a feed/bend/rotate instruction file."""
    try:
        profile = load_profile(profile_path)
        g = pipeline.load_graph_file(graph_file)
        program, text = pipeline.compile_graph(g, profile, correct=not no_correct)
        Path(output).write_bytes(text)
    except PIPELINE_ERRORS as exc:
        _fail(str(exc), as_json)
    if as_json:
        click.echo(json.dumps({"output": output, "instructions": len(program),
                               "corrected": program.corrected}))
    else:
        click.echo(f"wrote {output}: {len(program)} instructions"
                   f"{' (error-corrected)' if program.corrected else ''}")


@main.command()
@click.argument("program_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--svg", "--plot", "svg_path", type=click.Path(dir_okay=False), default=None,
              help="Write an orthographic SVG projection here.")
@click.option("--plane", type=click.Choice(["xy", "xz", "yz"]), default="xy")
@click.option("--as-commanded", is_flag=True,
              help="Fold commanded (compensated) magnitudes without inverting.")
@PROFILE_OPTION
@JSON_OPTION
def simulate(program_file: str, svg_path: str | None, plane: str,
             as_commanded: bool, profile_path: str | None, as_json: bool) -> None:
    """Simulate a program: polyline, timeline, and self-intersections."""
    try:
        profile = load_profile(profile_path)
        program = pipeline.load_program_file(program_file)
        bundle = pipeline.simulation_bundle(program, profile, as_commanded=as_commanded)
        if svg_path:
            Path(svg_path).write_text(pipeline.render_svg(program, profile, plane=plane))
    except PIPELINE_ERRORS as exc:
        _fail(str(exc), as_json)
    if as_json:
        click.echo(json.dumps(bundle, indent=2))
    else:
        points = bundle["polyline"]["points"]
        click.echo(f"polyline: {len(points)} points, "
                   f"{bundle['timeline']['total_time']:.2f} s estimated")
        hits = bundle["intersections"]
        click.echo(f"self-intersections: {len(hits)}"
                   + (f" {hits}" if hits else ""))
        findings = bundle["program_findings"]
        bad = [f for f in findings["findings"] if f["status"] == "fail"]
        for f in bad:
            click.echo(f"  [FAIL] {f['check']}: {f['detail']}")
        if svg_path:
            click.echo(f"wrote {svg_path}")
    if bundle["intersections"] or not bundle["program_findings"]["ok"]:
        sys.exit(2)


@main.command()
@click.argument("program_file", type=click.Path(exists=True, dir_okay=False))
@PROFILE_OPTION
@JSON_OPTION
def estimate(program_file: str, profile_path: str | None, as_json: bool) -> None:
    """Estimate fabrication time, wire consumption, and material cost."""
    try:
        profile = load_profile(profile_path)
        program = pipeline.load_program_file(program_file)
        report = pipeline.estimate_program(program, profile)
    except PIPELINE_ERRORS as exc:
        _fail(str(exc), as_json)
    if as_json:
        click.echo(json.dumps(report))
    else:
        click.echo(f"time: {report['total_time_s']:.1f} s")
        click.echo(f"material: {report['material_mm']:.1f} mm")
        click.echo(f"cost: ${report['material_cost_usd']:.2f}")


def _open_controller(port: str | None, emulate: bool, profile_path: str | None):
    profile = load_profile(profile_path)
    if emulate or port in (None, "emulate:", "emulate"):
        channel = open_channel("emulate:", profile)
    else:
        channel = open_channel(port, profile)
    return MachineController(channel, profile)


@main.command()
@click.argument("program_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=None, help="Transport address (tcp:HOST:PORT).")
@click.option("--emulate", is_flag=True, help="Run against an in-process emulator.")
@PROFILE_OPTION
@JSON_OPTION
def run(program_file: str, port: str | None, emulate: bool,
        profile_path: str | None, as_json: bool) -> None:
    """Fabricate a program on the machine (or the emulator)."""
    if port is None and not emulate:
        _fail("provide --port or --emulate", as_json)
    try:
        program = pipeline.load_program_file(program_file)
        controller = _open_controller(port, emulate, profile_path)
        report = controller.run_program(program)
    except (TransportError, ProtocolError, *PIPELINE_ERRORS) as exc:
        _fail(str(exc), as_json)
    if as_json:
        click.echo(json.dumps(report.to_dict()))
    else:
        click.echo(f"{report.status}: {report.commands_sent}/{report.total_commands} "
                   f"commands in {report.elapsed_s:.2f} s")
    sys.exit(0 if report.status == "done" else 3)


@main.command()
@click.argument("kind", type=click.Choice([FEED, BEND, ROTATE]))
@click.argument("magnitude", type=float)
@click.option("--port", default=None, help="Transport address (tcp:HOST:PORT).")
@click.option("--emulate", is_flag=True, help="Jog an in-process emulator.")
@PROFILE_OPTION
@JSON_OPTION
def jog(kind: str, magnitude: float, port: str | None, emulate: bool,
        profile_path: str | None, as_json: bool) -> None:
    """Execute a single feed/bend/rotate command."""
    if port is None and not emulate:
        _fail("provide --port or --emulate", as_json)
    try:
        controller = _open_controller(port, emulate, profile_path)
        if kind == BEND:
            controller.home()
        events = controller.jog(Instruction(kind, magnitude))
    except (TransportError, ProtocolError, *PIPELINE_ERRORS) as exc:
        _fail(str(exc), as_json)
    click.echo(json.dumps({"ok": True, "events": events}) if as_json else "ok")


@main.command()
@click.option("--port", default=None, help="Transport address (tcp:HOST:PORT).")
@click.option("--emulate", is_flag=True)
@PROFILE_OPTION
@JSON_OPTION
def home(port: str | None, emulate: bool, profile_path: str | None, as_json: bool) -> None:
    """Run the homing procedure (zeroes the bend axis)."""
    if port is None and not emulate:
        _fail("provide --port or --emulate", as_json)
    try:
        controller = _open_controller(port, emulate, profile_path)
        events = controller.home()
    except (TransportError, ProtocolError, *PIPELINE_ERRORS) as exc:
        _fail(str(exc), as_json)
    click.echo(json.dumps({"ok": True, "events": events}) if as_json else "ok")


@main.command()
@click.option("--port", required=True, help="Transport address (tcp:HOST:PORT).")
@PROFILE_OPTION
@JSON_OPTION
def stop(port: str, profile_path: str | None, as_json: bool) -> None:
    """Send an immediate STOP to a machine."""
    try:
        controller = _open_controller(port, False, profile_path)
        controller.stop()
    except (TransportError, ProtocolError, *PIPELINE_ERRORS) as exc:
        _fail(str(exc), as_json)
    click.echo(json.dumps({"ok": True}) if as_json else "ok")


@main.command()
@click.option("--listen", default="127.0.0.1:8000", help="HOST:PORT to bind.")
@click.option("--machine", "machine_address", default="emulate:",
              help="Machine transport for job runs (default: emulator).")
@PROFILE_OPTION
def serve(listen: str, machine_address: str, profile_path: str | None) -> None:
    """Serve the HTTP/JSON API (and the design UI's backend)."""
    import uvicorn

    from .service import create_app

    host, _, port_text = listen.rpartition(":")
    app = create_app(load_profile(profile_path), machine_address=machine_address)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
