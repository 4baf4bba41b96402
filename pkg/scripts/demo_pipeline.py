#!/usr/bin/env python3
"""End-to-end walkthrough: design a cube trace, validate it, compile it,
simulate it, estimate it, and fabricate it on the emulator.

Writes cube.json, cube.txt and cube.svg into ./out/.
"""

from __future__ import annotations

import json
from pathlib import Path

from wirebend import pipeline
from wirebend.instructions import compile_path, emit_text
from wirebend.machine import MachineProfile
from wirebend.protocol import Emulator, MachineController
from wirebend.simulate import polyline_svg, simulate
from wirebend.wiregraph import euler_path, graph_from_data


def cube_trace(side: float = 30.0):
    s = side
    vertices = [
        [0, 0, 0], [s, 0, 0], [s, s, 0], [0, s, 0],
        [0, 0, s], [s, 0, s], [s, s, s], [0, s, s],
    ]
    edges = [[0, 1], [1, 2], [2, 3], [0, 3], [0, 4], [4, 5], [5, 6], [6, 7]]
    return graph_from_data(vertices, edges)


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "out"
    out.mkdir(exist_ok=True)
    profile = MachineProfile()

    g = cube_trace()
    (out / "cube.json").write_text(json.dumps(g.to_dict(), indent=2))

    diagnostics = pipeline.validate_graph(g, profile)
    print(f"euler: {diagnostics.euler.classification}, "
          f"fabricable: {diagnostics.overall_fabricable}")

    path = euler_path(g)
    print(f"trace: {path}")
    program = compile_path(g, path)
    (out / "cube.txt").write_bytes(emit_text(program))
    print(f"compiled {len(program)} instructions, "
          f"{program.total_feed():.0f} mm of wire")

    estimate = pipeline.estimate_program(program, profile)
    print(f"estimate: {estimate['total_time_s']:.0f} s, "
          f"${estimate['material_cost_usd']:.2f}")

    poly = simulate(program)
    (out / "cube.svg").write_text(polyline_svg(poly, plane="xy"))

    emulator = Emulator(profile)
    controller = MachineController(emulator.start(), profile)
    run = controller.run_program(program)
    print(f"emulated run: {run.status}, {run.commands_sent} commands, "
          f"step totals {run.step_totals}")
    print(f"wrote {out}/cube.json, cube.txt, cube.svg")


if __name__ == "__main__":
    main()
