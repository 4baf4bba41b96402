from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wirebend.compensation import CompensationParams
from wirebend.instructions import InstructionProgram, compile_path
from wirebend.machine import MachineProfile
from wirebend.wiregraph import WireframeGraph, euler_path, graph_from_data


@pytest.fixture(scope="session")
def profile() -> MachineProfile:
    return MachineProfile()


@pytest.fixture(scope="session")
def calibrated_params() -> CompensationParams:
    """An in-domain setback parameter set (the defaults leave the model's
    validity region for mid-range angles, which is surfaced as DomainError)."""
    return CompensationParams(peg_arc_radius=5.0, setback_distance=50.0,
                              bend_rod_radius=1.0, nozzle_rod_radius=1.0)


@pytest.fixture(scope="session")
def u_graph() -> WireframeGraph:
    return graph_from_data([[0, 0, 0], [35, 0, 0], [35, 35, 0], [0, 35, 0]],
                           [[0, 1], [1, 2], [2, 3]])


@pytest.fixture(scope="session")
def u_program(u_graph) -> InstructionProgram:
    return compile_path(u_graph, euler_path(u_graph))


def cube_trace_graph(side: float = 30.0) -> WireframeGraph:
    """Open 8-edge trace over a cube: bottom face circuit, one pillar, and
    three top edges.  Exactly two odd vertices (an Euler trail)."""
    s = side
    vertices = [
        [0, 0, 0], [s, 0, 0], [s, s, 0], [0, s, 0],   # bottom 0-3
        [0, 0, s], [s, 0, s], [s, s, s], [0, s, s],   # top 4-7
    ]
    edges = [[0, 1], [1, 2], [2, 3], [0, 3], [0, 4], [4, 5], [5, 6], [6, 7]]
    return graph_from_data(vertices, edges)


def full_cube_graph(side: float = 30.0) -> WireframeGraph:
    s = side
    vertices = [
        [0, 0, 0], [s, 0, 0], [s, s, 0], [0, s, 0],
        [0, 0, s], [s, 0, s], [s, s, s], [0, s, s],
    ]
    edges = [[0, 1], [1, 2], [2, 3], [0, 3],
             [4, 5], [5, 6], [6, 7], [4, 7],
             [0, 4], [1, 5], [2, 6], [3, 7]]
    return graph_from_data(vertices, edges)


@pytest.fixture(scope="session")
def cube_graph() -> WireframeGraph:
    return cube_trace_graph()


@pytest.fixture(scope="session")
def cube_program(cube_graph) -> InstructionProgram:
    return compile_path(cube_graph, euler_path(cube_graph))


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_walk_points(rng: np.random.Generator, n_vertices: int,
                       min_step: float = 25.0, max_step: float = 70.0,
                       max_turn: float = 120.0) -> list[list[float]]:
    """Random open 3D path with edge lengths >= min_step and bends <= max_turn."""
    points = [np.zeros(3)]
    heading = random_unit(rng)
    points.append(points[0] + heading * rng.uniform(min_step, max_step))
    for _ in range(n_vertices - 2):
        # Turn about a random axis perpendicular to the current heading.
        axis = np.cross(heading, random_unit(rng))
        while np.linalg.norm(axis) < 1e-6:
            axis = np.cross(heading, random_unit(rng))
        axis = axis / np.linalg.norm(axis)
        turn = math.radians(rng.uniform(1.0, max_turn))
        c, s = math.cos(turn), math.sin(turn)
        heading = heading * c + np.cross(axis, heading) * s
        heading = heading / np.linalg.norm(heading)
        points.append(points[-1] + heading * rng.uniform(min_step, max_step))
    return [list(map(float, p)) for p in points]


def random_polygon_points(rng: np.random.Generator, n_sides: int,
                          side: float | None = None) -> list[list[float]]:
    """Regular polygon with a random 3D pose (closed: first vertex repeats last)."""
    if side is None:
        side = rng.uniform(25.0, 60.0)
    radius = side / (2.0 * math.sin(math.pi / n_sides))
    flat = [np.array([radius * math.cos(2 * math.pi * k / n_sides),
                      radius * math.sin(2 * math.pi * k / n_sides), 0.0])
            for k in range(n_sides)]
    axis = random_unit(rng)
    angle = rng.uniform(0, 2 * math.pi)
    c, s = math.cos(angle), math.sin(angle)

    def rot(v: np.ndarray) -> np.ndarray:
        return v * c + np.cross(axis, v) * s + axis * float(np.dot(axis, v)) * (1 - c)

    offset = rng.uniform(-100, 100, size=3)
    return [list(map(float, rot(p) + offset)) for p in flat]


def random_fabricable_graph(rng: np.random.Generator):
    """Graph + its Euler path vertex sequence, within machine constraints."""
    if rng.random() < 0.7:
        n = int(rng.integers(3, 13))
        points = random_walk_points(rng, n)
        edges = [[i, i + 1] for i in range(n - 1)]
        g = graph_from_data(points, edges)
        return g, list(range(n))
    n = int(rng.integers(3, 9))
    points = random_polygon_points(rng, n)
    edges = [[i, (i + 1) % n] for i in range(n)]
    g = graph_from_data(points, edges)
    return g, list(range(n)) + [0]


def random_program(rng: np.random.Generator, max_len: int = 20,
                   quantized: bool = True) -> InstructionProgram:
    """Random conformant program: magnitudes on the 1e-4 grid by default (so
    the text format round-trips exactly), bends inside the design limit, and
    the running rotation inside the cable-wrap budget."""
    from wirebend.instructions import Instruction, BEND, FEED, ROTATE

    def q(x: float) -> float:
        return round(x, 4) if quantized else x

    instrs = [Instruction(FEED, q(rng.uniform(1.0, 120.0)))]
    cumulative_rotate = 0.0
    for _ in range(int(rng.integers(0, max_len))):
        kind = rng.choice([FEED, BEND, ROTATE])
        if kind == FEED:
            instrs.append(Instruction(FEED, q(rng.uniform(0.5, 120.0))))
        elif kind == BEND:
            instrs.append(Instruction(BEND, q(rng.uniform(-155.0, 155.0))))
        else:
            lo = max(-180.0, -355.0 - cumulative_rotate)
            hi = min(180.0, 355.0 - cumulative_rotate)
            mag = q(rng.uniform(lo, hi))
            cumulative_rotate += mag
            instrs.append(Instruction(ROTATE, mag))
    return InstructionProgram(tuple(instrs))
