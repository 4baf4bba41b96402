"""Forward-kinematics simulation of an instruction program.

The wire state is a position, a heading (wire exit direction), and the
current bending-plane normal.  Feeds translate along the heading, rotates
spin the plane normal about the heading, bends spin the heading about the
plane normal; all rotations follow the right-hand rule.  Simulation starts
at the origin heading +X with plane normal +Z, which fixes one congruent
representative of the wire shape.

Bends are drawn as sharp corners; the physical bend radius is a feed
compensation concern, not a visualization one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compensation import CompensationParams, undo_corrections
from .instructions import BEND, FEED, ROTATE, InstructionProgram
from .machine import MachineProfile


class SimulationError(ValueError):
    pass


def rotate_about(v: np.ndarray, axis: np.ndarray, deg: float) -> np.ndarray:
    """Rodrigues rotation of v about a unit axis, right-hand rule."""
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    return v * c + np.cross(axis, v) * s + axis * float(np.dot(axis, v)) * (1.0 - c)


@dataclass(frozen=True)
class WirePolyline:
    """Simulated wire as ordered 3D points; provenance maps each segment to
    the (feed) instruction index that produced it."""

    points: tuple[tuple[float, float, float], ...]
    provenance: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for a, b in zip(self.points, self.points[1:]):
            if math.dist(a, b) == 0.0:
                raise SimulationError("polyline has coincident consecutive points")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def segment_count(self) -> int:
        return max(0, len(self.points) - 1)

    def total_length(self) -> float:
        return sum(math.dist(a, b) for a, b in zip(self.points, self.points[1:]))

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points],
                "provenance": list(self.provenance)}


@dataclass
class SimState:
    """Mutable wire state folded over the instruction list."""

    position: np.ndarray
    heading: np.ndarray
    plane_normal: np.ndarray
    points: list[tuple[float, float, float]]
    provenance: list[int]
    elapsed: float = 0.0

    @staticmethod
    def initial() -> "SimState":
        origin = np.zeros(3)
        return SimState(origin, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]),
                        [(0.0, 0.0, 0.0)], [])

    def check(self) -> None:
        if (abs(float(np.linalg.norm(self.heading)) - 1.0) > 1e-9
                or abs(float(np.linalg.norm(self.plane_normal)) - 1.0) > 1e-9
                or abs(float(np.dot(self.heading, self.plane_normal))) > 1e-9):
            raise SimulationError("degenerate wire frame (heading/normal drifted)")

    def apply(self, kind: str, magnitude: float, index: int) -> None:
        if kind == FEED:
            self.position = self.position + magnitude * self.heading
            self.points.append(tuple(float(c) for c in self.position))
            self.provenance.append(index)
        elif kind == ROTATE:
            self.plane_normal = rotate_about(self.plane_normal, self.heading, magnitude)
        elif kind == BEND:
            self.heading = rotate_about(self.heading, self.plane_normal, magnitude)
        self._renormalize()

    def _renormalize(self) -> None:
        self.heading = self.heading / float(np.linalg.norm(self.heading))
        n = self.plane_normal - self.heading * float(np.dot(self.plane_normal, self.heading))
        self.plane_normal = n / float(np.linalg.norm(n))


def simulate(p: InstructionProgram,
             compensation: CompensationParams | None = None,
             undo_correction: bool = True) -> WirePolyline:
    """Reconstruct the wire polyline a program produces.

    Error-corrected programs are inverted back to their design geometry
    first (the animation should show the intended shape, not the commanded
    over-bends); pass undo_correction=False to fold the commanded values
    as-is.  Inversion needs the compensation constants; when omitted the
    default parameter set is used.
    """
    if p.corrected and undo_correction:
        p = undo_corrections(p, compensation or CompensationParams())
    state = SimState.initial()
    for index, ins in enumerate(p.instructions):
        state.apply(ins.kind, ins.magnitude, index)
        state.check()
    return WirePolyline(tuple(state.points), tuple(state.provenance))


@dataclass(frozen=True)
class TimelineEvent:
    index: int   # instruction index; -1 for the homing prelude
    kind: str    # "home", "feed", "bend", "rotate"
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_dict(self) -> dict:
        return {"index": self.index, "kind": self.kind,
                "start": self.start, "end": self.end}


_KIND_NAMES = {FEED: "feed", BEND: "bend", ROTATE: "rotate"}


@dataclass(frozen=True)
class Timeline:
    events: tuple[TimelineEvent, ...]
    total_time: float

    def to_dict(self) -> dict:
        return {"events": [e.to_dict() for e in self.events],
                "total_time": self.total_time}


def timeline(p: InstructionProgram, profile: MachineProfile) -> Timeline:
    """Estimated fabrication schedule: contiguous per-instruction events.

    A bend sweeps out and back, so it costs twice its sweep time, plus the
    peg retract overhead whenever the bend direction flips.  A constant
    homing prelude opens every job.  All overheads come from the profile.
    """
    events: list[TimelineEvent] = []
    t = 0.0
    if profile.speeds.homing_overhead_s > 0:
        events.append(TimelineEvent(-1, "home", 0.0, profile.speeds.homing_overhead_s))
        t = profile.speeds.homing_overhead_s
    prev_bend_sign = 0
    for idx, ins in enumerate(p.instructions):
        if ins.kind == FEED:
            dt = ins.magnitude / profile.speeds.feed
        elif ins.kind == ROTATE:
            dt = abs(ins.magnitude) / profile.speeds.rotate
        else:
            dt = 2.0 * abs(ins.magnitude) / profile.speeds.bend
            sign = 1 if ins.magnitude > 0 else -1 if ins.magnitude < 0 else 0
            if sign and prev_bend_sign and sign != prev_bend_sign:
                dt += profile.speeds.retract_overhead_s
            if sign:
                prev_bend_sign = sign
        events.append(TimelineEvent(idx, _KIND_NAMES[ins.kind], t, t + dt))
        t += dt
    return Timeline(tuple(events), t)


class SimulationPlayer:
    """Stepping interface for animation: advance by wall time, read the
    partially-built polyline.  Single consumer per instance."""

    def __init__(self, p: InstructionProgram, profile: MachineProfile,
                 compensation: CompensationParams | None = None):
        if p.corrected:
            p = undo_corrections(p, compensation or profile.compensation)
        self.program = p
        self.schedule = timeline(p, profile)
        self.position = 0.0

    @property
    def total_time(self) -> float:
        return self.schedule.total_time

    @property
    def progress(self) -> float:
        if self.total_time == 0.0:
            return 1.0
        return min(1.0, self.position / self.total_time)

    def advance(self, dt: float) -> None:
        self.position = min(self.total_time, self.position + dt)

    def seek(self, t: float) -> None:
        self.position = min(max(0.0, t), self.total_time)

    def snapshot(self) -> WirePolyline:
        """Wire shape at the current playback position.

        Completed instructions are folded fully; an in-flight feed is folded
        at its completed fraction.  In-flight bends/rotates are folded at
        their swept fraction, which matches the machine's motion.
        """
        state = SimState.initial()
        for event in self.schedule.events:
            if event.index < 0:
                continue
            ins = self.program.instructions[event.index]
            if event.end <= self.position:
                state.apply(ins.kind, ins.magnitude, event.index)
                continue
            if event.start < self.position:
                frac = (self.position - event.start) / event.duration
                if ins.kind == BEND:
                    # Sweep-out occupies the first half of the event.
                    frac = min(1.0, 2.0 * frac)
                state.apply(ins.kind, ins.magnitude * frac, event.index)
            break
        return WirePolyline(tuple(state.points), tuple(state.provenance))


# --- wire self-intersection ---------------------------------------------------

def _segment_distance(p1: np.ndarray, q1: np.ndarray,
                      p2: np.ndarray, q2: np.ndarray) -> float:
    """Minimum distance between 3D segments p1q1 and p2q2 (clamped closest
    points of the infinite lines, standard quadratic minimization)."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    if a == 0.0 and e == 0.0:
        return float(np.linalg.norm(r))
    if a == 0.0:
        t = min(1.0, max(0.0, f / e))
        return float(np.linalg.norm(p1 - (p2 + t * d2)))
    c = float(np.dot(d1, r))
    if e == 0.0:
        s = min(1.0, max(0.0, -c / a))
        return float(np.linalg.norm(p1 + s * d1 - p2))
    b = float(np.dot(d1, d2))
    denom = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom > 0.0 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm(p1 + s * d1 - (p2 + t * d2)))


def self_intersections(w: WirePolyline, wire_diameter: float) -> list[tuple[int, int]]:
    """Pairs of non-adjacent segments closer than one wire diameter.

    Segments sharing a polyline point are exempt, including the first/last
    pair of a closed polyline (intentional closure is not a collision).
    Candidate pairs are pruned with axis-aligned bounding boxes inflated by
    the diameter before the exact distance test.
    """
    pts = w.as_array()
    n = len(pts) - 1
    if n < 2:
        return []
    closed = bool(np.linalg.norm(pts[0] - pts[-1]) < 1e-9)

    lo = np.minimum(pts[:-1], pts[1:])
    hi = np.maximum(pts[:-1], pts[1:])

    hits = []
    for i in range(n):
        for j in range(i + 2, n):
            if closed and i == 0 and j == n - 1:
                continue
            if np.any(lo[i] > hi[j] + wire_diameter) or np.any(hi[i] < lo[j] - wire_diameter):
                continue
            d = _segment_distance(pts[i], pts[i + 1], pts[j], pts[j + 1])
            if d < wire_diameter:
                hits.append((i, j))
    return hits


# --- SVG export ----------------------------------------------------------------

def polyline_svg(w: WirePolyline, width: int = 640, height: int = 480,
                 plane: str = "xy", margin: float = 20.0) -> str:
    """Orthographic projection of the polyline as a standalone SVG document."""
    axes = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
    if plane not in axes:
        raise ValueError(f"unknown projection plane {plane!r}")
    ax, ay = axes[plane]
    pts = w.as_array()
    xs, ys = pts[:, ax], -pts[:, ay]  # SVG y grows downward
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = max(x1 - x0, y1 - y0, 1e-9)
    scale = (min(width, height) - 2 * margin) / span

    def sx(x: float) -> float:
        return margin + (x - x0) * scale

    def sy(y: float) -> float:
        return margin + (y - y0) * scale

    coords = " ".join(f"{sx(float(x)):.2f},{sy(float(y)):.2f}" for x, y in zip(xs, ys))
    start = f'<circle cx="{sx(float(xs[0])):.2f}" cy="{sy(float(ys[0])):.2f}" r="4" fill="#2a7"/>'
    end = f'<circle cx="{sx(float(xs[-1])):.2f}" cy="{sy(float(ys[-1])):.2f}" r="4" fill="#d33"/>'
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'  <polyline points="{coords}" fill="none" stroke="#444" stroke-width="2" '
        f'stroke-linejoin="round"/>\n  {start}\n  {end}\n</svg>\n'
    )
