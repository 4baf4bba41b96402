"""Feed/bend/rotate instruction model, path compiler, and text format.

A program is an ordered list of commands:

  F <mm>   feed wire forward (always positive)
  B <deg>  bend in the current bending plane, magnitude in [-180, 180]
  R <deg>  rotate the bending plane about the wire axis, in [-360, 360]

The compiler turns a 3D vertex path into such a program.  Bend angles are
kept in [0, 180]; plane changes are carried entirely by rotate commands, so
the bend sign convention is "always positive" and the compile->simulate
round trip pins the rotation sign.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .wiregraph import WireframeGraph

FEED = "F"
BEND = "B"
ROTATE = "R"

# Collinear continuation below this direction change emits no bend at all.
BEND_EPSILON_DEG = 1e-6
# Cross products with norm below this count as a degenerate bend-plane normal.
NORMAL_EPSILON = 1e-9


class InstructionError(ValueError):
    """Invalid instruction, program, or unparseable program text."""


@dataclass(frozen=True)
class Instruction:
    kind: str  # FEED, BEND or ROTATE
    magnitude: float  # mm for feeds, degrees for bends/rotates (signed)

    def __post_init__(self) -> None:
        if self.kind == FEED:
            if not self.magnitude > 0:
                raise InstructionError(f"feed must be positive, got {self.magnitude}")
        elif self.kind == BEND:
            if not -180.0 <= self.magnitude <= 180.0:
                raise InstructionError(f"bend out of [-180, 180]: {self.magnitude}")
        elif self.kind == ROTATE:
            if not -360.0 <= self.magnitude <= 360.0:
                raise InstructionError(f"rotate out of [-360, 360]: {self.magnitude}")
        else:
            raise InstructionError(f"unknown instruction kind {self.kind!r}")
        if not math.isfinite(self.magnitude):
            raise InstructionError("instruction magnitude must be finite")


def feed(mm: float) -> Instruction:
    return Instruction(FEED, float(mm))


def bend(deg: float) -> Instruction:
    return Instruction(BEND, float(deg))


def rotate(deg: float) -> Instruction:
    return Instruction(ROTATE, float(deg))


@dataclass(frozen=True)
class InstructionProgram:
    """Ordered instruction list plus compile provenance.

    `corrected` records whether the error-compensation pass has been applied
    (it is applied at most once).  `source_hash` ties a compiled program back
    to the graph document it came from; it is session metadata and is not
    serialized by the text format.
    """

    instructions: tuple[Instruction, ...]
    corrected: bool = False
    source_hash: str | None = None

    def __post_init__(self) -> None:
        if self.instructions and self.instructions[0].kind != FEED:
            raise InstructionError("program must begin with a feed")

    def __len__(self) -> int:
        return len(self.instructions)

    def feeds(self) -> list[float]:
        return [i.magnitude for i in self.instructions if i.kind == FEED]

    def bends(self) -> list[float]:
        return [i.magnitude for i in self.instructions if i.kind == BEND]

    def rotates(self) -> list[float]:
        return [i.magnitude for i in self.instructions if i.kind == ROTATE]

    def total_feed(self) -> float:
        return sum(self.feeds())

    def to_dict(self) -> dict:
        return {
            "instructions": [
                {"kind": i.kind, "magnitude": i.magnitude} for i in self.instructions
            ],
            "corrected": self.corrected,
            "source_hash": self.source_hash,
        }

    @staticmethod
    def from_dict(d: dict) -> "InstructionProgram":
        return InstructionProgram(
            tuple(Instruction(i["kind"], float(i["magnitude"])) for i in d["instructions"]),
            corrected=bool(d.get("corrected", False)),
            source_hash=d.get("source_hash"),
        )


def program(instrs: Iterable[Instruction], corrected: bool = False,
            source_hash: str | None = None) -> InstructionProgram:
    return InstructionProgram(tuple(instrs), corrected, source_hash)


def graph_hash(g: WireframeGraph) -> str:
    """Stable content hash of a graph document."""
    blob = json.dumps(g.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise InstructionError("zero-length direction vector")
    return v / n


def _angle_between(u: np.ndarray, w: np.ndarray) -> float:
    """Angle in degrees in [0, 180] between unit vectors."""
    return math.degrees(math.atan2(float(np.linalg.norm(np.cross(u, w))),
                                   float(np.dot(u, w))))


def _signed_plane_angle(m: np.ndarray, n: np.ndarray, axis: np.ndarray) -> float:
    """Signed angle (deg) from plane normal m to n about `axis`, right-hand rule.

    Both normals are perpendicular to `axis`.  At an exact reversal the sign
    is undefined (sin = 0); +180 is returned and the caller may flip it.
    """
    s = float(np.dot(np.cross(m, n), axis))
    c = float(np.dot(m, n))
    ang = math.degrees(math.atan2(s, c))
    if abs(abs(ang) - 180.0) < 1e-12:
        return 180.0
    return ang


# A plane reversal this close to 180 deg carries no usable sign information
# (the sine term is float noise), so the compiler picks the direction that
# keeps the running rotation near zero instead.
_REVERSAL_EPSILON_DEG = 1e-9


def compile_points(points: Sequence[Sequence[float]],
                   source_hash: str | None = None) -> InstructionProgram:
    """Compile a 3D polyline into a feed/bend/rotate program.

    Feeds are Euclidean distances between consecutive vertices; collinear
    continuations are merged into a single feed.  At each direction change a
    positive bend of the turn angle is emitted, preceded (for every bend
    after the first) by the rotate that brings the previous bending plane
    onto the new one.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    if len(pts) < 2:
        raise InstructionError("path needs at least 2 vertices")

    out: list[Instruction] = []
    normal: np.ndarray | None = None  # bending-plane normal once the first bend is known
    pending_feed = 0.0
    cumulative_rotate = 0.0

    for i in range(len(pts) - 1):
        seg = pts[i + 1] - pts[i]
        length = float(np.linalg.norm(seg))
        if length < NORMAL_EPSILON:
            raise InstructionError(f"coincident consecutive vertices at index {i}")
        pending_feed += length

        if i + 2 > len(pts) - 1:
            break
        u = _unit(seg)
        w = _unit(pts[i + 2] - pts[i + 1])
        theta = _angle_between(u, w)
        if theta < BEND_EPSILON_DEG:
            continue  # collinear: merge feeds, no bend
        out.append(feed(pending_feed))
        pending_feed = 0.0

        cross = np.cross(u, w)
        if float(np.linalg.norm(cross)) < NORMAL_EPSILON:
            # Straight reversal: bend plane undefined, rotation stays zero.
            out.append(bend(theta))
            continue
        n = _unit(cross)
        if normal is None:
            normal = n  # first bend defines the initial plane; no rotate
        else:
            phi = _signed_plane_angle(normal, n, u)
            if abs(phi) >= 180.0 - _REVERSAL_EPSILON_DEG:
                # Plane reversal: both directions reach it, so unwind the
                # cable (planar zigzags would otherwise grow the running
                # rotation without bound).
                phi = 180.0 if cumulative_rotate <= 0.0 else -180.0
            if abs(phi) > BEND_EPSILON_DEG:
                out.append(rotate(phi))
                cumulative_rotate += phi
            normal = n
        out.append(bend(theta))

    out.append(feed(pending_feed))
    return InstructionProgram(tuple(out), corrected=False, source_hash=source_hash)


def compile_path(g: WireframeGraph, path: Sequence[int]) -> InstructionProgram:
    """Compile a vertex traversal of g into an instruction program.

    Every consecutive pair in `path` must be an edge of g.
    """
    if len(path) < 2:
        raise InstructionError("path needs at least 2 vertices")
    edge_set = set(g.edges)
    for a, b in zip(path, path[1:]):
        key = (a, b) if a < b else (b, a)
        if key not in edge_set:
            raise InstructionError(f"path step ({a}, {b}) is not an edge of the graph")
    points = [g.vertices[v] for v in path]
    return compile_points(points, source_hash=graph_hash(g))


def path_bend_angles(points: Sequence[Sequence[float]]) -> list[float]:
    """Direction-change angle (deg, [0,180]) at each interior vertex of a polyline."""
    pts = [np.asarray(p, dtype=float) for p in points]
    angles = []
    for i in range(1, len(pts) - 1):
        u = _unit(pts[i] - pts[i - 1])
        w = _unit(pts[i + 1] - pts[i])
        angles.append(_angle_between(u, w))
    return angles


# --- text format ------------------------------------------------------------
#
# ASCII, LF line endings, one command per line: letter, single space, fixed
# 4-decimal magnitude.  `#` lines are comments.  A program that has been
# error-corrected carries a `# corrected` marker so the flag survives the
# round trip.

CORRECTED_MARKER = "# corrected"


def emit_text(p: InstructionProgram) -> bytes:
    lines = []
    if p.corrected:
        lines.append(CORRECTED_MARKER)
    for ins in p.instructions:
        lines.append(f"{ins.kind} {ins.magnitude:.4f}")
    return ("\n".join(lines) + "\n").encode("ascii") if lines else b""


def parse_text(data: bytes | str) -> InstructionProgram:
    text = data.decode("ascii") if isinstance(data, bytes) else data
    corrected = False
    instrs: list[Instruction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line == CORRECTED_MARKER:
                corrected = True
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstructionError(f"line {lineno}: expected '<letter> <magnitude>'")
        kind, mag_text = parts
        if kind not in (FEED, BEND, ROTATE):
            raise InstructionError(f"line {lineno}: unknown command {kind!r}")
        try:
            magnitude = float(mag_text)
        except ValueError as exc:
            raise InstructionError(f"line {lineno}: non-numeric magnitude {mag_text!r}") from exc
        try:
            instrs.append(Instruction(kind, magnitude))
        except InstructionError as exc:
            raise InstructionError(f"line {lineno}: {exc}") from exc
    return InstructionProgram(tuple(instrs), corrected=corrected)


def mark_corrected(p: InstructionProgram) -> InstructionProgram:
    return replace(p, corrected=True)
