"""Material and kinematic error compensation for bend and feed commands.

Two angle error sources are modeled: *setback* (the peg sweep angle differs
from the achieved wire angle, a nonlinear function of the bend geometry) and
*springback* (constant elastic recovery).  Feeds are additionally corrected
for the strain-lengthening and arc shortening at each bounding bend, in the
style of sheet-metal bend deduction with a K-factor neutral axis.

All angles cross this API in degrees; trigonometry is done in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .instructions import (
    BEND,
    FEED,
    ROTATE,
    Instruction,
    InstructionError,
    InstructionProgram,
)


class DomainError(ValueError):
    """The setback model's asin argument left [-1, 1]: the requested angle /
    parameter combination is outside the model's validity region."""


@dataclass(frozen=True)
class CompensationParams:
    """Geometry and material constants feeding the compensation models.

    Lengths in mm, springback in degrees.  Defaults describe the reference
    machine: bending peg on a 20.4 mm arc, 6.35 mm bending rod, 3 mm nozzle
    rods, 12 mm nozzle-exit to bend-center distance, 10.23 deg springback,
    and 3 mm aluminum stock with an empirical K-factor of 0.3.
    """

    peg_arc_radius: float = 20.4       # bend-rod arc radius (center of rotation to rod)
    bend_rod_radius: float = 3.175     # radius of the bending rod itself
    nozzle_rod_radius: float = 1.5     # radius of the nozzle rods the wire bends around
    setback_distance: float = 12.0     # nozzle exit to bending center
    springback_deg: float = 10.23      # constant elastic recovery per bend
    k_factor: float = 0.3              # neutral-axis offset fraction of diameter
    wire_diameter: float = 3.0
    bend_radius: float = 1.5           # inner bend radius at the nozzle rod

    def __post_init__(self) -> None:
        for name in ("peg_arc_radius", "bend_rod_radius", "nozzle_rod_radius",
                     "setback_distance", "wire_diameter", "bend_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.k_factor < 1:
            raise ValueError("k_factor must be in (0, 1)")
        if self.springback_deg < 0:
            raise ValueError("springback_deg must be >= 0")

    @property
    def wire_radius(self) -> float:
        return self.wire_diameter / 2.0

    @property
    def neutral_offset(self) -> float:
        """Distance from the inner bend surface to the unstrained fiber."""
        return self.k_factor * self.wire_diameter

    def to_dict(self) -> dict:
        return {
            "peg_arc_radius": self.peg_arc_radius,
            "bend_rod_radius": self.bend_rod_radius,
            "nozzle_rod_radius": self.nozzle_rod_radius,
            "setback_distance": self.setback_distance,
            "springback_deg": self.springback_deg,
            "k_factor": self.k_factor,
            "wire_diameter": self.wire_diameter,
            "bend_radius": self.bend_radius,
        }

    @staticmethod
    def from_dict(d: dict) -> "CompensationParams":
        return CompensationParams(**d)


def setback_commanded(theta_des: float, p: CompensationParams) -> float:
    """Commanded peg angle that achieves the desired wire angle, setback only.

    theta_com = theta + asin(R*sin(theta) / (s - r_rod/sin(theta) - r_noz*tan(theta)))

    Extended to negative angles by odd symmetry.  theta = 0 and the tan
    singularity at |theta| = 90 return the continuity limits (0 and theta).
    Raises DomainError when the asin argument leaves [-1, 1]; the value is
    never silently clamped.
    """
    if not abs(theta_des) <= 180.0:
        raise ValueError(f"desired angle out of [-180, 180]: {theta_des}")
    if theta_des == 0.0:
        return 0.0
    sign = 1.0 if theta_des > 0 else -1.0
    theta = abs(theta_des)
    if theta in (90.0, 180.0):
        return theta_des  # analytic limits: asin term vanishes
    t = math.radians(theta)
    denom = (p.setback_distance
             - p.bend_rod_radius / math.sin(t)
             - p.nozzle_rod_radius * math.tan(t))
    arg = p.peg_arc_radius * math.sin(t) / denom
    if not -1.0 <= arg <= 1.0:
        raise DomainError(
            f"setback model out of domain at {theta_des} deg (asin argument {arg:.6g})")
    return sign * (theta + math.degrees(math.asin(arg)))


def springback_target(theta_des: float, p: CompensationParams) -> float:
    """Over-bend target that relaxes back to the desired angle.

    theta = theta_des + sgn(theta_des) * S, with sgn(0) = 0.
    """
    if not abs(theta_des) <= 180.0:
        raise ValueError(f"desired angle out of [-180, 180]: {theta_des}")
    if theta_des == 0.0:
        return 0.0
    return theta_des + math.copysign(p.springback_deg, theta_des)


def combined_commanded(theta_des: float, p: CompensationParams) -> float:
    """Full bend compensation: setback applied to the springback target."""
    return setback_commanded(springback_target(theta_des, p), p)


def lost_length(theta_deg: float, p: CompensationParams) -> float:
    """Straight length consumed on one side of a bend (outside setback tangent)."""
    return math.tan(math.radians(abs(theta_deg)) / 2.0) * (p.bend_radius + p.wire_diameter)


def arc_length(theta_deg: float, p: CompensationParams) -> float:
    """Neutral-axis arc length of a bend."""
    return math.radians(abs(theta_deg)) * (p.bend_radius + p.neutral_offset)


LengthFn = Callable[[float, CompensationParams], float]


def _segments(p: InstructionProgram) -> list[tuple[list[int], float | None, float | None]]:
    """Split a program into feed segments with their bounding bend angles.

    Returns (feed instruction indices, preceding bend angle, following bend
    angle) per maximal feed run; rotates are transparent.
    """
    segments: list[tuple[list[int], float | None, float | None]] = []
    current: list[int] = []
    prev_bend: float | None = None
    for idx, ins in enumerate(p.instructions):
        if ins.kind == FEED:
            current.append(idx)
        elif ins.kind == BEND:
            if current:
                segments.append((current, prev_bend, ins.magnitude))
                current = []
            prev_bend = ins.magnitude
        # rotates: transparent
    if current:
        segments.append((current, prev_bend, None))
    return segments


def _feed_adjustments(p: InstructionProgram, params: CompensationParams,
                      lost_fn: LengthFn, arc_fn: LengthFn) -> dict[int, float]:
    """Signed feed-length delta per feed instruction index (0 where untouched)."""
    adjustments = {idx: 0.0 for idx, ins in enumerate(p.instructions) if ins.kind == FEED}
    for indices, before, after in _segments(p):
        if before is None and after is None:
            continue
        first, last = indices[0], indices[-1]
        if before is not None:
            adjustments[first] -= lost_fn(before, params)
        if after is not None:
            adjustments[last] -= lost_fn(after, params)
            adjustments[last] += arc_fn(after, params)
        adjustments[first] -= 2.0 * (params.wire_radius - params.neutral_offset)
    return adjustments


def adjust_feeds(p: InstructionProgram, params: CompensationParams,
                 min_feed: float = 0.0,
                 lost_fn: LengthFn = lost_length,
                 arc_fn: LengthFn = arc_length) -> InstructionProgram:
    """Correct feed lengths for the strain and curvature at bounding bends.

    Per feed segment: subtract the lost tangent length for each bounding
    bend, add the neutral-axis arc of the later bounding bend, and subtract
    the cross-section offset 2*(wire_radius - neutral_offset) once.  Segments
    with no bounding bend pass through unchanged.  Bend angles must still be
    the design angles (run this before the angle compensation).

    Raises InstructionError if an adjusted feed drops to or below `min_feed`
    (or zero): the edge is too short to fabricate.
    """
    if p.corrected:
        raise InstructionError("program is already error-corrected")
    adjustments = _feed_adjustments(p, params, lost_fn, arc_fn)

    out: list[Instruction] = []
    for idx, ins in enumerate(p.instructions):
        if ins.kind != FEED or adjustments.get(idx, 0.0) == 0.0:
            out.append(ins)
            continue
        new_len = ins.magnitude + adjustments[idx]
        if new_len <= 0.0 or new_len < min_feed:
            raise InstructionError(
                f"feed {ins.magnitude:.3f} mm adjusts to {new_len:.3f} mm, "
                f"below the {min_feed:.3f} mm minimum: edge too short to fabricate")
        out.append(Instruction(FEED, new_len))
    return replace(p, instructions=tuple(out))


def apply_corrections(p: InstructionProgram, params: CompensationParams,
                      min_feed: float = 0.0) -> InstructionProgram:
    """Full compensation pass: feeds adjusted, bends replaced by their
    commanded angles, rotates untouched, corrected flag set.

    Rejects programs that are already corrected; propagates DomainError from
    the setback model and the short-feed error from the feed pass.
    """
    adjusted = adjust_feeds(p, params, min_feed=min_feed)
    out = [
        Instruction(BEND, combined_commanded(ins.magnitude, params))
        if ins.kind == BEND else ins
        for ins in adjusted.instructions
    ]
    return replace(p, instructions=tuple(out), corrected=True)


def _invert_setback(theta_com: float, params: CompensationParams) -> float:
    """Numerically invert the setback map on [0, 180] for a positive angle.

    The map can be non-injective across its domain hole (the asin argument
    blowing up splits the interval into branches whose images overlap).  All
    roots are collected; roots where the peg sweeps at least the wire angle
    (the physical regime) are preferred, and the preimage closest to the
    commanded angle breaks remaining ties.
    """
    from scipy.optimize import brentq

    def f(x: float) -> float:
        return setback_commanded(x, params) - theta_com

    lo, hi = 0.0, 180.0
    samples = [lo + k * (hi - lo) / 1024 for k in range(1025)]
    roots: list[float] = []
    prev_x, prev_v = None, None
    for x in samples:
        try:
            v = f(x)
        except DomainError:
            prev_x, prev_v = None, None
            continue
        if v == 0.0:
            roots.append(x)
        elif prev_v is not None and (prev_v < 0) != (v < 0):
            roots.append(float(brentq(f, prev_x, x, xtol=1e-12)))
        prev_x, prev_v = x, v
    if not roots:
        raise DomainError(f"cannot invert setback model for commanded angle {theta_com}")
    physical = [r for r in roots if r <= theta_com + 1e-9]
    return min(physical or roots, key=lambda r: abs(r - theta_com))


def invert_bend(theta_com: float, params: CompensationParams) -> float:
    """Design angle whose combined compensation equals `theta_com`."""
    if theta_com == 0.0:
        return 0.0
    sign = 1.0 if theta_com > 0 else -1.0
    spr = _invert_setback(abs(theta_com), params)
    des = spr - params.springback_deg
    if des < 0.0:
        des = 0.0  # below the springback threshold no permanent bend occurs
    return sign * des


def undo_corrections(p: InstructionProgram, params: CompensationParams) -> InstructionProgram:
    """Recover the design program from a corrected one.

    Bends are inverted through the combined model; feed adjustments are then
    recomputed from the recovered design angles and added back.
    """
    if not p.corrected:
        raise InstructionError("program is not error-corrected")
    design_bends = [
        Instruction(BEND, invert_bend(ins.magnitude, params))
        if ins.kind == BEND else ins
        for ins in p.instructions
    ]
    stage = InstructionProgram(tuple(design_bends), corrected=False,
                               source_hash=p.source_hash)
    adjustments = _feed_adjustments(stage, params, lost_length, arc_length)
    out = []
    for idx, ins in enumerate(stage.instructions):
        if ins.kind == FEED and adjustments.get(idx, 0.0) != 0.0:
            out.append(Instruction(FEED, ins.magnitude - adjustments[idx]))
        else:
            out.append(ins)
    return InstructionProgram(tuple(out), corrected=False, source_hash=p.source_hash)
