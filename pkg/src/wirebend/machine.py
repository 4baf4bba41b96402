"""Machine profile, instruction-to-step translation, and torque feasibility.

The profile gathers every constant the rest of the pipeline needs: stepper
and transmission geometry (from which the per-axis resolutions derive),
nominal speeds, operating limits, the bend-torque budget, and the error
compensation constants.  The default values describe the reference desktop
machine; a recalibrated build supplies its own profile JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .compensation import CompensationParams
from .instructions import BEND, FEED, ROTATE, InstructionProgram

FULL_STEP_DEG = 1.8  # native step angle of the stepper motors

# 1 ft of wire stock in mm; used to convert the $/ft purchase price.
MM_PER_FOOT = 304.8


@dataclass(frozen=True)
class FeedAxis:
    wheel_diameter: float = 37.3   # mm, feeder wheel
    steps_per_rev: int = 200
    microstep: int = 32

    @property
    def resolution(self) -> float:
        """mm of wire per microstep."""
        return math.pi * self.wheel_diameter / (self.steps_per_rev * self.microstep)


@dataclass(frozen=True)
class BendAxis:
    gearbox_ratio: float = 26.85
    external_ratio: float = 4.0
    microstep: int = 1
    max_bend: float = 155.0   # deg, design-angle limit
    hard_stop: float = 165.0  # deg, physical travel limit

    @property
    def resolution(self) -> float:
        """deg per step after the full transmission."""
        return FULL_STEP_DEG / (self.gearbox_ratio * self.external_ratio * self.microstep)


@dataclass(frozen=True)
class RotateAxis:
    microstep: int = 32
    transmission_ratio: float = 2.5568
    max_cumulative: float = 360.0  # deg before cabling wraps

    @property
    def resolution(self) -> float:
        return FULL_STEP_DEG / (self.microstep * self.transmission_ratio)


@dataclass(frozen=True)
class Speeds:
    feed: float = 110.2    # mm/s
    bend: float = 15.1     # deg/s
    rotate: float = 131.3  # deg/s
    homing_overhead_s: float = 5.0   # fixed per-job homing time
    retract_overhead_s: float = 1.5  # peg retract/extend on bend direction change


@dataclass(frozen=True)
class Limits:
    min_feed: float = 25.0       # mm, machine minimum feed
    tail_reserve: float = 400.0  # mm of stock unusable behind the feeder
    min_edge: float = 20.4       # mm, design-time minimum edge length
    stock_length: float = 1000.0 # mm of loaded wire stock


@dataclass(frozen=True)
class MachineProfile:
    feed: FeedAxis = field(default_factory=FeedAxis)
    bend: BendAxis = field(default_factory=BendAxis)
    rotate: RotateAxis = field(default_factory=RotateAxis)
    speeds: Speeds = field(default_factory=Speeds)
    limits: Limits = field(default_factory=Limits)
    available_bend_torque: float = 37.9  # N*m at the bending peg
    wire_cost_per_mm: float = 0.6 / MM_PER_FOOT  # stock purchased at 0.6 $/ft
    compensation: CompensationParams = field(default_factory=CompensationParams)

    @property
    def feed_resolution(self) -> float:
        return self.feed.resolution

    @property
    def bend_resolution(self) -> float:
        return self.bend.resolution

    @property
    def rotate_resolution(self) -> float:
        return self.rotate.resolution

    @property
    def feed_budget(self) -> float:
        """Usable wire length: stock minus the tail reserve."""
        return self.limits.stock_length - self.limits.tail_reserve

    def to_dict(self) -> dict:
        d = asdict(self)
        d["compensation"] = self.compensation.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict) -> "MachineProfile":
        return MachineProfile(
            feed=FeedAxis(**d.get("feed", {})),
            bend=BendAxis(**d.get("bend", {})),
            rotate=RotateAxis(**d.get("rotate", {})),
            speeds=Speeds(**d.get("speeds", {})),
            limits=Limits(**d.get("limits", {})),
            available_bend_torque=d.get("available_bend_torque", 37.9),
            wire_cost_per_mm=d.get("wire_cost_per_mm", 0.6 / MM_PER_FOOT),
            compensation=CompensationParams.from_dict(d.get("compensation", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "MachineProfile":
        return MachineProfile.from_dict(json.loads(Path(path).read_text()))


def load_profile(path: str | Path | None = None) -> MachineProfile:
    """Profile from a JSON file, or the built-in defaults when path is None."""
    if path is None:
        return MachineProfile()
    return MachineProfile.load(path)


@dataclass(frozen=True)
class MaterialSpec:
    """Wire material properties (stresses in MPa, modulus in GPa)."""

    name: str
    diameter: float
    yield_stress: float
    uts: float
    elastic_modulus: float
    fracture_strain: float

    def __post_init__(self) -> None:
        for name in ("diameter", "yield_stress", "uts", "elastic_modulus", "fracture_strain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.yield_stress > self.uts:
            raise ValueError("yield stress exceeds ultimate tensile strength")


# Tensile-test record for the stock the reference machine ships with.
AL_6061_T6_3MM = MaterialSpec(
    name="Al 6061-T6 3mm",
    diameter=3.0,
    yield_stress=268.47,
    uts=362.14,
    elastic_modulus=68.03,
    fracture_strain=0.0541,
)


def required_bend_torque(material: MaterialSpec) -> float:
    """Torque (N*m) to yield the full cross-section of a solid round wire.

    Plastic section modulus of a solid circle is d^3/6; torque = Z_p * UTS.
    """
    z_p_mm3 = material.diameter ** 3 / 6.0
    return z_p_mm3 * 1e-9 * material.uts * 1e6


@dataclass(frozen=True)
class FeasibilityReport:
    margin: float
    fabricable: bool
    required_torque: float
    available_torque: float
    safety_factor: float

    def to_dict(self) -> dict:
        return asdict(self)


def feasibility(material: MaterialSpec, profile: MachineProfile,
                safety_factor: float = 1.14) -> FeasibilityReport:
    """Torque margin of the machine over the material's bending requirement.

    The default safety factor marks the observed unreliability threshold: a
    14% margin bent some stock and failed on others.
    """
    required = required_bend_torque(material)
    margin = profile.available_bend_torque / required if required > 0 else float("inf")
    return FeasibilityReport(
        margin=margin,
        fabricable=margin >= safety_factor,
        required_torque=required,
        available_torque=profile.available_bend_torque,
        safety_factor=safety_factor,
    )


# --- step planning -----------------------------------------------------------

RETRACT = "RETRACT"
HOME = "HOME"


@dataclass(frozen=True)
class StepCommand:
    """One low-level machine command: signed steps for motion axes, or a
    servo retract state change."""

    op: str            # FEED, BEND, ROTATE, RETRACT
    steps: int         # signed motor steps; 0/1 for RETRACT
    instruction_index: int  # index into the source program


class StepPlanner:
    """Incremental instruction-to-steps translator with residual carrying.

    Quantization residuals are accumulated per axis and folded into the next
    command on that axis, so the error never exceeds one step per axis no
    matter how many instructions are planned.  A BEND command's step count is
    the sweep; the firmware performs the equal-and-opposite return itself.
    Retract/extend pairs are emitted whenever the bend direction changes.
    """

    def __init__(self, profile: MachineProfile):
        self.profile = profile
        self._residual = {FEED: 0.0, BEND: 0.0, ROTATE: 0.0}
        self._resolution = {
            FEED: profile.feed_resolution,
            BEND: profile.bend_resolution,
            ROTATE: profile.rotate_resolution,
        }
        self._prev_bend_sign = 0

    def plan(self, kind: str, magnitude: float, index: int = -1) -> list[StepCommand]:
        out: list[StepCommand] = []
        if kind == BEND:
            if abs(magnitude) > self.profile.bend.hard_stop:
                raise ValueError(
                    f"bend {magnitude} deg exceeds the "
                    f"{self.profile.bend.hard_stop} deg hard stop")
            sign = 1 if magnitude > 0 else -1 if magnitude < 0 else 0
            if sign and self._prev_bend_sign and sign != self._prev_bend_sign:
                out.append(StepCommand(RETRACT, 1, index))
                out.append(StepCommand(RETRACT, 0, index))
            if sign:
                self._prev_bend_sign = sign
        exact = magnitude / self._resolution[kind] + self._residual[kind]
        steps = round(exact)
        self._residual[kind] = exact - steps
        out.append(StepCommand(kind, steps, index))
        return out


def to_steps(p: InstructionProgram, profile: MachineProfile) -> list[StepCommand]:
    """Translate a whole program into motor step commands (see StepPlanner)."""
    planner = StepPlanner(profile)
    out: list[StepCommand] = []
    for idx, ins in enumerate(p.instructions):
        out.extend(planner.plan(ins.kind, ins.magnitude, idx))
    return out


def steps_to_magnitude(cmd: StepCommand, profile: MachineProfile) -> float:
    """Physical magnitude a step command realizes (mm or deg)."""
    resolution = {
        FEED: profile.feed_resolution,
        BEND: profile.bend_resolution,
        ROTATE: profile.rotate_resolution,
    }
    return cmd.steps * resolution[cmd.op]
