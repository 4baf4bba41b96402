from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_program
from wirebend.instructions import BEND, FEED, ROTATE, InstructionProgram, bend, feed
from wirebend.machine import (
    AL_6061_T6_3MM,
    MachineProfile,
    MaterialSpec,
    StepPlanner,
    feasibility,
    load_profile,
    required_bend_torque,
    steps_to_magnitude,
    to_steps,
)


class TestResolutions:
    def test_feed_resolution(self, profile):
        assert abs(profile.feed_resolution / 0.0184 - 1.0) < 0.01

    def test_bend_resolution(self, profile):
        assert abs(profile.bend_resolution / 0.017 - 1.0) < 0.02

    def test_rotate_resolution(self, profile):
        assert abs(profile.rotate_resolution / 0.022 - 1.0) < 0.02

    def test_derived_formulas(self, profile):
        assert math.isclose(profile.feed_resolution,
                            math.pi * 37.3 / (200 * 32), rel_tol=1e-12)
        assert math.isclose(profile.bend_resolution, 1.8 / (26.85 * 4), rel_tol=1e-12)
        assert math.isclose(profile.rotate_resolution, 1.8 / (32 * 2.5568), rel_tol=1e-12)


class TestTorque:
    def test_reference_wire(self):
        torque = required_bend_torque(AL_6061_T6_3MM)
        assert abs(torque / 1.63 - 1.0) < 0.005

    def test_wide_wire_margin(self, profile):
        wide = MaterialSpec("Al 6061-T6 6.8mm", 6.8, 268.47, 362.14, 68.03, 0.0541)
        report = feasibility(wide, profile)
        assert abs(report.margin / 2.0 - 1.0) < 0.05

    def test_zero_diameter(self):
        zero = MaterialSpec("nothing", 0.0, 1.0, 1.0, 1.0, 0.1)
        assert required_bend_torque(zero) == 0.0

    def test_reference_margin(self, profile):
        report = feasibility(AL_6061_T6_3MM, profile)
        assert abs(report.margin / 23.2 - 1.0) < 0.01
        assert report.fabricable

    def test_borderline_margin(self):
        profile = MachineProfile.from_dict({"available_bend_torque": 1.86})
        report = feasibility(AL_6061_T6_3MM, profile)
        assert math.isclose(report.margin, 1.86 / required_bend_torque(AL_6061_T6_3MM),
                            rel_tol=1e-12)
        assert report.margin == pytest.approx(1.141, abs=0.01)
        assert report.fabricable  # exactly at the default threshold
        strict = feasibility(AL_6061_T6_3MM, profile, safety_factor=1.2)
        assert not strict.fabricable

    def test_zero_torque_not_fabricable(self):
        profile = MachineProfile.from_dict({"available_bend_torque": 0.0})
        report = feasibility(AL_6061_T6_3MM, profile)
        assert report.margin == 0.0
        assert not report.fabricable

    def test_monotone_in_diameter_and_uts(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            d1, d2 = sorted(rng.uniform(0.5, 8.0, size=2))
            u1, u2 = sorted(rng.uniform(50, 600, size=2))
            if d1 == d2 or u1 == u2:
                continue
            low = MaterialSpec("a", d1, u1 / 2, u1, 70.0, 0.05)
            high_d = MaterialSpec("b", d2, u1 / 2, u1, 70.0, 0.05)
            high_u = MaterialSpec("c", d1, u1 / 2, u2, 70.0, 0.05)
            assert required_bend_torque(high_d) > required_bend_torque(low)
            assert required_bend_torque(high_u) > required_bend_torque(low)

    def test_material_validation(self):
        with pytest.raises(ValueError):
            MaterialSpec("bad", 3.0, 400.0, 362.0, 68.0, 0.05)  # yield > UTS


class TestToSteps:
    def test_one_feed_step(self, profile):
        cmds = to_steps(InstructionProgram((feed(0.0184),)), profile)
        assert [(c.op, c.steps) for c in cmds] == [(FEED, 1)]

    def test_bend_1p8_degrees(self, profile):
        cmds = to_steps(InstructionProgram((feed(30.0), bend(1.8))), profile)
        bend_cmd = [c for c in cmds if c.op == BEND][0]
        # 1.8 / 0.016760 = 107.4 -> 107 with the residual carried.
        assert bend_cmd.steps in (107, 108)

    def test_residual_carrying_tiny_feeds(self, profile):
        p = InstructionProgram((feed(0.01), feed(0.01)))
        cmds = to_steps(p, profile)
        assert sum(c.steps for c in cmds if c.op == FEED) == 1

    def test_retract_pair_on_direction_change(self, profile):
        p = InstructionProgram((feed(30.0), bend(45.0), feed(30.0),
                                bend(-45.0), feed(30.0)))
        ops = [(c.op, c.steps) for c in to_steps(p, profile)]
        retracts = [o for o in ops if o[0] == "RETRACT"]
        assert retracts == [("RETRACT", 1), ("RETRACT", 0)]
        p_same = InstructionProgram((feed(30.0), bend(45.0), feed(30.0),
                                     bend(45.0), feed(30.0)))
        assert all(c.op != "RETRACT" for c in to_steps(p_same, profile))

    def test_hard_stop_guard(self, profile):
        with pytest.raises(ValueError):
            to_steps(InstructionProgram((feed(30.0), bend(170.0))), profile)

    def test_per_instruction_error_below_one_step(self, profile):
        rng = np.random.default_rng(29)
        for _ in range(50):
            p = random_program(rng, quantized=False)
            cmds = to_steps(p, profile)
            realized = {FEED: 0.0, BEND: 0.0, ROTATE: 0.0}
            commanded = {FEED: 0.0, BEND: 0.0, ROTATE: 0.0}
            res = {FEED: profile.feed_resolution, BEND: profile.bend_resolution,
                   ROTATE: profile.rotate_resolution}
            per_instruction = []
            for c in cmds:
                if c.op == "RETRACT":
                    continue
                ins = p.instructions[c.instruction_index]
                per_instruction.append(abs(steps_to_magnitude(c, profile) - ins.magnitude)
                                       / res[c.op])
                realized[c.op] += steps_to_magnitude(c, profile)
                commanded[c.op] += ins.magnitude
            assert all(err < 1.0 for err in per_instruction)
            for axis in (FEED, BEND, ROTATE):
                # Residual carrying: total error under one unit per axis.
                assert abs(realized[axis] - commanded[axis]) < res[axis]

    def test_planner_is_incremental(self, profile):
        p = InstructionProgram((feed(10.0), bend(30.0), feed(10.0), bend(-20.0)))
        whole = to_steps(p, profile)
        planner = StepPlanner(profile)
        pieces = []
        for idx, ins in enumerate(p.instructions):
            pieces.extend(planner.plan(ins.kind, ins.magnitude, idx))
        assert [(c.op, c.steps) for c in whole] == [(c.op, c.steps) for c in pieces]


class TestProfileSerialization:
    def test_round_trip(self, tmp_path, profile):
        path = tmp_path / "profile.json"
        profile.save(path)
        assert MachineProfile.load(path) == profile

    def test_load_default(self):
        assert load_profile(None) == MachineProfile()

    def test_partial_override(self):
        p = MachineProfile.from_dict({"limits": {"stock_length": 2000.0}})
        assert p.limits.stock_length == 2000.0
        assert p.limits.min_feed == 25.0
        assert p.feed_budget == 1600.0

    def test_compensation_nested(self, calibrated_params):
        p = MachineProfile.from_dict({"compensation": calibrated_params.to_dict()})
        assert p.compensation == calibrated_params


@given(st.floats(0.01, 500.0), st.floats(0.01, 500.0))
@settings(max_examples=100, deadline=None)
def test_feed_steps_inverse_within_one_unit(a, b):
    profile = MachineProfile()
    p = InstructionProgram((feed(a), feed(b)))
    cmds = to_steps(p, profile)
    total = sum(steps_to_magnitude(c, profile) for c in cmds)
    assert abs(total - (a + b)) < profile.feed_resolution
