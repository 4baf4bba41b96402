from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_program
from wirebend.instructions import (
    BEND,
    FEED,
    ROTATE,
    Instruction,
    InstructionError,
    InstructionProgram,
    bend,
    compile_path,
    compile_points,
    emit_text,
    feed,
    graph_hash,
    parse_text,
    rotate,
)
from wirebend.wiregraph import euler_path, graph_from_data


class TestInstructionInvariants:
    def test_feed_must_be_positive(self):
        with pytest.raises(InstructionError):
            feed(0.0)
        with pytest.raises(InstructionError):
            feed(-1.0)

    def test_bend_range(self):
        bend(180.0)
        bend(-180.0)
        with pytest.raises(InstructionError):
            bend(180.0001)

    def test_rotate_range(self):
        rotate(360.0)
        with pytest.raises(InstructionError):
            rotate(-360.5)

    def test_program_must_start_with_feed(self):
        with pytest.raises(InstructionError):
            InstructionProgram((bend(90.0),))
        InstructionProgram(())  # empty is fine


class TestCompile:
    def test_single_edge(self):
        p = compile_points([(0, 0, 0), (30, 0, 0)])
        assert [(i.kind, i.magnitude) for i in p.instructions] == [(FEED, 30.0)]

    def test_planar_u(self):
        p = compile_points([(0, 0, 0), (35, 0, 0), (35, 35, 0), (0, 35, 0)])
        assert [(i.kind, round(i.magnitude, 9)) for i in p.instructions] == [
            (FEED, 35.0), (BEND, 90.0), (FEED, 35.0), (BEND, 90.0), (FEED, 35.0)]
        assert not p.corrected

    def test_3d_corner_has_one_rotate(self):
        p = compile_points([(0, 0, 0), (30, 0, 0), (30, 30, 0), (30, 30, 30)])
        kinds = [i.kind for i in p.instructions]
        assert kinds == [FEED, BEND, FEED, ROTATE, BEND, FEED]
        r = p.instructions[3].magnitude
        assert abs(abs(r) - 90.0) < 1e-9  # sign pinned by the simulate round trip

    def test_collinear_vertices_merge_feeds(self):
        p = compile_points([(0, 0, 0), (10, 0, 0), (25, 0, 0), (25, 30, 0)])
        assert [(i.kind, round(i.magnitude, 9)) for i in p.instructions] == [
            (FEED, 25.0), (BEND, 90.0), (FEED, 30.0)]

    def test_bends_always_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pts = np.cumsum(rng.uniform(-40, 40, size=(6, 3)), axis=0)
            try:
                p = compile_points(pts)
            except InstructionError:
                continue
            assert all(i.magnitude >= 0 for i in p.instructions if i.kind == BEND)

    def test_feed_sum_equals_path_length(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            pts = np.cumsum(rng.uniform(-50, 50, size=(8, 3)), axis=0)
            if min(np.linalg.norm(np.diff(pts, axis=0), axis=1)) < 1e-6:
                continue
            p = compile_points(pts)
            length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
            assert math.isclose(p.total_feed(), length, rel_tol=1e-9)

    def test_too_short_path(self):
        with pytest.raises(InstructionError):
            compile_points([(0, 0, 0)])

    def test_coincident_vertices(self):
        with pytest.raises(InstructionError):
            compile_points([(0, 0, 0), (0, 0, 0), (1, 0, 0)])

    def test_path_must_be_a_traversal(self, u_graph):
        with pytest.raises(InstructionError):
            compile_path(u_graph, [0, 2, 3])

    def test_compile_records_graph_hash(self, u_graph):
        p = compile_path(u_graph, euler_path(u_graph))
        assert p.source_hash == graph_hash(u_graph)

    def test_planar_zigzag_rotation_stays_bounded(self):
        # Alternating turn directions reverse the bend plane at every corner;
        # the ambiguous 180-degree rotations must alternate signs so the
        # cable-wrap budget is never consumed.
        pts = [(0.0, 0.0, 0.0)]
        for k in range(12):
            x = pts[-1][0] + 30.0
            y = 30.0 if k % 2 == 0 else 0.0
            pts.append((x, y, 0.0))
        p = compile_points(pts)
        cumulative = 0.0
        worst = 0.0
        for ins in p.instructions:
            if ins.kind == ROTATE:
                assert abs(ins.magnitude) == 180.0
                cumulative += ins.magnitude
                worst = max(worst, abs(cumulative))
        assert worst <= 180.0

    def test_collinear_run_then_out_of_plane_turn(self):
        # The frame carried across merged feeds must still produce a program
        # that folds back onto the source points.
        from wirebend.simulate import simulate

        pts = [(0, 0, 0), (20, 0, 0), (45, 0, 0), (45, 30, 0), (45, 30, 40)]
        p = compile_points(pts)
        assert len(p.feeds()) == 3  # first two segments merged
        poly = simulate(p).as_array()
        assert np.abs(poly - np.array([(0, 0, 0), (45, 0, 0), (45, 30, 0),
                                       (45, 30, 40)], dtype=float)).max() < 1e-9

    def test_interior_vertices_produce_one_bend_each(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            pts = np.cumsum(rng.uniform(-50, 50, size=(7, 3)), axis=0)
            if min(np.linalg.norm(np.diff(pts, axis=0), axis=1)) < 1e-6:
                continue
            p = compile_points(pts)
            # Random floats are never exactly collinear: one bend per interior vertex.
            assert len(p.bends()) == len(pts) - 2


class TestTextFormat:
    def test_emit_exact_bytes(self):
        p = InstructionProgram((feed(35.0), bend(90.0)))
        assert emit_text(p) == b"F 35.0000\nB 90.0000\n"

    def test_parse_skips_comments(self):
        p = parse_text("# comment\nF 10.5\n")
        assert [(i.kind, i.magnitude) for i in p.instructions] == [(FEED, 10.5)]

    def test_corrected_marker_round_trips(self):
        p = InstructionProgram((feed(10.0),), corrected=True)
        data = emit_text(p)
        assert data.startswith(b"# corrected\n")
        assert parse_text(data).corrected

    @pytest.mark.parametrize("text", [
        "Q 10\n",          # unknown letter
        "F ten\n",         # non-numeric
        "F -5\n",          # out of range
        "B 190\n",         # out of range
        "R 400\n",         # out of range
        "F 10 20\n",       # arity
        "B 45\n",          # bend before any feed
    ])
    def test_parse_rejects(self, text):
        with pytest.raises(InstructionError):
            parse_text(text)

    def test_round_trip_200_random_programs(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            p = random_program(rng)
            back = parse_text(emit_text(p))
            assert back.instructions == p.instructions
            assert back.corrected == p.corrected

    def test_emit_deterministic(self):
        rng = np.random.default_rng(23)
        p = random_program(rng)
        assert emit_text(p) == emit_text(p)


@given(st.lists(st.tuples(st.sampled_from([FEED, BEND, ROTATE]),
                          st.integers(-1800000, 3600000)), max_size=30))
@settings(max_examples=150, deadline=None)
def test_round_trip_property(raw):
    instrs = []
    for kind, grid in raw:
        mag = grid / 10000.0
        if kind == FEED:
            mag = abs(mag) or 1.0
        elif kind == BEND:
            mag = max(-180.0, min(180.0, mag))
        else:
            mag = max(-360.0, min(360.0, mag))
        mag = round(mag, 4)
        if kind == FEED and mag <= 0:
            mag = 1.0
        if not instrs and kind != FEED:
            instrs.append(Instruction(FEED, 1.0))
        instrs.append(Instruction(kind, mag))
    p = InstructionProgram(tuple(instrs))
    assert parse_text(emit_text(p)).instructions == p.instructions
