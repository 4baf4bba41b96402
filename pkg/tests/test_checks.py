from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import cube_trace_graph, full_cube_graph
from wirebend.checks import FAIL, PASS, check_all, check_program
from wirebend.compensation import apply_corrections
from wirebend.instructions import (
    InstructionProgram,
    bend,
    compile_path,
    feed,
    rotate,
)
from wirebend.machine import MachineProfile
from wirebend.wiregraph import euler_path, graph_from_data


def findings_by_check(diag, check):
    return [f for f in diag.vertex_findings if f.check == check]


class TestCheckAll:
    def test_cube_trace_fabricable(self, profile):
        diag = check_all(cube_trace_graph(), profile)
        assert diag.euler_pass
        assert diag.overall_fabricable
        bends = findings_by_check(diag, "bend_angle")
        # Every vertex with degree >= 2 on the path gets exactly one finding.
        assert sorted(f.vertex for f in bends) == [0, 1, 2, 3, 4, 5, 6]
        assert all(abs(f.measured - 90.0) < 1e-9 for f in bends)

    def test_full_cube_fails_eulericity(self, profile):
        diag = check_all(full_cube_graph(), profile)
        assert not diag.euler_pass
        assert not diag.overall_fabricable
        euler_fails = [f for f in findings_by_check(diag, "eulericity") if f.status == FAIL]
        assert sorted(f.vertex for f in euler_fails) == list(range(8))

    def test_sharp_bend_fails(self, profile):
        # 170 degree direction change at the middle vertex.
        t = math.radians(170.0)
        pts = [[0, 0, 0], [40, 0, 0], [40 + 40 * math.cos(t), 40 * math.sin(t), 0]]
        g = graph_from_data(pts, [[0, 1], [1, 2]])
        diag = check_all(g, profile)
        finding = findings_by_check(diag, "bend_angle")[0]
        assert finding.status == FAIL
        assert abs(finding.measured - 170.0) < 1e-6
        assert not diag.overall_fabricable

    def test_short_edge_fails(self, profile):
        g = graph_from_data([[0, 0, 0], [10, 0, 0]], [[0, 1]])
        diag = check_all(g, profile)
        assert diag.edge_findings[0].status == FAIL
        assert not diag.overall_fabricable

    def test_circuit_closure_angle_checked(self, profile):
        # Equilateral triangle: the 120 degree turn exists at every corner,
        # including the closure at the start vertex.
        side = 40.0
        h = side * math.sqrt(3) / 2
        g = graph_from_data([[0, 0, 0], [side, 0, 0], [side / 2, h, 0]],
                            [[0, 1], [0, 2], [1, 2]])
        diag = check_all(g, profile)
        bends = findings_by_check(diag, "bend_angle")
        assert sorted(f.vertex for f in bends) == [0, 1, 2]
        assert all(abs(f.measured - 120.0) < 1e-9 for f in bends)

    def test_degree_four_vertex_gets_single_worst_finding(self, profile):
        # Bowtie center is visited twice by the circuit; one finding, judged
        # by the larger of the two bends.
        pts = [[0, 0, 0], [60, 0, 0], [30, 45, 0], [-60, 0, 0], [-30, -45, 0]]
        g = graph_from_data(pts, [[0, 1], [1, 2], [0, 2], [0, 3], [3, 4], [0, 4]])
        diag = check_all(g, profile)
        center = [f for f in findings_by_check(diag, "bend_angle") if f.vertex == 0]
        assert len(center) == 1

    def test_degree_two_fallback_without_path(self, profile):
        # Disconnected: two separate segments sharing no wire; bend findings
        # fall back to unambiguous degree-2 vertices (here: none).
        g = graph_from_data([[0, 0, 0], [30, 0, 0], [0, 50, 0], [30, 50, 0]],
                            [[0, 1], [2, 3]])
        diag = check_all(g, profile)
        assert not diag.euler_pass
        assert findings_by_check(diag, "bend_angle") == []

    def test_isolated_vertex_warns_not_fails(self, profile):
        g = graph_from_data([[0, 0, 0], [30, 0, 0], [99, 99, 99]], [[0, 1]])
        diag = check_all(g, profile)
        assert diag.overall_fabricable
        assert any("isolated" in w for w in diag.warnings)

    def test_graph_pass_implies_program_bend_pass(self, profile):
        rng = np.random.default_rng(21)
        from conftest import random_fabricable_graph
        for _ in range(25):
            g, path = random_fabricable_graph(rng)
            diag = check_all(g, profile)
            if not diag.overall_fabricable:
                continue
            program = compile_path(g, path)
            pdiag = check_program(program, profile)
            bend_findings = [f for f in pdiag.findings if f.check == "bend_range"]
            assert all(f.status == PASS for f in bend_findings)


class TestBoundaries:
    def build_two_segment(self, angle_deg: float):
        t = math.radians(angle_deg)
        pts = [[0, 0, 0], [40, 0, 0], [40 + 40 * math.cos(t), 40 * math.sin(t), 0]]
        return graph_from_data(pts, [[0, 1], [1, 2]])

    def test_bend_155_passes_1550001_fails(self, profile):
        ok = check_all(self.build_two_segment(155.0), profile)
        bad = check_all(self.build_two_segment(155.0001), profile)
        assert findings_by_check(ok, "bend_angle")[0].status == PASS
        assert findings_by_check(bad, "bend_angle")[0].status == FAIL

    def test_edge_204_passes_203999_fails(self, profile):
        ok = check_all(graph_from_data([[0, 0, 0], [20.4, 0, 0]], [[0, 1]]), profile)
        bad = check_all(graph_from_data([[0, 0, 0], [20.3999, 0, 0]], [[0, 1]]), profile)
        assert ok.edge_findings[0].status == PASS
        assert bad.edge_findings[0].status == FAIL

    def test_feed_25_passes_249_fails(self, profile):
        ok = check_program(InstructionProgram((feed(25.0),)), profile)
        bad = check_program(InstructionProgram((feed(24.9),)), profile)
        assert [f.status for f in ok.findings if f.check == "min_feed"] == [PASS]
        assert [f.status for f in bad.findings if f.check == "min_feed"] == [FAIL]

    def test_cumulative_rotate_360_passes_3601_fails(self, profile):
        ok = check_program(InstructionProgram(
            (feed(30.0), rotate(180.0), rotate(180.0))), profile)
        bad = check_program(InstructionProgram(
            (feed(30.0), rotate(180.0), rotate(180.1))), profile)
        ok_f = [f for f in ok.findings if f.check == "rotate_budget"][0]
        bad_f = [f for f in bad.findings if f.check == "rotate_budget"][0]
        assert ok_f.status == PASS
        assert bad_f.status == FAIL


class TestCheckProgram:
    def test_cumulative_rotate_rule(self, profile):
        p = InstructionProgram((feed(30.0), rotate(200.0), rotate(200.0)))
        diag = check_program(p, profile)
        f = [x for x in diag.findings if x.check == "rotate_budget"][0]
        assert f.status == FAIL
        assert math.isclose(f.measured, 400.0)

    def test_rotation_unwinds(self, profile):
        # Signed running sum: turns that reverse stay within the wrap budget.
        p = InstructionProgram((feed(30.0), rotate(300.0), rotate(-300.0), rotate(300.0)))
        diag = check_program(p, profile)
        f = [x for x in diag.findings if x.check == "rotate_budget"][0]
        assert f.status == PASS

    def test_u_program_within_stock(self, profile, u_program):
        diag = check_program(u_program, profile)
        assert diag.ok  # 105 mm total against a 600 mm budget

    def test_stock_budget_exceeded(self, profile):
        p = InstructionProgram(tuple(feed(110.0) for _ in range(6)))
        diag = check_program(p, profile)
        f = [x for x in diag.findings if x.check == "stock_budget"][0]
        assert f.status == FAIL

    def test_bend_beyond_155_flagged(self, profile):
        p = InstructionProgram((feed(30.0), bend(156.0), feed(30.0)))
        diag = check_program(p, profile)
        assert [f.status for f in diag.findings if f.check == "bend_range"] == [FAIL]

    def test_corrected_program_judged_at_hard_stop(self, profile, u_program,
                                                   calibrated_params):
        corrected = apply_corrections(u_program, calibrated_params)
        # Commanded 105.4 deg bends exceed nothing at the 165 deg hard stop.
        diag = check_program(corrected, profile)
        assert all(f.status == PASS for f in diag.findings if f.check == "bend_range")
        over = InstructionProgram((feed(30.0), bend(166.0), feed(30.0)), corrected=True)
        diag = check_program(over, profile)
        assert [f.status for f in diag.findings if f.check == "bend_range"] == [FAIL]


class TestMonotonicity:
    def test_removing_failing_edge_no_new_unrelated_failures(self, profile):
        rng = np.random.default_rng(31)
        for _ in range(30):
            n = int(rng.integers(4, 8))
            pts = [[float(x) for x in rng.uniform(-60, 60, size=3)] for _ in range(n)]
            all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            k = int(rng.integers(n - 1, min(len(all_pairs), 9) + 1))
            idx = rng.choice(len(all_pairs), size=k, replace=False)
            edges = sorted(all_pairs[i] for i in idx)
            g = graph_from_data(pts, edges)
            before = check_all(g, profile)
            failing_edges = [f.edge for f in before.edge_findings if f.status == FAIL]
            if not failing_edges:
                continue
            target = failing_edges[0]
            g2 = graph_from_data(pts, [e for e in edges if e != target])
            after = check_all(g2, profile)
            # No new min_length failure anywhere (lengths are untouched).
            before_fail = {f.edge for f in before.edge_findings if f.status == FAIL}
            after_fail = {f.edge for f in after.edge_findings if f.status == FAIL}
            assert after_fail <= before_fail
            # No new eulericity failure away from the removed edge's endpoints.
            before_odd = {f.vertex for f in before.vertex_findings
                          if f.check == "eulericity" and f.status == FAIL}
            after_odd = {f.vertex for f in after.vertex_findings
                         if f.check == "eulericity" and f.status == FAIL}
            assert after_odd - before_odd <= set(target)


def test_diagnostics_json_shape(profile, u_graph):
    d = check_all(u_graph, profile).to_dict()
    assert set(d) == {"euler", "vertex_findings", "edge_findings",
                      "warnings", "overall_fabricable"}
    assert d["euler"]["classification"] == "trail"
    assert d["overall_fabricable"] is True
    assert {f["check"] for f in d["vertex_findings"]} <= {"eulericity", "bend_angle"}
    assert all(set(f) == {"vertex", "check", "status", "detail", "measured"}
               for f in d["vertex_findings"])
    assert all(set(f) == {"edge", "check", "status", "measured"}
               for f in d["edge_findings"])
