"""Tests for the explicit-state checker and the encoding cross-checks."""
import random

import pytest

import config
from swarmcheck import ConfigurationError
from swarmcheck.alpha_model import Encoding, InitialConstraint, InitKind, RobotSpec
from swarmcheck.checker import (
    check,
    enumerate_reachable,
    frontier_of,
    quotient_check,
    scale_frontier,
    total_states,
    verdict_agreement,
)
from swarmcheck.grid_core import all_poses
from swarmcheck.properties import parse_property
from swarmcheck.traces import lift_lasso, validate_trace

from conftest import params

EVENTUALLY_CONNECTED = parse_property("F all_connected")


# ======================== Reachability ========================

class TestReachability:
    def test_single_robot_relative_collapses(self):
        p = params(m=2, r=1, alpha=0)
        assert enumerate_reachable(p).count == 16
        assert enumerate_reachable(p.replace(encoding="relative")).count == 1

    def test_initial_states_come_first(self):
        graph = enumerate_reachable(params(m=3, r=2))
        assert graph.initial_count == 36 * 36
        assert all(graph.parent[i] == -1 for i in range(graph.initial_count))
        assert graph.count > graph.initial_count

    def test_path_to_walks_back_to_an_initial_state(self):
        graph = enumerate_reachable(params(m=3, r=2))
        path = graph.path_to(graph.count - 1)
        assert path[0][0] < graph.initial_count
        assert path[-1] == (graph.count - 1, None)

    def test_same_result_for_any_worker_count(self, monkeypatch):
        monkeypatch.setattr(config.config, "FRONTIER_CHUNK", 64)
        p = params(m=3, r=2, mode="nonstrict")
        single = enumerate_reachable(p, workers=1)
        pooled = enumerate_reachable(p, workers=2)
        assert single.keys == pooled.keys
        assert single.transitions == pooled.transitions

    def test_budget_is_reported(self):
        verdict = check(params(m=4, r=3), EVENTUALLY_CONNECTED, budget_states=100)
        assert verdict.result == "inconclusive"
        assert verdict.witness is None
        assert verdict.stats.budget_hit
        assert verdict.stats.note.startswith("budget exhausted")

    def test_total_states(self):
        assert total_states(params(m=8, r=3)) == 402_653_184
        assert total_states(params(m=8, r=3, encoding="relative")) == 3_145_728


# ======================== Liveness ========================

class TestEventuallyConnected:
    def test_lone_robot(self):
        assert check(params(m=4, r=1, alpha=0), EVENTUALLY_CONNECTED).result == "holds"

    @pytest.mark.parametrize("m, r, encoding", [(2, 3, "relative"), (3, 2, "global"), (3, 2, "relative")])
    def test_small_tori_are_always_connected(self, m, r, encoding):
        verdict = check(params(m=m, r=r, encoding=encoding), EVENTUALLY_CONNECTED)
        assert verdict.result == "holds"
        assert verdict.witness is None
        assert verdict.stats.reachable_states > 0

    @pytest.mark.parametrize("encoding", ["global", "relative"])
    def test_parallel_columns_never_meet(self, encoding):
        p = params(m=4, r=2, encoding=encoding)
        verdict = check(p, EVENTUALLY_CONNECTED)
        assert verdict.result == "fails"
        assert verdict.property == "F all_connected"
        assert verdict.witness.loop
        assert validate_trace(verdict.witness, p, EVENTUALLY_CONNECTED).ok

    def test_fair_witness_moves_every_robot(self):
        p = params(m=4, r=2, mode="fair")
        verdict = check(p, EVENTUALLY_CONNECTED)
        assert verdict.result == "fails"
        assert {step.mover for step in verdict.witness.loop} == {0, 1}
        assert validate_trace(verdict.witness, p, EVENTUALLY_CONNECTED).ok

    @pytest.mark.parametrize("mode", ["nonstrict", "sync"])
    def test_other_schedulers(self, mode):
        p = params(m=4, r=2, mode=mode)
        verdict = check(p, EVENTUALLY_CONNECTED)
        assert verdict.result == "fails"
        assert validate_trace(verdict.witness, p, EVENTUALLY_CONNECTED).ok

    def test_recurrence_shapes(self):
        p = params(m=4, r=2)
        for text in ("GF all_connected", "FG all_connected"):
            prop = parse_property(text)
            verdict = check(p, prop)
            assert verdict.result == "fails"
            assert validate_trace(verdict.witness, p, prop).ok
        assert check(params(m=3, r=2), parse_property("GF all_connected")).result == "holds"
        assert check(params(m=3, r=2), parse_property("FG all_connected")).result == "holds"

    def test_explicit_initial_state(self):
        start = (RobotSpec(x=0, y=0, dir="S"), RobotSpec(x=1, y=0, dir="S"))
        p = params(m=4, r=2, init=InitialConstraint(kind=InitKind.EXPLICIT, states=(start,)))
        verdict = check(p, EVENTUALLY_CONNECTED)
        assert verdict.result == "holds"
        assert verdict.stats.initial_states == 1


# ======================== Safety ========================

class TestSafety:
    def test_legacy_allows_co_location(self):
        prop = parse_property("G collision_free")
        p = params(m=3, r=2)
        verdict = check(p, prop)
        assert verdict.result == "fails"
        assert len(verdict.witness.prefix) == 1
        assert not verdict.witness.loop
        assert validate_trace(verdict.witness, p, prop).ok

    @pytest.mark.parametrize("mode", ["strict", "nonstrict", "fair"])
    def test_new_abstraction_keeps_robots_apart(self, mode):
        verdict = check(params(m=3, r=2, abstraction="new", mode=mode), parse_property("G collision_free"))
        assert verdict.result == "holds"

    def test_small_torus_stays_connected(self):
        assert check(params(m=3, r=3, encoding="relative"), parse_property("G all_connected")).result == "holds"

    def test_pairwise_index_checked(self):
        with pytest.raises(ConfigurationError):
            check(params(m=3, r=2), parse_property("G pairwise(0,2)"))


# ======================== Cross-checks ========================

class TestCrossChecks:
    def test_quotient(self):
        report = quotient_check(params(m=3, r=2))
        assert report.passed
        assert report.ratio == 36
        assert report.global_reachable == 36 * report.relative_reachable

    def test_quotient_needs_group_closed_initial_set(self):
        start = (RobotSpec(x=0, y=0, dir="N"), RobotSpec(x=1, y=0, dir="N"))
        p = params(m=3, r=2, init=InitialConstraint(kind=InitKind.EXPLICIT, states=(start,)))
        with pytest.raises(ConfigurationError):
            quotient_check(p)

    def test_quotient_over_budget(self):
        with pytest.raises(ConfigurationError):
            quotient_check(params(m=3, r=2), budget_states=10)

    @pytest.mark.parametrize("m, expected", [(3, "holds"), (4, "fails")])
    def test_agreement(self, m, expected):
        report = verdict_agreement(params(m=m, r=2), EVENTUALLY_CONNECTED)
        assert report.status == "identical verdicts"
        assert report.agree
        assert report.global_verdict.result == expected
        assert report.relative_verdict.result == expected

    def test_agreement_untested_on_budget(self):
        report = verdict_agreement(params(m=4, r=3), EVENTUALLY_CONNECTED, budget_states=50)
        assert report.status == "untested"
        assert report.agree is None

    def test_frontier(self):
        rows = scale_frontier(params(m=2, r=2), [2, 3, 4, 5], budget_states=2100)
        assert frontier_of(rows, Encoding.RELATIVE) == 5
        assert 2 <= frontier_of(rows, Encoding.GLOBAL) < 5
        assert any(not row.completed for row in rows if row.encoding == "global")


# ======================== Larger instances ========================

@pytest.mark.slow
class TestLargerInstances:
    def test_five_by_five_three_robots(self):
        p = params(m=5, r=3, encoding="relative")
        verdict = check(p, EVENTUALLY_CONNECTED)
        assert verdict.result == "fails"
        g = p.replace(encoding="global")
        for ref_pose in random.Random(9).sample(all_poses(p.m), 20):
            lifted = lift_lasso(verdict.witness, ref_pose, p)
            assert validate_trace(lifted, g, EVENTUALLY_CONNECTED).ok

    @pytest.mark.parametrize("mode", ["strict", "nonstrict"])
    @pytest.mark.parametrize("m, r", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)])
    def test_quotient_grid(self, m, r, mode):
        assert quotient_check(params(m=m, r=r, mode=mode)).passed

    @pytest.mark.parametrize("m, r", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3)])
    def test_encodings_agree(self, m, r):
        assert verdict_agreement(params(m=m, r=r), EVENTUALLY_CONNECTED).agree

    @pytest.mark.parametrize("mode", ["fair", "sync"])
    def test_quotient_other_schedulers(self, mode):
        assert quotient_check(params(m=2, r=3, mode=mode)).passed

    @pytest.mark.parametrize("m", [3, 4])
    def test_new_abstraction_three_robots(self, m):
        p = params(m=m, r=3, abstraction="new", encoding="relative")
        assert check(p, parse_property("G collision_free")).result == "holds"
