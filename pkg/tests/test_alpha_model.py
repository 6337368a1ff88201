"""Tests for alpha_model: parameters, connectivity, robot rules, schedulers, accounting, initial sets."""
import logging
from itertools import product

import pytest

from swarmcheck import ConfigurationError
from swarmcheck.alpha_model import (
    ALL_ROBOTS,
    InitialConstraint,
    InitKind,
    Motion,
    RobotSpec,
    RobotVarsLegacy,
    RobotVarsNew,
    SchedulerState,
    all_connected,
    collision_free,
    global_successors,
    initial_scheduler,
    initial_states,
    is_initial,
    make_state,
    neighbor_count,
    reference_verdict,
    robot_decision,
    robot_decision_legacy,
    robot_decision_new,
    schedule,
    signature,
    state_space_size,
)

from conftest import legacy_state, params, pose


# ======================== Parameters ========================

class TestModelParams:
    @pytest.mark.parametrize("kwargs", [
        dict(r=0, alpha=0),
        dict(m=1),
        dict(r=2, alpha=2),
        dict(w=-1),
        dict(metric="taxicab"),
        dict(abstraction="new", mode="sync"),
    ])
    def test_invalid_combinations(self, kwargs):
        with pytest.raises(ConfigurationError):
            params(**kwargs)

    def test_full_range_is_flagged(self, caplog):
        with caplog.at_level(logging.WARNING):
            params(m=2, w=2)
        assert "vacuous" in caplog.text

    def test_replace_revalidates(self):
        p = params(m=3, r=3)
        assert p.replace(m=5).m == 5
        with pytest.raises(ConfigurationError):
            p.replace(r=1)

    def test_explicit_state_outside_grid(self):
        spec = (RobotSpec(x=4, y=0, dir="N"), RobotSpec(x=0, y=0, dir="N"))
        with pytest.raises(ConfigurationError):
            params(m=3, init=InitialConstraint(kind=InitKind.EXPLICIT, states=(spec,)))

    def test_explicit_colocated_robots_rejected_in_new_abstraction(self):
        spec = (RobotSpec(x=1, y=1, dir="N"), RobotSpec(x=1, y=1, dir="E"))
        with pytest.raises(ConfigurationError, match="two robots on one cell"):
            params(m=3, abstraction="new", init=InitialConstraint(kind=InitKind.EXPLICIT, states=(spec,)))

    def test_explicit_colocated_robots_allowed_in_legacy_abstraction(self):
        spec = (RobotSpec(x=1, y=1, dir="N"), RobotSpec(x=1, y=1, dir="E"))
        p = params(m=3, init=InitialConstraint(kind=InitKind.EXPLICIT, states=(spec,)))
        assert p.init.states == (spec,)


# ======================== Connectivity ========================

class TestConnectivity:
    def test_same_cell_counts_as_neighbour(self):
        p = params(m=5, r=2)
        s = legacy_state(p, (1, 1, "N", "default"), (1, 1, "E", "default"))
        assert neighbor_count(s, 0, p) == 1
        assert neighbor_count(s, 1, p) == 1

    def test_counts_with_wrap(self):
        p = params(m=5, r=3)
        s = legacy_state(p, (0, 0, "N", "default"), (0, 4, "N", "default"), (0, 2, "N", "default"))
        assert [neighbor_count(s, i, p) for i in range(3)] == [1, 1, 0]

    def test_single_robot(self):
        p = params(m=3, r=1, alpha=0)
        s = legacy_state(p, (0, 0, "N", "default"))
        assert neighbor_count(s, 0, p) == 0
        assert all_connected(s, p)

    def test_chain_is_connected(self):
        p = params(m=8, r=3)
        s = legacy_state(p, (0, 0, "N", "default"), (1, 0, "N", "default"), (2, 0, "N", "default"))
        assert all_connected(s, p)

    def test_two_by_two_always_connected(self):
        p = params(m=2, r=3)
        cells = [(x, y) for x in range(2) for y in range(2)]
        for placement in product(cells, repeat=3):
            s = legacy_state(p, *[(x, y, "N", "default") for x, y in placement])
            assert all_connected(s, p)

    def test_diagonal_spread_is_disconnected(self):
        p = params(m=5, r=3)
        s = legacy_state(p, (0, 0, "N", "default"), (2, 2, "N", "default"), (4, 4, "N", "default"))
        assert not all_connected(s, p)

    def test_collision_free(self):
        p = params(m=4, r=2)
        assert not collision_free(legacy_state(p, (1, 1, "N", "default"), (1, 1, "S", "default")))
        assert collision_free(legacy_state(p, (1, 1, "N", "default"), (1, 2, "S", "default")))


# ======================== Robot rules ========================

class TestLegacyDecision:
    def test_lost_robot_turns_back(self):
        p = params(m=5, r=2)
        s = legacy_state(p, (1, 1, "N", "default"), (3, 3, "N", "default"))
        assert robot_decision_legacy(s, 0, p) == [RobotVarsLegacy(pose(1, 1, "S"), Motion.SEARCHING)]

    def test_reconnected_robot_turns_aside(self):
        p = params(m=5, r=2)
        s = legacy_state(p, (1, 1, "N", "searching"), (2, 2, "N", "default"))
        assert set(robot_decision_legacy(s, 0, p)) == {
            RobotVarsLegacy(pose(1, 1, "W"), Motion.DEFAULT),
            RobotVarsLegacy(pose(1, 1, "E"), Motion.DEFAULT),
        }

    def test_connected_robot_moves_forward(self):
        p = params(m=5, r=2)
        s = legacy_state(p, (1, 1, "E", "default"), (1, 2, "N", "default"))
        assert robot_decision_legacy(s, 0, p) == [RobotVarsLegacy(pose(2, 1, "E"), Motion.DEFAULT)]

    def test_searching_without_neighbours_keeps_walking(self):
        p = params(m=5, r=2)
        s = legacy_state(p, (1, 1, "S", "searching"), (3, 3, "N", "default"))
        assert robot_decision_legacy(s, 0, p) == [RobotVarsLegacy(pose(1, 0, "S"), Motion.SEARCHING)]


class TestNewDecision:
    def _state(self, p, me, prev, other):
        return make_state(p, [me, other], [prev, 0])

    def test_loss_turns_back_then_moves(self):
        p = params(m=5, r=2, abstraction="new")
        s = self._state(p, pose(1, 1, "N"), 1, pose(3, 3, "N"))
        assert robot_decision_new(s, 0, p) == [RobotVarsNew(pose(1, 0, "S"), 0)]

    def test_gain_offers_three_headings(self):
        p = params(m=5, r=2, abstraction="new")
        s = self._state(p, pose(1, 1, "N"), 0, pose(2, 2, "N"))
        assert set(robot_decision_new(s, 0, p)) == {
            RobotVarsNew(pose(0, 1, "W"), 1),
            RobotVarsNew(pose(2, 1, "E"), 1),
            RobotVarsNew(pose(1, 0, "S"), 1),
        }

    def test_blocked_robot_stays_and_turns(self):
        p = params(m=5, r=2, abstraction="new")
        s = self._state(p, pose(1, 1, "N"), 1, pose(1, 2, "N"))
        assert set(robot_decision_new(s, 0, p)) == {
            RobotVarsNew(pose(1, 1, "W"), 1),
            RobotVarsNew(pose(1, 1, "E"), 1),
        }

    def test_decisions_never_empty(self):
        p = params(m=3, r=2, abstraction="new")
        for s in initial_states(p):
            for i in range(p.r):
                assert robot_decision(s, i, p)


# ======================== Scheduling ========================

class TestSchedule:
    def _any_state(self, p, sched):
        return legacy_state(p, *[(i, 0, "N", "default") for i in range(p.r)], sched=sched)

    def test_strict_cycles(self):
        p = params(m=4, r=3)
        s = self._any_state(p, SchedulerState(2, 0))
        assert schedule(s, p) == [(2, SchedulerState(0, 0))]

    def test_nonstrict_choices(self):
        p = params(m=4, r=3, mode="nonstrict")
        s = self._any_state(p, SchedulerState(1, 0b110))
        assert schedule(s, p) == [(1, SchedulerState(2, 0b100)), (2, SchedulerState(1, 0b010))]

    def test_nonstrict_rounds_move_everyone_once(self):
        p = params(m=4, r=3, mode="nonstrict")
        start = initial_scheduler(p)
        rounds = [([], start)]
        for _ in range(p.r):
            grown = []
            for movers, sched in rounds:
                for mover, nxt in schedule(self._any_state(p, sched), p):
                    assert sched.turn in [i for i in range(p.r) if sched.remaining >> i & 1]
                    grown.append((movers + [mover], nxt))
            rounds = grown
        assert len(rounds) == 6
        for movers, sched in rounds:
            assert sorted(movers) == [0, 1, 2]
            assert sched == start

    def test_fair_offers_every_robot(self):
        p = params(m=4, r=3, mode="fair")
        s = self._any_state(p, initial_scheduler(p))
        assert [mover for mover, _ in schedule(s, p)] == [0, 1, 2]

    def test_sync_moves_everyone(self):
        p = params(m=4, r=2, mode="sync")
        s = legacy_state(p, (0, 0, "N", "default"), (1, 0, "N", "default"))
        successors = global_successors(s, p)
        assert successors == [(legacy_state(p, (0, 1, "N", "default"), (1, 1, "N", "default")), ALL_ROBOTS)]


class TestGlobalSuccessors:
    def test_lone_robot_walks_forward(self):
        p = params(m=3, r=1, alpha=0)
        s = legacy_state(p, (0, 0, "N", "default"))
        assert global_successors(s, p) == [(legacy_state(p, (0, 1, "N", "default")), 0)]

    def test_strict_branching_follows_the_scheduled_robot(self):
        p = params(m=5, r=2)
        for s in [legacy_state(p, (1, 1, "N", "searching"), (2, 2, "N", "default")),
                  legacy_state(p, (1, 1, "N", "default"), (4, 3, "E", "searching"))]:
            assert len(global_successors(s, p)) == len(robot_decision(s, s.sched.turn, p))

    def test_new_abstraction_never_collides(self):
        p = params(m=3, r=3, abstraction="new")
        for s in initial_states(p):
            for succ, _ in global_successors(s, p):
                assert collision_free(succ)


# ======================== State accounting ========================

class TestSignature:
    @pytest.mark.parametrize("abstraction, encoding, mode, total", [
        ("legacy", "global", "fair", 134_217_728),
        ("legacy", "global", "strict", 402_653_184),
        ("legacy", "global", "nonstrict", 2_818_572_288),
        ("legacy", "relative", "fair", 1_048_576),
        ("legacy", "relative", "strict", 3_145_728),
        ("legacy", "relative", "nonstrict", 22_020_096),
        ("new", "relative", "fair", 31_850_496),
        ("new", "relative", "strict", 31_850_496),
        ("new", "relative", "nonstrict", 222_953_472),
    ])
    def test_reported_totals(self, abstraction, encoding, mode, total):
        p = params(m=8, r=3, abstraction=abstraction, encoding=encoding, mode=mode)
        assert state_space_size(signature(p)) == total

    @pytest.mark.parametrize("abstraction", ["legacy", "new"])
    @pytest.mark.parametrize("mode", ["strict", "nonstrict", "fair"])
    def test_reduction_factor(self, abstraction, mode):
        for m in (3, 8):
            g = params(m=m, r=3, abstraction=abstraction, mode=mode)
            rel = g.replace(encoding="relative")
            assert (state_space_size(signature(g, materialize_random=False))
                    == 4 * m * m * state_space_size(signature(rel, materialize_random=False)))

    def test_domain_sizes(self):
        sig = signature(params(m=8, r=3, abstraction="new", encoding="relative"))
        assert sig.robot_vars == {"x": 8, "y": 8, "direction": 4, "last_num_con": 3}
        assert sig.robot_count == 2
        assert sig.reference_vars == {"last_num_con": 3}


# ======================== Initial states ========================

class TestInitialStates:
    def test_lone_robot_count(self):
        states = list(initial_states(params(m=2, r=1, alpha=0)))
        assert len(states) == 16
        assert all(s.robots[0].motion == Motion.DEFAULT for s in states)

    def test_new_abstraction_excludes_colocation(self):
        states = list(initial_states(params(m=2, r=2, abstraction="new")))
        assert len(states) == 4 * 3 * 16
        assert all(collision_free(s) for s in states)

    def test_explicit_list(self):
        spec = (RobotSpec(x=0, y=0, dir="N"), RobotSpec(x=2, y=1, dir="w", aux=1))
        p = params(m=3, init=InitialConstraint(kind=InitKind.EXPLICIT, states=(spec,)))
        states = list(initial_states(p))
        assert states == [legacy_state(p, (0, 0, "N", "default"), (2, 1, "W", "searching"))]
        assert is_initial(states[0], p)

    def test_connected_filter(self):
        p = params(m=4, r=2, init=InitialConstraint(kind=InitKind.CONNECTED))
        assert all(all_connected(s, p) for s in initial_states(p))

    def test_empty_initial_set(self):
        p = params(m=3, r=2, w=0, abstraction="new", init=InitialConstraint(kind=InitKind.CONNECTED))
        with pytest.raises(ConfigurationError):
            initial_states(p)

    def test_is_initial_rejects_searching(self):
        p = params(m=3, r=2)
        assert is_initial(legacy_state(p, (0, 0, "N", "default"), (1, 1, "E", "default")), p)
        assert not is_initial(legacy_state(p, (0, 0, "N", "searching"), (1, 1, "E", "default")), p)

    def test_reference_pattern(self):
        assert reference_verdict(2, 3) is True
        assert reference_verdict(5, 3) is False
        assert reference_verdict(7, 7) is None
