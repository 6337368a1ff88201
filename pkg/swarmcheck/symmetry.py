"""
Relative (reference-robot) encoding for swarmcheck

Robot 0 is the reference: pinned at cell (0,0) facing North. Every other
robot is stored in the reference's frame, so a whole orbit of 4*m*m global
states collapses to one relative state.
"""

import logging
from itertools import product
from typing import Iterator, List, NamedTuple, Sequence, Set, Tuple, Union

from swarmcheck import ReplayError
from swarmcheck.alpha_model import (
    ALL_ROBOTS,
    InitKind,
    ModelParams,
    Motion,
    RobotVars,
    RobotVarsLegacy,
    RobotVarsNew,
    SchedulerState,
    SwarmState,
    global_successors,
    initial_states,
    initial_states_pinned,
    is_initial,
    robot_decision,
    schedule,
)
from swarmcheck.grid_core import (
    ORIGIN,
    FrameTransform,
    Pose,
    all_transforms,
    apply_transform,
    change_for_heading,
    reframe_pose,
    shift_pose,
    transform_fixing,
    transform_placing,
)

logger = logging.getLogger(__name__)


class RelativeState(NamedTuple):
    """
    reference: the reference robot's non-pose variable (a Motion for the
    legacy abstraction, a plain neighbour count for the new one)
    others: robots 1..r-1 in the reference frame
    """
    reference: Union[Motion, int]
    others: Tuple[RobotVars, ...]
    sched: SchedulerState


AnyState = Union[SwarmState, RelativeState]


def _reference_vars(reference: Union[Motion, int], pose: Pose) -> RobotVars:
    if isinstance(reference, Motion):
        return RobotVarsLegacy(pose, reference)
    return RobotVarsNew(pose, reference)


def _move(rv: RobotVars, pose: Pose) -> RobotVars:
    return rv._replace(pose=pose)


def transform_state(t: FrameTransform, s: SwarmState, m: int) -> SwarmState:
    return SwarmState(tuple(_move(rv, apply_transform(t, rv.pose, m)) for rv in s.robots), s.sched)


def canonicalize(s: SwarmState, m: int) -> RelativeState:
    """Representative of the orbit of s: the frame in which robot 0 sits at ((0,0),N)"""
    ref = s.robots[0]
    t = transform_fixing(ref.pose, m)
    others = tuple(_move(rv, apply_transform(t, rv.pose, m)) for rv in s.robots[1:])
    return RelativeState(ref[1], others, s.sched)


def lift(rel: RelativeState, ref_pose: Pose, m: int) -> SwarmState:
    """The global state whose robot 0 has pose ref_pose and whose canonical form is rel"""
    t = transform_placing(ref_pose, m)
    others = tuple(_move(rv, apply_transform(t, rv.pose, m)) for rv in rel.others)
    return SwarmState((_reference_vars(rel.reference, Pose(*ref_pose)),) + others, rel.sched)


def frame_state(rel: RelativeState) -> SwarmState:
    """The relative state read as a global state (reference at the origin)"""
    return SwarmState((_reference_vars(rel.reference, ORIGIN),) + rel.others, rel.sched)


def as_global(state: AnyState) -> SwarmState:
    return frame_state(state) if isinstance(state, RelativeState) else state


def orbit(s: SwarmState, m: int) -> Set[SwarmState]:
    return {transform_state(t, s, m) for t in all_transforms(m)}


def reference_update(others: Sequence[RobotVars], new_ref: Pose, m: int) -> Tuple[RobotVars, ...]:
    """
    Re-express the other robots after the reference moved/turned to new_ref.
    A displacement of the reference is an opposite shift of everyone else;
    a heading change applies the matching reframing row.
    """
    change = change_for_heading(new_ref.dir)
    updated = []
    for rv in others:
        pose = shift_pose(rv.pose, -new_ref.x, -new_ref.y, m)
        if change is not None:
            pose = reframe_pose(pose, m, change)
        updated.append(_move(rv, pose))
    return tuple(updated)


def relative_successors(rel: RelativeState, params: ModelParams) -> List[Tuple[RelativeState, int]]:
    """Every (successor, mover) pair of the relative encoding, in a fixed order"""
    m = params.m
    frame = frame_state(rel)
    successors = set()
    for mover, next_sched in schedule(frame, params):
        if mover == ALL_ROBOTS:
            per_robot = [robot_decision(frame, i, params) for i in range(params.r)]
            for combo in product(*per_robot):
                ref = combo[0]
                others = reference_update(combo[1:], ref.pose, m)
                successors.add((RelativeState(ref[1], others, next_sched), mover))
        elif mover == 0:
            for branch in robot_decision(frame, 0, params):
                others = reference_update(rel.others, branch.pose, m)
                successors.add((RelativeState(branch[1], others, next_sched), mover))
        else:
            for branch in robot_decision(frame, mover, params):
                others = rel.others[:mover - 1] + (branch,) + rel.others[mover:]
                successors.add((RelativeState(rel.reference, others, next_sched), mover))
    return sorted(successors)


def relative_initial_states(params: ModelParams) -> Iterator[RelativeState]:
    """Canonical initial set; group-closed constraints only need robot 0 at the origin"""
    seen = set()
    if params.init.kind == InitKind.EXPLICIT:
        source = initial_states(params)
    else:
        source = initial_states_pinned(params, ORIGIN)
    for state in source:
        rel = canonicalize(state, params.m)
        if rel not in seen:
            seen.add(rel)
            yield rel


def is_relative_initial(rel: RelativeState, params: ModelParams) -> bool:
    if params.init.kind == InitKind.EXPLICIT:
        return rel in set(relative_initial_states(params))
    return is_initial(frame_state(rel), params)


def lift_trace(steps: Sequence[Tuple[RelativeState, int]], ref_pose: Pose,
               params: ModelParams) -> List[Tuple[SwarmState, int]]:
    """
    Replay a relative trace in the world frame starting with robot 0 at ref_pose.
    steps[i] = (state, mover of the transition leaving it); the last mover is
    kept as-is and not replayed.
    """
    if not steps:
        return []
    m = params.m
    current = lift(steps[0][0], ref_pose, m)
    lifted = []
    for index, (rel, mover) in enumerate(steps):
        if canonicalize(current, m) != rel:
            raise ReplayError(index, "lifted state does not canonicalize to the relative state")
        lifted.append((current, mover))
        if index + 1 == len(steps):
            break
        target = steps[index + 1][0]
        match = next(
            (succ for succ, who in global_successors(current, params)
             if who == mover and canonicalize(succ, m) == target),
            None,
        )
        if match is None:
            raise ReplayError(index, f"no global move of robot {mover} matches the next relative state")
        current = match
    return lifted
