"""
Alpha algorithm semantics for swarmcheck

Two abstractions of the rule set (legacy: a two-valued motion flag; new:
a remembered neighbour count with explicit collision avoidance), the four
concurrency-mode schedulers, and the global-encoding successor function.
"""

import itertools
import logging
from enum import Enum, IntEnum
from math import prod
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from swarmcheck import ConfigurationError
from swarmcheck.grid_core import (
    METRICS,
    Direction,
    Pose,
    Turn,
    all_poses,
    rotate_dir,
    step_cell,
    within_range,
)

logger = logging.getLogger(__name__)

# Pseudo-mover of a synchronous step
ALL_ROBOTS = -1
HEADINGS = 4


class Abstraction(str, Enum):
    LEGACY = "legacy"
    NEW = "new"


class Mode(str, Enum):
    STRICT = "strict"
    NONSTRICT = "nonstrict"
    FAIR = "fair"
    SYNC = "sync"


class Encoding(str, Enum):
    GLOBAL = "global"
    RELATIVE = "relative"


class InitKind(str, Enum):
    ALL = "all"
    CONNECTED = "connected"
    EXPLICIT = "explicit"


class Motion(IntEnum):
    DEFAULT = 0
    SEARCHING = 1


class RobotVarsLegacy(NamedTuple):
    pose: Pose
    motion: Motion


class RobotVarsNew(NamedTuple):
    pose: Pose
    last_num_con: int


RobotVars = Union[RobotVarsLegacy, RobotVarsNew]


class SchedulerState(NamedTuple):
    """turn: strict cursor / lowest robot still owed a move; remaining: bitmask (nonstrict only)"""
    turn: int
    remaining: int


class SwarmState(NamedTuple):
    robots: Tuple[RobotVars, ...]
    sched: SchedulerState

    def poses(self) -> Tuple[Pose, ...]:
        return tuple(rv.pose for rv in self.robots)


class RobotSpec(BaseModel):
    """One robot of an explicitly listed initial state"""
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    dir: Direction
    aux: int = 0

    @field_validator("dir", mode="before")
    @classmethod
    def _letter_heading(cls, value):
        if isinstance(value, str):
            return Direction[value.upper()]
        return value


class InitialConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: InitKind = InitKind.ALL
    states: Tuple[Tuple[RobotSpec, ...], ...] = ()

    @model_validator(mode="after")
    def _explicit_needs_states(self):
        if self.kind == InitKind.EXPLICIT and not self.states:
            raise ValueError("explicit initial constraint needs at least one state")
        return self


class ModelParams(BaseModel):
    """Full configuration of one experiment"""
    model_config = ConfigDict(frozen=True)

    m: int
    r: int
    alpha: int = 1
    w: int = 1
    abstraction: Abstraction = Abstraction.LEGACY
    mode: Mode = Mode.STRICT
    encoding: Encoding = Encoding.GLOBAL
    metric: str = "chebyshev"
    init: InitialConstraint = InitialConstraint()

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.m < 2:
            raise ConfigurationError(f"grid side must be >= 2, got {self.m}")
        if self.r < 1:
            raise ConfigurationError(f"robot count must be >= 1, got {self.r}")
        if self.alpha < 0 or self.alpha > self.r - 1:
            raise ConfigurationError(f"alpha must lie in [0, {self.r - 1}], got {self.alpha}")
        if self.w < 0:
            raise ConfigurationError(f"range must be >= 0, got {self.w}")
        if self.metric not in METRICS:
            raise ConfigurationError(f"unknown metric '{self.metric}'")
        if self.mode == Mode.SYNC and self.abstraction == Abstraction.NEW:
            raise ConfigurationError("synchronous mode cannot preserve collision freedom in the new abstraction")
        for spec in self.init.states:
            if len(spec) != self.r:
                raise ConfigurationError(f"explicit initial state lists {len(spec)} robots, expected {self.r}")
            for rb in spec:
                if not (0 <= rb.x < self.m and 0 <= rb.y < self.m):
                    raise ConfigurationError(f"explicit robot at ({rb.x},{rb.y}) lies outside the {self.m}x{self.m} grid")
                if not 0 <= rb.aux < _aux_domain(self.abstraction, self.r):
                    raise ConfigurationError(f"explicit robot variable {rb.aux} out of range")
            cells = [(rb.x, rb.y) for rb in spec]
            if self.abstraction == Abstraction.NEW and len(set(cells)) < len(cells):
                raise ConfigurationError("explicit initial state places two robots on one cell, which the new abstraction forbids")
        if self.w >= self.m:
            logger.warning(f"⚠️  range {self.w} covers the whole {self.m}x{self.m} torus - connectivity is vacuous")
        return self

    @property
    def all_mask(self) -> int:
        return (1 << self.r) - 1

    def replace(self, **changes) -> "ModelParams":
        data = self.model_dump()
        data.update(changes)
        return ModelParams(**data)

    def label(self) -> str:
        return f"m={self.m} r={self.r} alpha={self.alpha} w={self.w} {self.abstraction.value}/{self.mode.value}/{self.encoding.value}"


class VariableSignature(BaseModel):
    """Domain sizes from which the total state-space size follows"""
    model_config = ConfigDict(frozen=True)

    robot_vars: Dict[str, int]
    robot_count: int
    reference_vars: Dict[str, int] = {}
    global_vars: Dict[str, int] = {}

    @model_validator(mode="after")
    def _positive_domains(self):
        for name, size in {**self.robot_vars, **self.reference_vars, **self.global_vars}.items():
            if size < 1:
                raise ValueError(f"domain of '{name}' must be >= 1, got {size}")
        return self


def _aux_domain(abstraction: Abstraction, r: int) -> int:
    return 2 if abstraction == Abstraction.LEGACY else r


# ---------------------------------------------------------------------------
# Connectivity
# ---------------------------------------------------------------------------

def neighbor_count(s: SwarmState, i: int, params: ModelParams) -> int:
    me = s.robots[i].pose
    return sum(
        1
        for j, rv in enumerate(s.robots)
        if j != i and within_range(me, rv.pose, params.m, params.w, params.metric)
    )


def neighbor_counts(poses: Sequence[Pose], params: ModelParams) -> Tuple[int, ...]:
    counts = [0] * len(poses)
    for i, j in itertools.combinations(range(len(poses)), 2):
        if within_range(poses[i], poses[j], params.m, params.w, params.metric):
            counts[i] += 1
            counts[j] += 1
    return tuple(counts)


def communication_components(poses: Sequence[Pose], params: ModelParams) -> List[List[int]]:
    """Connected components of the in-range graph, each sorted, ordered by first member"""
    unseen = set(range(len(poses)))
    components = []
    while unseen:
        start = min(unseen)
        unseen.discard(start)
        stack, members = [start], [start]
        while stack:
            i = stack.pop()
            for j in list(unseen):
                if within_range(poses[i], poses[j], params.m, params.w, params.metric):
                    unseen.discard(j)
                    stack.append(j)
                    members.append(j)
        components.append(sorted(members))
    return components


def all_connected(s: SwarmState, params: ModelParams) -> bool:
    if len(s.robots) <= 1:
        return True
    return len(communication_components(s.poses(), params)) == 1


def collision_free(s: SwarmState) -> bool:
    cells = [(rv.pose.x, rv.pose.y) for rv in s.robots]
    return len(set(cells)) == len(cells)


# ---------------------------------------------------------------------------
# Robot decisions
# ---------------------------------------------------------------------------

def robot_decision_legacy(s: SwarmState, i: int, params: ModelParams) -> List[RobotVarsLegacy]:
    """Turning steps never move, moving steps never turn"""
    rv = s.robots[i]
    k = neighbor_count(s, i, params)
    pose = rv.pose
    if rv.motion == Motion.DEFAULT and k < params.alpha:
        return [RobotVarsLegacy(Pose(pose.x, pose.y, rotate_dir(pose.dir, Turn.BACK)), Motion.SEARCHING)]
    if rv.motion == Motion.SEARCHING and k >= params.alpha:
        return sorted(
            RobotVarsLegacy(Pose(pose.x, pose.y, rotate_dir(pose.dir, turn)), Motion.DEFAULT)
            for turn in (Turn.LEFT, Turn.RIGHT)
        )
    return [RobotVarsLegacy(step_cell(pose, params.m), rv.motion)]


def robot_decision_new(s: SwarmState, i: int, params: ModelParams) -> List[RobotVarsNew]:
    """Orient, then move (or stay and turn aside when the target cell is taken)"""
    rv = s.robots[i]
    k = neighbor_count(s, i, params)
    prev = rv.last_num_con
    pose = rv.pose

    if k < prev and k < params.alpha:
        headings = [rotate_dir(pose.dir, Turn.BACK)]
    elif k > prev:
        headings = [rotate_dir(pose.dir, turn) for turn in (Turn.LEFT, Turn.RIGHT, Turn.BACK)]
    else:
        headings = [pose.dir]

    occupied = {(other.pose.x, other.pose.y) for j, other in enumerate(s.robots) if j != i}
    branches = set()
    for heading in headings:
        target = step_cell(Pose(pose.x, pose.y, heading), params.m)
        if (target.x, target.y) in occupied:
            for turn in (Turn.LEFT, Turn.RIGHT):
                branches.add(RobotVarsNew(Pose(pose.x, pose.y, rotate_dir(heading, turn)), k))
        else:
            branches.add(RobotVarsNew(target, k))
    return sorted(branches)


def robot_decision(s: SwarmState, i: int, params: ModelParams) -> List[RobotVars]:
    if params.abstraction == Abstraction.LEGACY:
        return robot_decision_legacy(s, i, params)
    return robot_decision_new(s, i, params)


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------

def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def initial_scheduler(params: ModelParams) -> SchedulerState:
    if params.mode == Mode.NONSTRICT:
        return SchedulerState(0, params.all_mask)
    return SchedulerState(0, 0)


def schedule(s: SwarmState, params: ModelParams) -> List[Tuple[int, SchedulerState]]:
    """Which robot may act next, paired with the scheduler state after it acts"""
    sched = s.sched
    if params.mode == Mode.STRICT:
        return [(sched.turn, SchedulerState((sched.turn + 1) % params.r, 0))]
    if params.mode == Mode.NONSTRICT:
        choices = []
        for robot in range(params.r):
            if sched.remaining >> robot & 1:
                rest = sched.remaining & ~(1 << robot) or params.all_mask
                choices.append((robot, SchedulerState(_lowest_bit(rest), rest)))
        return choices
    if params.mode == Mode.FAIR:
        return [(robot, sched) for robot in range(params.r)]
    return [(ALL_ROBOTS, sched)]


def global_successors(s: SwarmState, params: ModelParams) -> List[Tuple[SwarmState, int]]:
    """Every (successor, mover) pair, deduplicated and in a fixed order"""
    successors = set()
    for mover, next_sched in schedule(s, params):
        if mover == ALL_ROBOTS:
            per_robot = [robot_decision(s, i, params) for i in range(params.r)]
            for combo in itertools.product(*per_robot):
                successors.add((SwarmState(tuple(combo), next_sched), mover))
            continue
        for branch in robot_decision(s, mover, params):
            robots = s.robots[:mover] + (branch,) + s.robots[mover + 1:]
            successors.add((SwarmState(robots, next_sched), mover))
    return sorted(successors)


# ---------------------------------------------------------------------------
# State-space accounting
# ---------------------------------------------------------------------------

def signature(params: ModelParams, materialize_random: bool = True) -> VariableSignature:
    """Domain ledger of the encoding; random variables only when materialized"""
    m, r = params.m, params.r
    aux_name = "motion" if params.abstraction == Abstraction.LEGACY else "last_num_con"
    aux_size = _aux_domain(params.abstraction, r)
    robot_vars = {"x": m, "y": m, "direction": HEADINGS, aux_name: aux_size}

    global_vars: Dict[str, int] = {}
    if params.mode == Mode.STRICT:
        global_vars["turn"] = r
    elif params.mode == Mode.NONSTRICT:
        global_vars["turn"] = r
        global_vars["remaining"] = (1 << r) - 1
    elif params.mode == Mode.FAIR and params.abstraction == Abstraction.NEW:
        global_vars["selector"] = r

    if materialize_random:
        if params.abstraction == Abstraction.NEW:
            global_vars["random_turn"] = 3
            global_vars["random_move"] = 2
        elif params.encoding == Encoding.RELATIVE:
            global_vars["random"] = 2

    if params.encoding == Encoding.RELATIVE:
        return VariableSignature(
            robot_vars=robot_vars,
            robot_count=r - 1,
            reference_vars={aux_name: aux_size},
            global_vars=global_vars,
        )
    return VariableSignature(robot_vars=robot_vars, robot_count=r, global_vars=global_vars)


def state_space_size(sig: VariableSignature) -> int:
    return (
        prod(sig.robot_vars.values()) ** sig.robot_count
        * prod(sig.reference_vars.values())
        * prod(sig.global_vars.values())
    )


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

def make_state(params: ModelParams, poses: Sequence[Pose], aux: Optional[Sequence[int]] = None,
               sched: Optional[SchedulerState] = None) -> SwarmState:
    """Build a state; aux defaults to motion=default / last_num_con = current counts"""
    poses = tuple(Pose(p[0], p[1], Direction(p[2])) for p in poses)
    if params.abstraction == Abstraction.LEGACY:
        values = aux if aux is not None else [Motion.DEFAULT] * len(poses)
        robots = tuple(RobotVarsLegacy(p, Motion(v)) for p, v in zip(poses, values))
    else:
        values = aux if aux is not None else neighbor_counts(poses, params)
        robots = tuple(RobotVarsNew(p, int(v)) for p, v in zip(poses, values))
    return SwarmState(robots, sched if sched is not None else initial_scheduler(params))


def _explicit_states(params: ModelParams) -> List[SwarmState]:
    states = []
    for spec in params.init.states:
        poses = [Pose(rb.x, rb.y, rb.dir) for rb in spec]
        states.append(make_state(params, poses, [rb.aux for rb in spec]))
    return list(dict.fromkeys(states))


def iter_pose_tuples(params: ModelParams, fixed_first: Optional[Pose] = None) -> Iterator[Tuple[Pose, ...]]:
    """Every placement allowed by the abstraction, optionally pinning robot 0"""
    poses = all_poses(params.m)
    heads = [fixed_first] if fixed_first is not None else poses
    for first in heads:
        for rest in itertools.product(poses, repeat=params.r - 1):
            placement = (first,) + rest
            if params.abstraction == Abstraction.NEW:
                cells = {(p.x, p.y) for p in placement}
                if len(cells) != len(placement):
                    continue
            yield placement


def _iter_initial(params: ModelParams, fixed_first: Optional[Pose] = None) -> Iterator[SwarmState]:
    if params.init.kind == InitKind.EXPLICIT:
        yield from _explicit_states(params)
        return
    for placement in iter_pose_tuples(params, fixed_first):
        state = make_state(params, placement)
        if params.init.kind == InitKind.CONNECTED and not all_connected(state, params):
            continue
        yield state


def _non_empty(states: Iterator[SwarmState], params: ModelParams) -> Iterator[SwarmState]:
    try:
        first = next(states)
    except StopIteration:
        raise ConfigurationError(f"initial constraint '{params.init.kind.value}' selects no state for {params.label()}")
    return itertools.chain([first], states)


def initial_states(params: ModelParams) -> Iterator[SwarmState]:
    """Enumerate the initial set of the global encoding (raises when it is empty)"""
    return _non_empty(_iter_initial(params), params)


def initial_states_pinned(params: ModelParams, reference: Pose) -> Iterator[SwarmState]:
    """Initial states whose robot 0 sits at `reference` (explicit lists are not filtered)"""
    return _non_empty(_iter_initial(params, fixed_first=reference), params)


def is_initial(s: SwarmState, params: ModelParams) -> bool:
    if len(s.robots) != params.r:
        return False
    if params.init.kind == InitKind.EXPLICIT:
        return s in set(_explicit_states(params))
    if s.sched != initial_scheduler(params):
        return False
    if params.abstraction == Abstraction.LEGACY:
        if any(rv.motion != Motion.DEFAULT for rv in s.robots):
            return False
    else:
        if not collision_free(s):
            return False
        if tuple(rv.last_num_con for rv in s.robots) != neighbor_counts(s.poses(), params):
            return False
    if params.init.kind == InitKind.CONNECTED and not all_connected(s, params):
        return False
    return True


def reference_verdict(m: int, r: int) -> Optional[bool]:
    """Verdict pattern reported for F all_connected with alpha=1, w=1, strict turns, legacy rules"""
    return {(2, 3): True, (3, 3): True, (4, 3): True, (5, 2): True, (5, 3): False}.get((m, r))
