"""
Fixed-width bit packing of swarm states

Each field gets the smallest bit width covering its domain. The relative
layout drops the reference pose, so its keys are strictly narrower than
the global ones for the same parameters.
"""

from typing import List, Tuple, Union

from swarmcheck.alpha_model import (
    Abstraction,
    Encoding,
    ModelParams,
    Mode,
    Motion,
    RobotVarsLegacy,
    RobotVarsNew,
    SchedulerState,
    SwarmState,
)
from swarmcheck.grid_core import Direction, Pose
from swarmcheck.symmetry import RelativeState

_DIRECTIONS = tuple(Direction)
_MOTIONS = tuple(Motion)


def bits_for(domain: int) -> int:
    return max(1, (domain - 1).bit_length())


class StateCodec:
    """Packs SwarmState (global) or RelativeState (relative) into one int"""

    def __init__(self, params: ModelParams):
        self.params = params
        self.relative = params.encoding == Encoding.RELATIVE
        self.legacy = params.abstraction == Abstraction.LEGACY
        self.coord_bits = bits_for(params.m)
        self.aux_bits = bits_for(2 if self.legacy else params.r)
        self.pose_bits = 2 * self.coord_bits + 2
        self.robot_bits = self.pose_bits + self.aux_bits
        self.turn_bits = bits_for(params.r) if params.mode in (Mode.STRICT, Mode.NONSTRICT) else 0
        self.remaining_bits = params.r if params.mode == Mode.NONSTRICT else 0

        self._coord_mask = (1 << self.coord_bits) - 1
        self._aux_mask = (1 << self.aux_bits) - 1
        self._turn_mask = (1 << self.turn_bits) - 1
        self._remaining_mask = (1 << self.remaining_bits) - 1

    @property
    def width(self) -> int:
        sched_bits = self.turn_bits + self.remaining_bits
        if self.relative:
            return self.aux_bits + (self.params.r - 1) * self.robot_bits + sched_bits
        return self.params.r * self.robot_bits + sched_bits

    def _pack_robot(self, key: int, rv) -> int:
        pose = rv.pose
        key = (key << self.coord_bits) | pose.x
        key = (key << self.coord_bits) | pose.y
        key = (key << 2) | pose.dir
        return (key << self.aux_bits) | rv[1]

    def encode(self, state: Union[SwarmState, RelativeState]) -> int:
        key = 0
        if self.relative:
            key = state.reference
            robots = state.others
        else:
            robots = state.robots
        for rv in robots:
            key = self._pack_robot(key, rv)
        if self.turn_bits:
            key = (key << self.turn_bits) | state.sched.turn
        if self.remaining_bits:
            key = (key << self.remaining_bits) | state.sched.remaining
        return key

    def _aux_value(self, raw: int):
        return _MOTIONS[raw] if self.legacy else raw

    def decode(self, key: int) -> Union[SwarmState, RelativeState]:
        remaining = 0
        turn = 0
        if self.remaining_bits:
            remaining = key & self._remaining_mask
            key >>= self.remaining_bits
        if self.turn_bits:
            turn = key & self._turn_mask
            key >>= self.turn_bits

        count = self.params.r - 1 if self.relative else self.params.r
        robots: List = []
        make = RobotVarsLegacy if self.legacy else RobotVarsNew
        for _ in range(count):
            aux = key & self._aux_mask
            key >>= self.aux_bits
            heading = key & 3
            key >>= 2
            y = key & self._coord_mask
            key >>= self.coord_bits
            x = key & self._coord_mask
            key >>= self.coord_bits
            robots.append(make(Pose(x, y, _DIRECTIONS[heading]), self._aux_value(aux)))
        robots.reverse()
        sched = SchedulerState(turn, remaining)

        if self.relative:
            return RelativeState(self._aux_value(key & self._aux_mask), tuple(robots), sched)
        return SwarmState(tuple(robots), sched)

    def field_layout(self) -> List[Tuple[str, int]]:
        """(field, bits) from most to least significant"""
        layout = []
        first = 1 if self.relative else 0
        if self.relative:
            layout.append(("reference.aux", self.aux_bits))
        for i in range(first, self.params.r):
            layout += [(f"robot{i}.x", self.coord_bits), (f"robot{i}.y", self.coord_bits),
                       (f"robot{i}.dir", 2), (f"robot{i}.aux", self.aux_bits)]
        if self.turn_bits:
            layout.append(("turn", self.turn_bits))
        if self.remaining_bits:
            layout.append(("remaining", self.remaining_bits))
        return layout
