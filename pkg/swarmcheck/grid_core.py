"""
Toroidal grid geometry for swarmcheck

Coordinates: x grows eastward, y grows northward, both taken modulo m.
Headings are numbered clockwise (N=0, E=1, S=2, W=3). The quarter-turn
rotation used everywhere is the "reference turned n -> e" row of the
reframing table: (x, y) -> (m - y, x) with headings shifted one step
counterclockwise.
"""

import math
from enum import Enum, IntEnum
from typing import Iterator, List, NamedTuple, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator

METRICS = ("chebyshev", "manhattan", "euclidean")


class Direction(IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3

    @property
    def glyph(self) -> str:
        return "^>v<"[self]


class Turn(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    BACK = "back"


class RefChange(str, Enum):
    """Heading change of the reference robot, seen in its own frame"""
    N_TO_E = "n->e"
    N_TO_S = "n->s"
    N_TO_W = "n->w"


# Quarter-turn offsets, clockwise
_TURN_OFFSET = {Turn.RIGHT: 1, Turn.BACK: 2, Turn.LEFT: 3}
_CHANGE_QUARTERS = {RefChange.N_TO_E: 1, RefChange.N_TO_S: 2, RefChange.N_TO_W: 3}
_STEP = {Direction.N: (0, 1), Direction.E: (1, 0), Direction.S: (0, -1), Direction.W: (-1, 0)}


class GridConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int

    @field_validator("m")
    @classmethod
    def _at_least_two(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"grid side must be >= 2, got {value}")
        return value

    def cells(self) -> Iterator[Tuple[int, int]]:
        for x in range(self.m):
            for y in range(self.m):
                yield (x, y)


class Pose(NamedTuple):
    x: int
    y: int
    dir: Direction

    def __str__(self) -> str:
        return f"(({self.x},{self.y}),{self.dir.name})"


Cell = Union[Tuple[int, int], Pose]
ORIGIN = Pose(0, 0, Direction.N)


class FrameTransform(NamedTuple):
    """k quarter turns (n -> e row each), then a translation modulo m"""
    rotation: int
    dx: int
    dy: int


IDENTITY = FrameTransform(0, 0, 0)


def torus_wrap(v: int, m: int) -> int:
    return v % m


def _axis_gap(a: int, b: int, m: int) -> int:
    d = abs(a - b) % m
    return min(d, m - d)


def toroidal_distance(a: Cell, b: Cell, m: int, metric: str = "chebyshev") -> Union[int, float]:
    """Shortest wrap-around distance between two cells under the given metric"""
    gx = _axis_gap(a[0], b[0], m)
    gy = _axis_gap(a[1], b[1], m)
    if metric == "chebyshev":
        return max(gx, gy)
    if metric == "manhattan":
        return gx + gy
    if metric == "euclidean":
        return math.hypot(gx, gy)
    raise ValueError(f"unknown metric '{metric}'")


def within_range(a: Cell, b: Cell, m: int, w: int, metric: str = "chebyshev") -> bool:
    gx = _axis_gap(a[0], b[0], m)
    gy = _axis_gap(a[1], b[1], m)
    if metric == "chebyshev":
        return gx <= w and gy <= w
    if metric == "manhattan":
        return gx + gy <= w
    if metric == "euclidean":
        return gx * gx + gy * gy <= w * w
    raise ValueError(f"unknown metric '{metric}'")


def step_cell(p: Pose, m: int) -> Pose:
    """Advance one cell along the pose heading"""
    dx, dy = _STEP[p.dir]
    return Pose((p.x + dx) % m, (p.y + dy) % m, p.dir)


def rotate_dir(dir: Direction, kind: Turn) -> Direction:
    return Direction((dir + _TURN_OFFSET[Turn(kind)]) % 4)


def turn_for_change(change: RefChange) -> Turn:
    """The turn of the reference that produces the given heading change"""
    return {RefChange.N_TO_E: Turn.RIGHT, RefChange.N_TO_S: Turn.BACK, RefChange.N_TO_W: Turn.LEFT}[RefChange(change)]


def change_for_heading(dir: Direction) -> Optional[RefChange]:
    """Table row for a reference that now faces `dir` (None when still North)"""
    return {Direction.E: RefChange.N_TO_E, Direction.S: RefChange.N_TO_S, Direction.W: RefChange.N_TO_W}.get(Direction(dir))


def _rotate_cell(x: int, y: int, k: int, m: int) -> Tuple[int, int]:
    k %= 4
    if k == 0:
        return (x % m, y % m)
    if k == 1:
        return ((m - y) % m, x % m)
    if k == 2:
        return ((m - x) % m, (m - y) % m)
    return (y % m, (m - x) % m)


def reframe_point(pt: Cell, m: int, change: RefChange) -> Tuple[int, int]:
    """Location change of another robot after the reference changed heading"""
    return _rotate_cell(pt[0], pt[1], _CHANGE_QUARTERS[RefChange(change)], m)


def reframe_dir(dir: Direction, change: RefChange) -> Direction:
    """Heading change of another robot after the reference changed heading"""
    return Direction((dir - _CHANGE_QUARTERS[RefChange(change)]) % 4)


def reframe_pose(p: Pose, m: int, change: RefChange) -> Pose:
    x, y = reframe_point(p, m, change)
    return Pose(x, y, reframe_dir(p.dir, change))


def shift_pose(p: Pose, dx: int, dy: int, m: int) -> Pose:
    return Pose((p.x + dx) % m, (p.y + dy) % m, p.dir)


def apply_transform(t: FrameTransform, p: Pose, m: int) -> Pose:
    x, y = _rotate_cell(p.x, p.y, t.rotation, m)
    return Pose((x + t.dx) % m, (y + t.dy) % m, Direction((p.dir - t.rotation) % 4))


def compose_transform(t1: FrameTransform, t2: FrameTransform, m: int) -> FrameTransform:
    """The transform applying t2 first, then t1"""
    vx, vy = _rotate_cell(t2.dx, t2.dy, t1.rotation, m)
    return FrameTransform((t1.rotation + t2.rotation) % 4, (vx + t1.dx) % m, (vy + t1.dy) % m)


def invert_transform(t: FrameTransform, m: int) -> FrameTransform:
    k = (-t.rotation) % 4
    vx, vy = _rotate_cell(t.dx, t.dy, k, m)
    return FrameTransform(k, (-vx) % m, (-vy) % m)


def transform_fixing(p: Pose, m: int) -> FrameTransform:
    """The unique transform sending pose p to ((0,0),N)"""
    k = int(p.dir)
    vx, vy = _rotate_cell(p.x, p.y, k, m)
    return FrameTransform(k, (-vx) % m, (-vy) % m)


def transform_placing(p: Pose, m: int) -> FrameTransform:
    """The unique transform sending ((0,0),N) to pose p"""
    return FrameTransform((-int(p.dir)) % 4, p.x % m, p.y % m)


def all_transforms(m: int) -> List[FrameTransform]:
    return [FrameTransform(k, dx, dy) for k in range(4) for dx in range(m) for dy in range(m)]


def all_poses(m: int) -> List[Pose]:
    return [Pose(x, y, d) for x, y in GridConfig(m=m).cells() for d in Direction]
