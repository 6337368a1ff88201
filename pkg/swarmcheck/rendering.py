"""
Text rendering of witness traces

ASCII frames draw robot i as the letter chr(ord('A') + i) followed by its
heading glyph. Robots outside the largest communication group are drawn in
lowercase. Relative traces are drawn in the reference frame, so robot A is
always at (0,0) facing North.
"""

from typing import List, Literal

import numpy as np

from swarmcheck import ConfigurationError
from swarmcheck.alpha_model import ModelParams, SwarmState, communication_components
from swarmcheck.symmetry import as_global
from swarmcheck.traces import LassoTrace, TraceStep, trace_to_json

EMPTY = ".."
TRACE_FORMATS = ("ascii", "json")


def robot_letter(i: int) -> str:
    return chr(ord("A") + i)


def main_group(state: SwarmState, params: ModelParams) -> np.ndarray:
    """Boolean mask of the robots in the largest group (ties go to the group of robot 0)"""
    poses = state.poses()
    # ordered by first member: max keeps robot 0's group on a tie
    largest = max(communication_components(poses, params), key=len)
    mask = np.zeros(len(poses), dtype=bool)
    mask[largest] = True
    return mask


def render_grid(state, params: ModelParams) -> List[str]:
    """Rows from y = m-1 down to y = 0, two characters per cell"""
    s = as_global(state)
    m = params.m
    connected = main_group(s, params)
    cells = [[EMPTY] * m for _ in range(m)]
    for i, rv in enumerate(s.robots):
        pose = rv.pose
        letter = robot_letter(i) if connected[i] else robot_letter(i).lower()
        if cells[pose.y][pose.x] == EMPTY:
            cells[pose.y][pose.x] = letter + pose.dir.glyph
        else:
            cells[pose.y][pose.x] = cells[pose.y][pose.x][0] + "+"
    return [" ".join(cells[y]) for y in range(m - 1, -1, -1)]


def _frame_title(index: int, step: TraceStep, in_loop: bool) -> str:
    title = f"step {index}"
    if in_loop:
        title = "[loop] " + title
    if step.mover is not None:
        title += f" -> {robot_letter(step.mover) if step.mover >= 0 else 'all'} acts"
    return title


def render_ascii(trace: LassoTrace, params: ModelParams) -> str:
    frames = []
    for index, step in enumerate(trace.steps):
        in_loop = index >= len(trace.prefix)
        frames.append("\n".join([_frame_title(index, step, in_loop)] + render_grid(step.state, params)))
    if trace.loop:
        frames.append(f"(loop returns to step {len(trace.prefix)})")
    return "\n\n".join(frames) + "\n"


def render_trace(trace: LassoTrace, params: ModelParams, fmt: Literal["ascii", "json"] = "ascii") -> str:
    if fmt not in TRACE_FORMATS:
        raise ConfigurationError(f"unknown trace format '{fmt}', expected one of {', '.join(TRACE_FORMATS)}")
    if fmt == "json":
        return trace_to_json(trace, params)
    return render_ascii(trace, params)
