"""
Counterexample traces: lasso representation, independent replay, JSON schema
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

from pydantic import BaseModel

from swarmcheck import ReplayError
from swarmcheck.alpha_model import (
    Abstraction,
    Encoding,
    ModelParams,
    Mode,
    Motion,
    SchedulerState,
    global_successors,
    is_initial,
    make_state,
)
from swarmcheck.grid_core import Direction, Pose
from swarmcheck.properties import Property, evaluate_atom
from swarmcheck.symmetry import (
    AnyState,
    RelativeState,
    as_global,
    canonicalize,
    is_relative_initial,
    lift_trace,
    relative_successors,
)

logger = logging.getLogger(__name__)


class TraceStep(NamedTuple):
    state: AnyState
    mover: Optional[int]  # robot acting on the transition that leaves this state


@dataclass
class LassoTrace:
    """prefix + loop; the last loop step leads back to loop[0]. Safety witnesses have no loop."""
    prefix: List[TraceStep] = field(default_factory=list)
    loop: List[TraceStep] = field(default_factory=list)
    encoding: Encoding = Encoding.GLOBAL

    @property
    def steps(self) -> List[TraceStep]:
        return self.prefix + self.loop

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)


class TraceCheck(BaseModel):
    ok: bool
    step: Optional[int] = None
    reason: str = ""


def _successors(state: AnyState, params: ModelParams):
    if isinstance(state, RelativeState):
        return relative_successors(state, params)
    return global_successors(state, params)


def _fail(step: int, reason: str) -> TraceCheck:
    return TraceCheck(ok=False, step=step, reason=reason)


def validate_trace(trace: LassoTrace, params: ModelParams, prop: Property) -> TraceCheck:
    """Re-derive every transition and the property-specific obligations of a witness"""
    steps = trace.steps
    if not steps:
        return _fail(0, "empty trace")

    first = steps[0].state
    starts = is_relative_initial(first, params) if isinstance(first, RelativeState) else is_initial(first, params)
    if not starts:
        return _fail(0, "first state is not initial")

    transitions = [(i, i + 1) for i in range(len(steps) - 1)]
    if trace.loop:
        transitions.append((len(steps) - 1, len(trace.prefix)))
    for src, dst in transitions:
        state, mover = steps[src]
        if mover is None:
            return _fail(src, "missing mover")
        if (steps[dst].state, mover) not in set(_successors(state, params)):
            return _fail(src, f"no transition with mover {mover} to step {dst}")

    holds = [evaluate_atom(prop.atom, step.state, params) for step in steps]
    loop_holds = holds[len(trace.prefix):]
    if prop.shape == "G":
        if all(holds):
            return _fail(len(steps) - 1, "property holds at every state of the safety witness")
        return TraceCheck(ok=True)

    if not trace.loop:
        return _fail(len(steps) - 1, "liveness witness needs a loop")
    if prop.shape == "F" and any(holds):
        return _fail(holds.index(True), "atom holds on the witness")
    if prop.shape == "GF" and any(loop_holds):
        return _fail(len(trace.prefix) + loop_holds.index(True), "atom holds inside the loop")
    if prop.shape == "FG" and all(loop_holds):
        return _fail(len(trace.prefix), "atom holds at every loop state")

    if params.mode == Mode.FAIR:
        movers = {step.mover for step in trace.loop}
        missing = sorted(set(range(params.r)) - movers)
        if missing:
            return _fail(len(trace.prefix), f"fairness: robots {missing} never move in the loop")
    return TraceCheck(ok=True)


def lift_lasso(trace: LassoTrace, ref_pose: Pose, params: ModelParams) -> LassoTrace:
    """
    Global lasso for a relative one: the loop is replayed until the lifted
    state at the loop boundary repeats (at most 4*m*m rounds).
    """
    global_params = params.replace(encoding=Encoding.GLOBAL)
    m = params.m
    if not trace.loop:
        lifted = lift_trace(trace.prefix, ref_pose, global_params)
        return LassoTrace([TraceStep(*s) for s in lifted], [], Encoding.GLOBAL)

    body = trace.prefix + trace.loop + [trace.loop[0]]
    lifted = lift_trace(body, ref_pose, global_params)
    prefix = [TraceStep(*s) for s in lifted[:len(trace.prefix)]]
    rounds = [[TraceStep(*s) for s in lifted[len(trace.prefix):-1]]]
    boundaries = [lifted[len(trace.prefix)][0]]
    current = lifted[-1][0]

    for _ in range(4 * m * m):
        if current in boundaries:
            start = boundaries.index(current)
            for earlier in rounds[:start]:
                prefix.extend(earlier)
            loop = [step for rnd in rounds[start:] for step in rnd]
            return LassoTrace(prefix, loop, Encoding.GLOBAL)
        boundaries.append(current)
        again = lift_trace(trace.loop + [trace.loop[0]], current.robots[0].pose, global_params)
        rounds.append([TraceStep(*s) for s in again[:-1]])
        current = again[-1][0]
    raise ReplayError(len(body), "lifted loop never returned to a boundary state")


def canonical_steps(trace: LassoTrace, m: int) -> List[RelativeState]:
    return [canonicalize(as_global(step.state), m) for step in trace.steps]


# ---------------------------------------------------------------------------
# JSON schema: {"prefix": [...], "loop": [...]} of
#   {"robots": [{"id", "x", "y", "dir", "vars"}], "turn", "remaining", "mover"}
# ---------------------------------------------------------------------------

def _state_record(step: TraceStep, params: ModelParams) -> Dict:
    s = as_global(step.state)
    robots = []
    for index, rv in enumerate(s.robots):
        if params.abstraction == Abstraction.LEGACY:
            variables = {"motion": Motion(rv[1]).name.lower()}
        else:
            variables = {"last_num_con": int(rv[1])}
        robots.append({"id": index, "x": rv.pose.x, "y": rv.pose.y, "dir": rv.pose.dir.name, "vars": variables})
    return {"robots": robots, "turn": s.sched.turn, "remaining": s.sched.remaining, "mover": step.mover}


def trace_to_dict(trace: LassoTrace, params: ModelParams) -> Dict:
    return {
        "params": json.loads(params.model_dump_json()),
        "encoding": trace.encoding.value,
        "prefix": [_state_record(step, params) for step in trace.prefix],
        "loop": [_state_record(step, params) for step in trace.loop],
    }


def trace_to_json(trace: LassoTrace, params: ModelParams) -> str:
    return json.dumps(trace_to_dict(trace, params), indent=2)


def _step_from_record(record: Dict, params: ModelParams, encoding: Encoding) -> TraceStep:
    robots = sorted(record["robots"], key=lambda rb: rb["id"])
    poses = [Pose(rb["x"], rb["y"], Direction[rb["dir"]]) for rb in robots]
    if params.abstraction == Abstraction.LEGACY:
        aux = [Motion[rb["vars"]["motion"].upper()] for rb in robots]
    else:
        aux = [rb["vars"]["last_num_con"] for rb in robots]
    state = make_state(params, poses, aux, SchedulerState(record["turn"], record["remaining"]))
    if encoding == Encoding.RELATIVE:
        state = canonicalize(state, params.m)
    return TraceStep(state, record["mover"])


def trace_from_json(text: str, params: ModelParams) -> LassoTrace:
    data = json.loads(text)
    encoding = Encoding(data.get("encoding", params.encoding.value))
    prefix = [_step_from_record(rec, params, encoding) for rec in data["prefix"]]
    loop = [_step_from_record(rec, params, encoding) for rec in data["loop"]]
    return LassoTrace(prefix, loop, encoding)
