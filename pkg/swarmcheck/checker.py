"""
Explicit-state verification engine for swarmcheck

Breadth-first reachability over packed state keys, safety checking,
fair-cycle (lasso) search for the F / GF / FG fragment through strongly
connected components, and the encoding cross-checks.
"""

import logging
import time
from array import array
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, Iterator, List, Literal, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import config
from swarmcheck import ConfigurationError
from swarmcheck.alpha_model import (
    Encoding,
    InitKind,
    ModelParams,
    Mode,
    global_successors,
    initial_states,
    signature,
    state_space_size,
)
from swarmcheck.codec import StateCodec
from swarmcheck.properties import Atom, Property, check_property_fits, evaluate_atom
from swarmcheck.symmetry import (
    canonicalize,
    frame_state,
    relative_initial_states,
    relative_successors,
)
from swarmcheck.traces import LassoTrace, TraceStep

logger = logging.getLogger(__name__)

Result = Literal["holds", "fails", "inconclusive"]


class SearchStats(BaseModel):
    reachable_states: int = 0
    initial_states: int = 0
    transitions: int = 0
    peak_states: int = 0
    elapsed_ms: int = 0
    budget_hit: bool = False
    note: str = ""


class Verdict(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    result: Result
    property: str
    witness: Optional[InstanceOf[LassoTrace]] = None
    stats: SearchStats = SearchStats()


class AgreementReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: Literal["identical verdicts", "different verdicts", "untested"]
    global_verdict: Verdict
    relative_verdict: Verdict

    @property
    def agree(self) -> Optional[bool]:
        if self.status == "untested":
            return None
        return self.status == "identical verdicts"


class QuotientReport(BaseModel):
    params: str
    global_reachable: int
    relative_reachable: int
    ratio: float
    cardinality_ok: bool
    canonical_sets_equal: bool
    bisimulation_ok: bool
    mismatched_state: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.cardinality_ok and self.canonical_sets_equal and self.bisimulation_ok


class FrontierRow(BaseModel):
    encoding: str
    m: int
    r: int
    reachable_states: int
    completed: bool
    elapsed_ms: int


# ---------------------------------------------------------------------------
# Reachability
# ---------------------------------------------------------------------------

def _successor_fn(params: ModelParams) -> Callable:
    if params.encoding == Encoding.RELATIVE:
        return relative_successors
    return global_successors


def _initial_iter(params: ModelParams) -> Iterator:
    if params.encoding == Encoding.RELATIVE:
        return relative_initial_states(params)
    return initial_states(params)


def _expand_chunk(params: ModelParams, keys: Sequence[int], atom: Optional[Atom]) -> List[List[Tuple[int, int, bool]]]:
    """(successor key, mover, atom truth) for every key; runs in worker processes"""
    codec = StateCodec(params)
    successors = _successor_fn(params)
    expanded = []
    for key in keys:
        state = codec.decode(key)
        row = []
        for succ, mover in successors(state, params):
            flag = evaluate_atom(atom, succ, params) if atom is not None else True
            row.append((codec.encode(succ), mover, flag))
        expanded.append(row)
    return expanded


def _expand_star(args) -> List[List[Tuple[int, int, bool]]]:
    return _expand_chunk(*args)


class StateGraph:
    """Explored states indexed in discovery order, with predecessor links"""

    def __init__(self, params: ModelParams):
        self.params = params
        self.codec = StateCodec(params)
        self.keys: List[int] = []
        self.index: Dict[int, int] = {}
        self.parent = array("q")
        self.parent_mover = array("b")
        self.holds = bytearray()
        self.edge_src = array("q")
        self.edge_dst = array("q")
        self.edge_mover = array("b")
        self.initial_count = 0
        self.transitions = 0
        self.budget_hit = False
        self.note = ""
        self.elapsed_ms = 0

    @property
    def count(self) -> int:
        return len(self.keys)

    def add(self, key: int, parent: int, mover: int, flag: bool) -> Tuple[int, bool]:
        idx = self.index.get(key)
        if idx is not None:
            return idx, False
        idx = len(self.keys)
        self.index[key] = idx
        self.keys.append(key)
        self.parent.append(parent)
        self.parent_mover.append(mover)
        self.holds.append(1 if flag else 0)
        return idx, True

    def state(self, idx: int):
        return self.codec.decode(self.keys[idx])

    def states(self) -> Iterator:
        for key in self.keys:
            yield self.codec.decode(key)

    def path_to(self, idx: int) -> List[Tuple[int, Optional[int]]]:
        """(node, mover leaving it) from an initial state up to idx (mover None at idx)"""
        path = [(idx, None)]
        while self.parent[idx] >= 0:
            mover = self.parent_mover[idx]
            idx = self.parent[idx]
            path.append((idx, mover))
        path.reverse()
        return path

    def stats(self) -> SearchStats:
        return SearchStats(
            reachable_states=self.count,
            initial_states=self.initial_count,
            transitions=self.transitions,
            peak_states=self.count,
            elapsed_ms=self.elapsed_ms,
            budget_hit=self.budget_hit,
            note=self.note,
        )


def _chunks(items: Sequence[int], size: int) -> Iterator[Sequence[int]]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def explore(params: ModelParams, atom: Optional[Atom] = None, record_edges: bool = False,
            budget_states: Optional[int] = None, budget_seconds: Optional[float] = None,
            workers: Optional[int] = None) -> StateGraph:
    """Breadth-first exploration; counts and order do not depend on the worker count"""
    budget_states = budget_states if budget_states is not None else config.config.BUDGET_STATES
    budget_seconds = budget_seconds if budget_seconds is not None else config.config.BUDGET_SECONDS
    workers = workers if workers is not None else config.config.WORKERS
    chunk_size = max(1, config.config.FRONTIER_CHUNK)

    graph = StateGraph(params)
    started = time.monotonic()
    logger.info(f"⏳ Exploring {params.label()}")

    def out_of_budget() -> bool:
        if graph.count > budget_states:
            graph.budget_hit = True
            graph.note = f"budget exhausted at {graph.count} states"
        elif budget_seconds and time.monotonic() - started > budget_seconds:
            graph.budget_hit = True
            graph.note = f"time budget of {budget_seconds}s exhausted at {graph.count} states"
        return graph.budget_hit

    frontier = []
    for state in _initial_iter(params):
        flag = evaluate_atom(atom, state, params) if atom is not None else True
        idx, fresh = graph.add(graph.codec.encode(state), -1, 0, flag)
        if fresh:
            frontier.append(idx)
        if out_of_budget():
            break
    graph.initial_count = graph.count

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and not graph.budget_hit:
            next_frontier = []
            slices = list(_chunks(frontier, chunk_size))
            jobs = [(params, [graph.keys[i] for i in piece], atom) for piece in slices]
            results = pool.map(_expand_star, jobs) if pool else map(_expand_star, jobs)
            for piece, expanded in zip(slices, results):
                for src, row in zip(piece, expanded):
                    for key, mover, flag in row:
                        graph.transitions += 1
                        idx, fresh = graph.add(key, src, mover, flag)
                        if fresh:
                            next_frontier.append(idx)
                        if record_edges:
                            graph.edge_src.append(src)
                            graph.edge_dst.append(idx)
                            graph.edge_mover.append(mover)
                if out_of_budget():
                    break
            frontier = next_frontier
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)

    graph.elapsed_ms = int((time.monotonic() - started) * 1000)
    if graph.budget_hit:
        logger.warning(f"⚠️  {graph.note} ({params.label()})")
    else:
        logger.info(f"✅ {graph.count} reachable states, {graph.transitions} transitions in {graph.elapsed_ms} ms")
    return graph


def enumerate_reachable(params: ModelParams, budget_states: Optional[int] = None,
                        budget_seconds: Optional[float] = None, workers: Optional[int] = None) -> StateGraph:
    return explore(params, budget_states=budget_states, budget_seconds=budget_seconds, workers=workers)


# ---------------------------------------------------------------------------
# Lasso search
# ---------------------------------------------------------------------------

class _Adjacency:
    """Out-edges grouped by source (CSR layout)"""

    def __init__(self, n: int, src: np.ndarray, dst: np.ndarray, mover: np.ndarray):
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=n)
        self.indptr = np.concatenate(([0], np.cumsum(counts))).tolist()
        self.dst = dst[order].tolist()
        self.mover = mover[order].tolist()

    def out(self, u: int) -> Iterator[Tuple[int, int]]:
        for k in range(self.indptr[u], self.indptr[u + 1]):
            yield self.dst[k], self.mover[k]


def _restricted_bfs(adj: _Adjacency, sources: Sequence[int], allowed: np.ndarray):
    """Distances and parents of a BFS that never leaves `allowed`"""
    n = len(allowed)
    allowed = allowed.tolist()
    dist = [-1] * n
    parent = [-1] * n
    parent_mover = [0] * n
    queue = deque()
    for s in sources:
        if allowed[s] and dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        for v, mover in adj.out(u):
            if allowed[v] and dist[v] < 0:
                dist[v] = dist[u] + 1
                parent[v] = u
                parent_mover[v] = mover
                queue.append(v)
    return np.array(dist, dtype=np.int64), parent, parent_mover


def _edge_path(adj: _Adjacency, start: int, within: Set[int],
               accept: Callable[[int, int, int], bool]) -> List[Tuple[int, int, int]]:
    """Shortest edge sequence from start (inside `within`) ending with an accepted edge"""
    back: Dict[int, Tuple[int, int]] = {start: (-1, 0)}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v, mover in adj.out(u):
            if v not in within:
                continue
            if accept(u, v, mover):
                edges = [(u, mover, v)]
                node = u
                while back[node][0] >= 0:
                    prev, prev_mover = back[node]
                    edges.append((prev, prev_mover, node))
                    node = prev
                edges.reverse()
                return edges
            if v not in back:
                back[v] = (u, mover)
                queue.append(v)
    raise RuntimeError("strongly connected component has no closing path")


def _find_lasso(graph: StateGraph, prop: Property) -> Optional[LassoTrace]:
    params = graph.params
    n = graph.count
    src = np.frombuffer(graph.edge_src, dtype=np.int64) if graph.edge_src else np.zeros(0, dtype=np.int64)
    dst = np.frombuffer(graph.edge_dst, dtype=np.int64) if graph.edge_dst else np.zeros(0, dtype=np.int64)
    mov = np.frombuffer(graph.edge_mover, dtype=np.int8).astype(np.int64) if graph.edge_mover else np.zeros(0, dtype=np.int64)
    holds = np.frombuffer(bytes(graph.holds), dtype=np.uint8).astype(bool)
    adj = _Adjacency(n, src, dst, mov)
    sources = range(graph.initial_count)

    if prop.shape == "F":
        dist, parent, parent_mover = _restricted_bfs(adj, sources, ~holds)
        cycle_mask = dist >= 0
        anchor_mask = cycle_mask
    else:
        dist, parent, parent_mover = _restricted_bfs(adj, sources, np.ones(n, dtype=bool))
        cycle_mask = ~holds if prop.shape == "GF" else np.ones(n, dtype=bool)
        anchor_mask = ~holds if prop.shape == "FG" else cycle_mask

    keep = cycle_mask[src] & cycle_mask[dst]
    ks, kd, km = src[keep], dst[keep], mov[keep]
    matrix = csr_matrix((np.ones(len(ks), dtype=np.int8), (ks, kd)), shape=(n, n))
    n_comp, labels = connected_components(matrix, directed=True, connection="strong")

    internal = labels[ks] == labels[kd]
    sizes = np.bincount(labels, minlength=n_comp)
    nontrivial = sizes > 1
    nontrivial[labels[ks[internal & (ks == kd)]]] = True

    if params.mode == Mode.FAIR:
        cover = np.zeros(n_comp, dtype=np.int64)
        for robot in range(params.r):
            comps = np.unique(labels[ks[internal & (km == robot)]])
            cover[comps] |= 1 << robot
        good = nontrivial & (cover == params.all_mask)
    else:
        good = nontrivial

    candidates = np.flatnonzero(cycle_mask & anchor_mask & good[labels] & (dist >= 0))
    if len(candidates) == 0:
        return None
    anchor = int(candidates[np.argmin(dist[candidates])])
    # nodes outside the cycle mask are singleton components, so `within` stays inside it
    within = set(np.flatnonzero(labels == labels[anchor]).tolist())

    loop_edges: List[Tuple[int, int, int]] = []
    covered = set()
    current = anchor
    required = range(params.r) if params.mode == Mode.FAIR else ()
    for robot in required:
        if robot in covered:
            continue
        path = _edge_path(adj, current, within, lambda u, v, mv, want=robot: mv == want)
        loop_edges += path
        covered.update(mv for _, mv, _ in path)
        current = path[-1][2]
    if current != anchor or not loop_edges:
        loop_edges += _edge_path(adj, current, within, lambda u, v, mv: v == anchor)

    prefix_nodes = []
    node = anchor
    while parent[node] >= 0:
        prefix_nodes.append((parent[node], parent_mover[node]))
        node = parent[node]
    prefix_nodes.reverse()

    prefix = [TraceStep(graph.state(u), mv) for u, mv in prefix_nodes]
    loop = [TraceStep(graph.state(u), mv) for u, mv, _ in loop_edges]
    return LassoTrace(prefix, loop, params.encoding)


def check(params: ModelParams, prop: Property, budget_states: Optional[int] = None,
          budget_seconds: Optional[float] = None, workers: Optional[int] = None) -> Verdict:
    """Does prop hold on every fair execution from every initial state?"""
    check_property_fits(prop, params)
    liveness = prop.shape != "G"
    graph = explore(params, atom=prop.atom, record_edges=liveness, budget_states=budget_states,
                    budget_seconds=budget_seconds, workers=workers)
    stats = graph.stats()
    if graph.budget_hit:
        return Verdict(result="inconclusive", property=str(prop), stats=stats)

    if not liveness:
        violating = graph.holds.find(0)
        if violating < 0:
            return Verdict(result="holds", property=str(prop), stats=stats)
        path = graph.path_to(violating)
        witness = LassoTrace([TraceStep(graph.state(u), mv) for u, mv in path], [], params.encoding)
        logger.info(f"❌ {prop} fails, safety witness of {len(witness)} states")
        return Verdict(result="fails", property=str(prop), witness=witness, stats=stats)

    witness = _find_lasso(graph, prop)
    if witness is None:
        logger.info(f"✅ {prop} holds on {params.label()}")
        return Verdict(result="holds", property=str(prop), stats=stats)
    logger.info(f"❌ {prop} fails, lasso with prefix {len(witness.prefix)} and loop {len(witness.loop)}")
    return Verdict(result="fails", property=str(prop), witness=witness, stats=stats)


# ---------------------------------------------------------------------------
# Encoding cross-checks
# ---------------------------------------------------------------------------

def verdict_agreement(params: ModelParams, prop: Property, budget_states: Optional[int] = None,
                      budget_seconds: Optional[float] = None, workers: Optional[int] = None) -> AgreementReport:
    run = dict(budget_states=budget_states, budget_seconds=budget_seconds, workers=workers)
    on_global = check(params.replace(encoding=Encoding.GLOBAL), prop, **run)
    on_relative = check(params.replace(encoding=Encoding.RELATIVE), prop, **run)
    if "inconclusive" in (on_global.result, on_relative.result):
        status = "untested"
    elif on_global.result == on_relative.result:
        status = "identical verdicts"
    else:
        status = "different verdicts"
        logger.warning(f"⚠️  encodings disagree on {prop} for {params.label()}")
    return AgreementReport(status=status, global_verdict=on_global, relative_verdict=on_relative)


def quotient_check(params: ModelParams, budget_states: Optional[int] = None,
                   workers: Optional[int] = None) -> QuotientReport:
    """Global reachable set vs. relative reachable set for a group-closed initial set"""
    if params.init.kind == InitKind.EXPLICIT:
        raise ConfigurationError("quotient check needs a group-closed initial constraint (all or connected)")
    m = params.m
    global_params = params.replace(encoding=Encoding.GLOBAL)
    relative_params = params.replace(encoding=Encoding.RELATIVE)
    global_graph = enumerate_reachable(global_params, budget_states=budget_states, workers=workers)
    relative_graph = enumerate_reachable(relative_params, budget_states=budget_states, workers=workers)
    if global_graph.budget_hit or relative_graph.budget_hit:
        raise ConfigurationError("quotient check ran out of budget; raise BUDGET_STATES")

    group_order = 4 * m * m
    cardinality_ok = global_graph.count == group_order * relative_graph.count

    rel_codec = relative_graph.codec
    canonical_keys = {rel_codec.encode(canonicalize(s, m)) for s in global_graph.states()}
    sets_equal = canonical_keys == set(relative_graph.keys)

    mismatch = None
    for rel in relative_graph.states():
        expected = sorted({(canonicalize(succ, m), mover)
                           for succ, mover in global_successors(frame_state(rel), params)})
        if relative_successors(rel, params) != expected:
            mismatch = repr(rel)
            break

    report = QuotientReport(
        params=params.label(),
        global_reachable=global_graph.count,
        relative_reachable=relative_graph.count,
        ratio=global_graph.count / max(1, relative_graph.count),
        cardinality_ok=cardinality_ok,
        canonical_sets_equal=sets_equal,
        bisimulation_ok=mismatch is None,
        mismatched_state=mismatch,
    )
    glyph = "✅" if report.passed else "❌"
    logger.info(f"{glyph} quotient {params.label()}: {report.global_reachable} / {report.relative_reachable} = {report.ratio:g}")
    return report


def scale_frontier(params: ModelParams, grid_sizes: Sequence[int], budget_states: Optional[int] = None,
                   workers: Optional[int] = None) -> List[FrontierRow]:
    """Largest grid each encoding finishes under the stored-state budget"""
    rows = []
    for encoding in (Encoding.GLOBAL, Encoding.RELATIVE):
        for m in grid_sizes:
            run_params = params.replace(m=m, encoding=encoding)
            graph = enumerate_reachable(run_params, budget_states=budget_states, workers=workers)
            rows.append(FrontierRow(encoding=encoding.value, m=m, r=params.r, reachable_states=graph.count,
                                    completed=not graph.budget_hit, elapsed_ms=graph.elapsed_ms))
            if graph.budget_hit:
                break
    return rows


def frontier_of(rows: Sequence[FrontierRow], encoding: Encoding) -> int:
    done = [row.m for row in rows if row.encoding == encoding.value and row.completed]
    return max(done) if done else 0


def total_states(params: ModelParams) -> int:
    return state_space_size(signature(params))


__all__ = [
    "AgreementReport",
    "FrontierRow",
    "QuotientReport",
    "SearchStats",
    "StateGraph",
    "Verdict",
    "check",
    "enumerate_reachable",
    "explore",
    "frontier_of",
    "quotient_check",
    "scale_frontier",
    "total_states",
    "verdict_agreement",
]
