"""
Command-line experiment runner for swarmcheck

Commands: check (default), quotient, agreement, frontier, emit-smv.
Robots are named A, B, C, ... in traces (robot 0 is A, the reference robot
of the relative encoding); lowercase letters mark robots cut off from the
main communication group.

Exit codes: 0 holds/pass, 1 fails, 2 inconclusive, 64 usage or configuration error.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError

import config
from swarmcheck import (
    ConfigurationError,
    DomainParseError,
    PropertyParseError,
    ReplayError,
    UnsupportedConfiguration,
)
from swarmcheck.alpha_model import (
    Abstraction,
    Encoding,
    InitialConstraint,
    InitKind,
    ModelParams,
    Mode,
    RobotSpec,
    reference_verdict,
)
from swarmcheck.checker import (
    Verdict,
    check,
    frontier_of,
    quotient_check,
    scale_frontier,
    total_states,
    verdict_agreement,
)
from swarmcheck.grid_core import ORIGIN, METRICS
from swarmcheck.properties import Property, parse_property
from swarmcheck.rendering import TRACE_FORMATS, render_trace
from swarmcheck.smv_export import emit_smv
from swarmcheck.traces import lift_lasso, validate_trace

logger = logging.getLogger("swarmcheck")

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

EXIT_FOR = {"holds": EXIT_HOLDS, "fails": EXIT_FAILS, "inconclusive": EXIT_INCONCLUSIVE}
DEFAULT_PROPERTY = "F all_connected"


class RunRecord(BaseModel):
    """One CSV row"""
    m: int
    r: int
    alpha: int
    range: int
    mode: str
    abstraction: str
    encoding: str
    total_states: int
    reachable_states: int
    transitions: int
    verdict: str
    time_ms: int
    peak_states: int
    budget_hit: bool


CSV_FIELDS = list(RunRecord.model_fields)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"❌ {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="swarmcheck",
        description="Explicit-state model checking of the Alpha swarm algorithm on a torus. "
                    "Traces name robots A, B, C...; lowercase = disconnected from the main group.",
    )
    parser.add_argument("command", nargs="?", default="check",
                        choices=["check", "quotient", "agreement", "frontier", "emit-smv"])
    parser.add_argument("--grid", type=int, default=4, help="grid side m")
    parser.add_argument("--robots", type=int, default=3, help="robot count r")
    parser.add_argument("--alpha", type=int, default=config.config.DEFAULT_ALPHA)
    parser.add_argument("--range", type=int, default=config.config.DEFAULT_RANGE, dest="w",
                        help="communication range w")
    parser.add_argument("--metric", choices=METRICS, default=None)
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.STRICT.value)
    parser.add_argument("--abstraction", choices=[a.value for a in Abstraction], default=Abstraction.LEGACY.value)
    parser.add_argument("--encoding", choices=[e.value for e in Encoding], default=Encoding.GLOBAL.value)
    parser.add_argument("--property", default=DEFAULT_PROPERTY, help='e.g. "F all_connected", "G collision_free"')
    parser.add_argument("--init", default="all", help="all | connected | file=PATH (JSON list of states)")
    parser.add_argument("--budget-states", type=int, default=None)
    parser.add_argument("--budget-seconds", type=float, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--sweep", default=None, help="grid=A..B or robots=A..B")
    parser.add_argument("--csv", default=None, metavar="PATH", help="append result rows to PATH")
    parser.add_argument("--trace", nargs=2, metavar=("FORMAT", "PATH"), default=None,
                        help="write the witness as ascii or json")
    parser.add_argument("--lift", action="store_true", help="lift relative witnesses to the world frame")
    parser.add_argument("--emit-smv", default=None, metavar="PATH", help="also write the SMV model")
    parser.add_argument("--json", action="store_true", help="print a JSON report instead of CSV")
    return parser


# ---------------------------------------------------------------------------
# Argument conversion
# ---------------------------------------------------------------------------

def parse_range(text: str) -> List[int]:
    low, sep, high = text.partition("..")
    try:
        start, stop = (int(low), int(high)) if sep else (int(low), int(low))
    except ValueError:
        raise ConfigurationError(f"malformed range '{text}', expected A..B")
    if stop < start:
        raise ConfigurationError(f"empty range '{text}'")
    return list(range(start, stop + 1))


def parse_sweep(text: str) -> Tuple[str, List[int]]:
    name, sep, values = text.partition("=")
    if not sep or name not in ("grid", "robots"):
        raise ConfigurationError(f"--sweep expects grid=A..B or robots=A..B, got '{text}'")
    return name, parse_range(values)


def load_initial(text: str) -> InitialConstraint:
    if text in (InitKind.ALL.value, InitKind.CONNECTED.value):
        return InitialConstraint(kind=InitKind(text))
    if not text.startswith("file="):
        raise ConfigurationError(f"--init expects all, connected or file=PATH, got '{text}'")
    path = Path(text[len("file="):])
    try:
        records = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read initial states from {path}: {e}")
    try:
        states = tuple(tuple(RobotSpec(**robot) for robot in state) for state in records)
        return InitialConstraint(kind=InitKind.EXPLICIT, states=states)
    except (TypeError, ValidationError) as e:
        raise ConfigurationError(f"malformed initial states in {path}: {e}")


def params_from_args(args: argparse.Namespace) -> ModelParams:
    return ModelParams(
        m=args.grid,
        r=args.robots,
        alpha=args.alpha,
        w=args.w,
        abstraction=Abstraction(args.abstraction),
        mode=Mode(args.mode),
        encoding=Encoding(args.encoding),
        metric=args.metric or config.config.DEFAULT_METRIC,
        init=load_initial(args.init),
    )


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

def make_record(params: ModelParams, verdict: Verdict) -> RunRecord:
    stats = verdict.stats
    return RunRecord(
        m=params.m,
        r=params.r,
        alpha=params.alpha,
        range=params.w,
        mode=params.mode.value,
        abstraction=params.abstraction.value,
        encoding=params.encoding.value,
        total_states=total_states(params),
        reachable_states=stats.reachable_states,
        transitions=stats.transitions,
        verdict=verdict.result,
        time_ms=stats.elapsed_ms,
        peak_states=stats.peak_states,
        budget_hit=stats.budget_hit,
    )


def append_csv(path: Path, records: Sequence[RunRecord]) -> None:
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
        if fresh:
            writer.writeheader()
        for record in records:
            writer.writerow(record.model_dump())


def print_csv(records: Sequence[RunRecord]) -> None:
    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record.model_dump())


def report_divergence(params: ModelParams, prop: Property, verdict: Verdict) -> None:
    """Compare against the reported verdict pattern where one exists"""
    expected = reference_verdict(params.m, params.r)
    comparable = (
        expected is not None
        and str(prop) == DEFAULT_PROPERTY
        and params.alpha == 1 and params.w == 1
        and params.mode == Mode.STRICT
        and params.abstraction == Abstraction.LEGACY
        and params.init.kind == InitKind.ALL
        and verdict.result != "inconclusive"
    )
    if comparable and (verdict.result == "holds") != expected:
        logger.warning(
            f"⚠️  {prop} {verdict.result} for m={params.m} r={params.r}, reported pattern says "
            f"{'holds' if expected else 'fails'}; the connectivity radius interpretation "
            f"(metric={params.metric}, w={params.w}) is the likely cause"
        )


def write_witness(verdict: Verdict, params: ModelParams, prop: Property, fmt: str, path: Path, lift: bool) -> None:
    trace, trace_params = verdict.witness, params
    if lift and params.encoding == Encoding.RELATIVE:
        trace = lift_lasso(trace, ORIGIN, params)
        trace_params = params.replace(encoding=Encoding.GLOBAL)
    result = validate_trace(trace, trace_params, prop)
    if not result.ok:
        logger.error(f"❌ witness rejected at step {result.step}: {result.reason}")
    path.write_text(render_trace(trace, trace_params, fmt))
    logger.info(f"✅ witness ({len(trace)} states) written to {path}")


def _sweep_params(base: ModelParams, name: str, value: int) -> ModelParams:
    if name == "grid":
        return base.replace(m=value)
    if base.init.kind == InitKind.EXPLICIT:
        raise ConfigurationError("robot sweeps need --init all or connected")
    return base.replace(r=value, alpha=min(base.alpha, value - 1), init=InitialConstraint(kind=base.init.kind))


def run(args: argparse.Namespace) -> int:
    """check command: one run or a sweep, rows to CSV/stdout, optional witness and SMV"""
    if args.trace and args.trace[0] not in TRACE_FORMATS:
        raise ConfigurationError(f"--trace FORMAT must be one of {', '.join(TRACE_FORMATS)}, got '{args.trace[0]}'")
    base = params_from_args(args)
    prop = parse_property(args.property)
    runs = [base]
    if args.sweep:
        name, values = parse_sweep(args.sweep)
        runs = [_sweep_params(base, name, value) for value in values]

    records, codes = [], []
    for params in runs:
        verdict = check(params, prop, budget_states=args.budget_states,
                        budget_seconds=args.budget_seconds, workers=args.workers)
        report_divergence(params, prop, verdict)
        records.append(make_record(params, verdict))
        codes.append(EXIT_FOR[verdict.result])
        if args.trace and verdict.witness is not None:
            fmt, target = args.trace
            path = Path(target)
            if len(runs) > 1:
                path = path.with_name(f"{path.stem}_m{params.m}_r{params.r}{path.suffix}")
            write_witness(verdict, params, prop, fmt, path, args.lift)
        if args.emit_smv:
            emit_smv_cmd(params, Path(args.emit_smv), prop)

    if args.csv:
        append_csv(Path(args.csv), records)
    if args.json:
        print(json.dumps([record.model_dump() for record in records], indent=2))
    elif not args.csv:
        print_csv(records)

    if EXIT_INCONCLUSIVE in codes:
        return EXIT_INCONCLUSIVE
    return max(codes)


def emit_smv_cmd(params: ModelParams, path: Path, prop: Optional[Property] = None) -> int:
    path.write_text(emit_smv(params, prop))
    logger.info(f"✅ SMV model written to {path}")
    return EXIT_HOLDS


def quotient_check_cmd(params: ModelParams, as_json: bool = False, budget_states: Optional[int] = None) -> int:
    report = quotient_check(params, budget_states=budget_states)
    if as_json:
        print(report.model_dump_json(indent=2))
    else:
        print(f"{'pass' if report.passed else 'FAIL'} {report.params}: "
              f"{report.global_reachable} global / {report.relative_reachable} relative = {report.ratio:g}x")
    return EXIT_HOLDS if report.passed else EXIT_FAILS


def agreement_cmd(params: ModelParams, prop: Property, as_json: bool = False,
                  budget_states: Optional[int] = None, budget_seconds: Optional[float] = None) -> int:
    report = verdict_agreement(params, prop, budget_states=budget_states, budget_seconds=budget_seconds)
    if as_json:
        print(json.dumps({
            "status": report.status,
            "global": report.global_verdict.result,
            "relative": report.relative_verdict.result,
        }, indent=2))
    else:
        print(f"{report.status}: global {report.global_verdict.result}, relative {report.relative_verdict.result}")
    if report.status == "untested":
        return EXIT_INCONCLUSIVE
    return EXIT_HOLDS if report.agree else EXIT_FAILS


def frontier_cmd(params: ModelParams, grid_sizes: Sequence[int], budget_states: Optional[int] = None,
                 csv_path: Optional[Path] = None) -> int:
    rows = scale_frontier(params, grid_sizes, budget_states=budget_states)
    fields = list(rows[0].model_dump()) if rows else []
    if csv_path is not None:
        fresh = not csv_path.exists() or csv_path.stat().st_size == 0
        with csv_path.open("a", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=fields)
            if fresh:
                writer.writeheader()
            writer.writerows(row.model_dump() for row in rows)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(row.model_dump() for row in rows)
    logger.info(f"🔍 frontier: global m={frontier_of(rows, Encoding.GLOBAL)}, "
                f"relative m={frontier_of(rows, Encoding.RELATIVE)}")
    return EXIT_HOLDS


def setup_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, config.config.LOG_LEVEL.upper(), logging.INFO),
        format="%(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    for warning in config.Config.validate():
        logger.warning(f"⚠️  {warning}")

    try:
        if args.command == "check":
            return run(args)
        params = params_from_args(args)
        if args.command == "emit-smv":
            if not args.emit_smv:
                raise ConfigurationError("emit-smv needs --emit-smv PATH")
            return emit_smv_cmd(params, Path(args.emit_smv), parse_property(args.property))
        if args.command == "quotient":
            return quotient_check_cmd(params, args.json, args.budget_states)
        if args.command == "agreement":
            return agreement_cmd(params, parse_property(args.property), args.json,
                                 args.budget_states, args.budget_seconds)
        sizes = list(range(2, args.grid + 1))
        if args.sweep:
            name, sizes = parse_sweep(args.sweep)
            if name != "grid":
                raise ConfigurationError("frontier sweeps the grid size only (--sweep grid=A..B)")
        return frontier_cmd(params, sizes, args.budget_states, Path(args.csv) if args.csv else None)
    except (ConfigurationError, PropertyParseError, DomainParseError, UnsupportedConfiguration) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except ReplayError as e:
        logger.error(f"❌ {e}")
        return EXIT_FAILS


if __name__ == "__main__":
    sys.exit(main())
