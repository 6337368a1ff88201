"""
SMV-dialect export of a swarm model

emit_smv writes one self-contained model per ModelParams: a robot module
for the abstraction, a reference module in the relative encoding, and a
main module holding the scheduler, the free random variables, the
connectivity macros and the LTL clause. parse_domains reads the VAR
declarations back so the declared domains can be checked against the
signature of the same parameters.
"""

import logging
import re
from typing import Dict, List, Optional, Tuple

import config
from swarmcheck import DomainParseError, UnsupportedConfiguration
from swarmcheck.alpha_model import (
    Abstraction,
    Encoding,
    InitKind,
    ModelParams,
    Mode,
    Motion,
    VariableSignature,
    make_state,
)
from swarmcheck.grid_core import Pose
from swarmcheck.properties import Atom, Property, check_property_fits, parse_property
from swarmcheck.symmetry import canonicalize

logger = logging.getLogger(__name__)

DEFAULT_PROPERTY = "F all_connected"

# offset of the cell ahead for each heading (N, E, S, W)
_AHEAD = ((0, 1), (1, 0), (0, -1), (-1, 0))
_SIDES = ("n", "e", "s", "w")


def _case(lhs: str, rows: List[Tuple[str, str]]) -> List[str]:
    out = [f"  {lhs} := case"]
    out += [f"      {cond} : {value};" for cond, value in rows]
    out.append("    esac;")
    return out


class SmvModel:
    """Text builder for one configuration"""

    def __init__(self, params: ModelParams, prop: Property):
        self.params = params
        self.prop = prop
        self.m = params.m
        self.legacy = params.abstraction == Abstraction.LEGACY
        self.relative = params.encoding == Encoding.RELATIVE
        # legacy fair interleaving is realized with processes, so no selector variable
        self.processes = self.legacy and params.mode == Mode.FAIR
        self.frame_in_main = self.processes and self.relative
        self.aux = "motion" if self.legacy else "last_num_con"
        self.robot_module = "RobotLegacy" if self.legacy else "RobotNew"
        self.reference_module = "ReferenceLegacy" if self.legacy else "ReferenceNew"

    # -- helpers ----------------------------------------------------------

    def _aux_decl(self) -> str:
        if self.legacy:
            return f"  motion : {{{Motion.DEFAULT.name.lower()}, {Motion.SEARCHING.name.lower()}}};"
        return f"  last_num_con : 0..{self.params.r - 1};"

    def _instance(self, i: int) -> str:
        if self.relative and i == 0:
            return "reference"
        return f"r{i}"

    def _pairs(self) -> List[Tuple[int, int]]:
        r = self.params.r
        return [(i, j) for i in range(r) for j in range(i + 1, r)]

    @staticmethod
    def _near(i: int, j: int) -> str:
        return f"near_{min(i, j)}_{max(i, j)}"

    def _within(self, i: int, j: int) -> str:
        w, metric = self.params.w, self.params.metric
        dx, dy = f"dx_{i}_{j}", f"dy_{i}_{j}"
        if metric == "manhattan":
            return f"{dx} + {dy} <= {w}"
        if metric == "euclidean":
            return f"{dx} * {dx} + {dy} * {dy} <= {w * w}"
        return f"max({dx}, {dy}) <= {w}"

    # -- modules ----------------------------------------------------------

    def _decision_defines(self, fixed_heading: bool) -> List[str]:
        alpha = self.params.alpha
        direction = "0" if fixed_heading else "direction"
        if self.legacy:
            return [
                f"  lost := motion = default & k < {alpha};",
                f"  found := motion = searching & k >= {alpha};",
            ]
        lines = [
            f"  drop := k < last_num_con & k < {alpha};",
            "  gain := k > last_num_con;",
        ]
        lines += _case("heading", [
            ("drop", f"({direction} + 2) mod 4"),
            ("gain & random_turn = 0", f"({direction} + 3) mod 4"),
            ("gain & random_turn = 1", f"({direction} + 1) mod 4"),
            ("gain", f"({direction} + 2) mod 4"),
            ("TRUE", direction),
        ])
        lines += _case("blocked", [
            ("heading = 0", "occ_n"),
            ("heading = 1", "occ_e"),
            ("heading = 2", "occ_s"),
            ("TRUE", "occ_w"),
        ])
        return lines

    def _aux_next(self) -> List[str]:
        if self.legacy:
            return _case("next(motion)", [
                ("active & lost", "searching"),
                ("active & found", "default"),
                ("TRUE", "motion"),
            ])
        return _case("next(last_num_con)", [("active", "k"), ("TRUE", "last_num_con")])

    def _robot_args(self) -> List[str]:
        args = ["active", "k"]
        if not self.legacy:
            args += [f"occ_{side}" for side in _SIDES] + ["random_turn", "random_move"]
        if self.relative:
            args += ["ref_active", "sx", "sy", "rot"]
        return args

    def _pose_rows(self, name: str = "", ref_active: str = "ref_active", rot: str = "rot",
                   own: str = "active") -> Tuple[List, List, List]:
        """next(x) / next(y) / next(direction) rows, for the module itself or for instance `name`"""
        m = self.m

        def v(var: str) -> str:
            return f"{name}.{var}" if name else var

        moving = f"{own} & {v('moving')}" if name else "moving"
        frame_x, frame_y, frame_d = [], [], []
        if self.relative:
            fx, fy = v("fx"), v("fy")
            frame_x = [(f"{ref_active} & {rot} = 0", fx), (f"{ref_active} & {rot} = 1", f"({m} - {fy}) mod {m}"),
                       (f"{ref_active} & {rot} = 2", f"({m} - {fx}) mod {m}"), (f"{ref_active} & {rot} = 3", fy)]
            frame_y = [(f"{ref_active} & {rot} = 0", fy), (f"{ref_active} & {rot} = 1", fx),
                       (f"{ref_active} & {rot} = 2", f"({m} - {fy}) mod {m}"), (f"{ref_active} & {rot} = 3", f"({m} - {fx}) mod {m}")]
            frame_d = [(ref_active, f"({v('direction')} + 4 - {rot}) mod 4")]

        x, y, d, heading = v("x"), v("y"), v("direction"), v("heading")
        rows_x = frame_x + [
            (f"{moving} & {heading} = 1", f"({x} + 1) mod {m}"),
            (f"{moving} & {heading} = 3", f"({x} + {m - 1}) mod {m}"),
            ("TRUE", x),
        ]
        rows_y = frame_y + [
            (f"{moving} & {heading} = 0", f"({y} + 1) mod {m}"),
            (f"{moving} & {heading} = 2", f"({y} + {m - 1}) mod {m}"),
            ("TRUE", y),
        ]
        if self.legacy:
            turning = [(f"{own} & {v('lost')}", f"({d} + 2) mod 4"),
                       (f"{own} & {v('found')}", f"{{({d} + 1) mod 4, ({d} + 3) mod 4}}")]
        else:
            turning = [(f"{own} & {v('blocked')} & random_move = 0", f"({heading} + 3) mod 4"),
                       (f"{own} & {v('blocked')}", f"({heading} + 1) mod 4"),
                       (own, heading)]
        rows_d = frame_d + turning + [("TRUE", d)]
        return rows_x, rows_y, rows_d

    def robot(self) -> List[str]:
        m = self.m
        out = [f"MODULE {self.robot_module}({', '.join(self._robot_args())})", "VAR",
               f"  x : 0..{m - 1};", f"  y : 0..{m - 1};", "  direction : 0..3;", self._aux_decl()]

        out.append("DEFINE")
        out += self._decision_defines(fixed_heading=False)
        if self.legacy:
            out += ["  heading := direction;", "  moving := active & !lost & !found;"]
        else:
            out.append("  moving := active & !blocked;")
        if self.relative:
            out += [f"  fx := (x + sx) mod {m};", f"  fy := (y + sy) mod {m};"]

        out.append("ASSIGN")
        # an idle process keeps its assigned variables, so reference-driven poses live in main's TRANS
        if not self.frame_in_main:
            rows_x, rows_y, rows_d = self._pose_rows()
            out += _case("next(x)", rows_x)
            out += _case("next(y)", rows_y)
            out += _case("next(direction)", rows_d)
        out += self._aux_next()
        if self.processes:
            out += ["FAIRNESS", "  running"]
        return out

    def reference(self) -> List[str]:
        """The pinned robot: only its non-pose variable is stored; its move becomes a frame change"""
        m = self.m
        if self.legacy:
            args = ["active", "k", "random"]
        else:
            args = ["active", "k"] + [f"occ_{side}" for side in _SIDES] + ["random_turn", "random_move"]
        out = [f"MODULE {self.reference_module}({', '.join(args)})", "VAR", self._aux_decl(), "DEFINE"]
        out += self._decision_defines(fixed_heading=True)
        if self.legacy:
            out += _case("rot", [("active & lost", "2"), ("active & found & random = 0", "3"),
                                 ("active & found", "1"), ("TRUE", "0")])
            out.append("  sx := 0;")
            out += _case("sy", [("active & !lost & !found", str(m - 1)), ("TRUE", "0")])
        else:
            out += _case("rot", [("!active", "0"), ("blocked & random_move = 0", "(heading + 3) mod 4"),
                                 ("blocked", "(heading + 1) mod 4"), ("TRUE", "heading")])
            # everyone else shifts opposite to the reference's step
            out += _case("sx", [("!active | blocked", "0"), ("heading = 1", str(m - 1)),
                                ("heading = 3", "1"), ("TRUE", "0")])
            out += _case("sy", [("!active | blocked", "0"), ("heading = 0", str(m - 1)),
                                ("heading = 2", "1"), ("TRUE", "0")])
        out.append("ASSIGN")
        out += self._aux_next()
        if self.processes:
            out += ["FAIRNESS", "  running"]
        return out

    # -- main -------------------------------------------------------------

    def _active(self, i: int) -> str:
        return "TRUE" if self.processes else f"active_{i}"

    def _instance_decl(self, i: int) -> str:
        prefix = "process " if self.processes else ""
        if self.relative and i == 0:
            if self.legacy:
                args = [self._active(0), "k_0", "random"]
            else:
                args = [self._active(0), "k_0"] + [f"occ_0_{side}" for side in _SIDES] + ["random_turn", "random_move"]
            return f"  reference : {prefix}{self.reference_module}({', '.join(args)});"
        args = [self._active(i), f"k_{i}"]
        if not self.legacy:
            args += [f"occ_{i}_{side}" for side in _SIDES] + ["random_turn", "random_move"]
        if self.relative:
            ref_active = "reference.running" if self.processes else "active_0"
            args += [ref_active, "reference.sx", "reference.sy", "reference.rot"]
        return f"  r{i} : {prefix}{self.robot_module}({', '.join(args)});"

    def _global_decls(self) -> List[str]:
        p = self.params
        out = []
        if p.mode in (Mode.STRICT, Mode.NONSTRICT):
            out.append(f"  turn : 0..{p.r - 1};")
        if p.mode == Mode.NONSTRICT:
            out.append(f"  remaining : 1..{p.all_mask};")
        if p.mode == Mode.FAIR and not self.legacy:
            out.append(f"  selector : 0..{p.r - 1};")
        if not self.legacy:
            out += ["  random_turn : 0..2;", "  random_move : 0..1;"]
        elif self.relative:
            out.append("  random : 0..1;")
        return out

    def _defines(self) -> List[str]:
        p, m = self.params, self.m
        out = ["DEFINE"]
        for i in range(p.r):
            name = self._instance(i)
            if self.relative and i == 0:
                out += ["  x_0 := 0;", "  y_0 := 0;", "  d_0 := 0;"]
            else:
                out += [f"  x_{i} := {name}.x;", f"  y_{i} := {name}.y;", f"  d_{i} := {name}.direction;"]
            out.append(f"  aux_{i} := {name}.{self.aux};")
        if not self.processes:
            for i in range(p.r):
                if p.mode == Mode.FAIR:
                    out.append(f"  active_{i} := selector = {i};")
                else:
                    out.append(f"  active_{i} := turn = {i};")

        for i, j in self._pairs():
            for axis in ("x", "y"):
                gap = f"abs({axis}_{i} - {axis}_{j})"
                out.append(f"  d{axis}_{i}_{j} := min({gap}, {m} - {gap});")
            out.append(f"  {self._near(i, j)} := {self._within(i, j)};")
        for i in range(p.r):
            nears = [self._near(i, j) for j in range(p.r) if j != i]
            out.append(f"  k_{i} := {'count(' + ', '.join(nears) + ')' if nears else '0'};")

        if not self.legacy:
            for i in range(p.r):
                for side, (ox, oy) in zip(_SIDES, _AHEAD):
                    cell_x = f"(x_{i} + {ox % m}) mod {m}" if ox else f"x_{i}"
                    cell_y = f"(y_{i} + {oy % m}) mod {m}" if oy else f"y_{i}"
                    hits = [f"(x_{j} = {cell_x} & y_{j} = {cell_y})" for j in range(p.r) if j != i]
                    out.append(f"  occ_{i}_{side} := {' | '.join(hits) if hits else 'FALSE'};")

        # reach_s_j: robot j connects to robot 0 through at most s hops
        for j in range(p.r):
            out.append(f"  reach_0_{j} := {'TRUE' if j == 0 else 'FALSE'};")
        for s in range(1, p.r):
            for j in range(p.r):
                links = [f"(reach_{s - 1}_{k} & {self._near(k, j)})" for k in range(p.r) if k != j]
                out.append(f"  reach_{s}_{j} := {' | '.join([f'reach_{s - 1}_{j}'] + links)};")
        last = p.r - 1
        out.append(f"  all_connected := {' & '.join(f'reach_{last}_{j}' for j in range(p.r))};")
        clashes = [f"!(x_{i} = x_{j} & y_{i} = y_{j})" for i, j in self._pairs()]
        out.append(f"  collision_free := {' & '.join(clashes) if clashes else 'TRUE'};")
        return out

    def _scheduler(self) -> List[str]:
        p = self.params
        if p.mode == Mode.STRICT:
            return ["ASSIGN", "  init(turn) := 0;", f"  next(turn) := (turn + 1) mod {p.r};"]
        if p.mode != Mode.NONSTRICT:
            return []
        rows, picks = [], []
        for mask in range(1, p.all_mask + 1):
            members = [i for i in range(p.r) if mask >> i & 1]
            for i in members:
                rows.append((f"remaining = {mask} & turn = {i}", str(mask & ~(1 << i) or p.all_mask)))
            choice = str(members[0]) if len(members) == 1 else "{" + ", ".join(map(str, members)) + "}"
            picks.append((f"next(remaining) = {mask}", choice))
        out = ["ASSIGN", f"  init(remaining) := {p.all_mask};"]
        out.append("  init(turn) := {" + ", ".join(map(str, range(p.r))) + "};" if p.r > 1 else "  init(turn) := 0;")
        out += _case("next(remaining)", rows + [("TRUE", "remaining")])
        out += _case("next(turn)", picks + [("TRUE", "0")])
        return out

    def _frame_trans(self) -> List[str]:
        """Pose updates of the non-reference robots, keyed on the running process"""
        if not self.frame_in_main or self.params.r < 2:
            return []
        out = ["TRANS"]
        for i in range(1, self.params.r):
            name = f"r{i}"
            rows = self._pose_rows(name, ref_active="reference.running", rot="reference.rot", own=f"{name}.running")
            for var, op, var_rows in zip(("x", "y", "direction"), ("=", "=", "in"), rows):
                joiner = "  " if len(out) == 1 else "  & "
                out.append(f"{joiner}next({name}.{var}) {op} case")
                out += [f"      {cond} : {value};" for cond, value in var_rows]
                out.append("    esac")
        return out

    def _robot_init(self, i: int, values: Tuple[int, int, int, object]) -> str:
        x, y, d, aux = values
        if self.legacy:
            aux = Motion(aux).name.lower()
        return f"(x_{i} = {x} & y_{i} = {y} & d_{i} = {int(d)} & aux_{i} = {aux})"

    def _initial(self) -> List[str]:
        p = self.params
        if p.init.kind == InitKind.EXPLICIT:
            alternatives = []
            for spec in p.init.states:
                state = make_state(p, [Pose(rb.x, rb.y, rb.dir) for rb in spec], [rb.aux for rb in spec])
                robots = state.robots
                if self.relative:
                    rel = canonicalize(state, self.m)
                    robots = ((Pose(0, 0, 0), rel.reference),) + rel.others
                terms = [self._robot_init(i, (rv[0][0], rv[0][1], rv[0][2], rv[1])) for i, rv in enumerate(robots)]
                alternatives.append("(" + " & ".join(terms) + ")")
            return ["INIT", "  " + "\n  | ".join(dict.fromkeys(alternatives))]

        if self.legacy:
            terms = [f"aux_{i} = default" for i in range(p.r)]
        else:
            terms = [f"aux_{i} = k_{i}" for i in range(p.r)] + ["collision_free"]
        if p.init.kind == InitKind.CONNECTED:
            terms.append("all_connected")
        return ["INIT", "  " + " & ".join(terms)]

    def _fairness(self) -> List[str]:
        if self.params.mode == Mode.FAIR and not self.processes:
            return ["FAIRNESS"] + [f"  selector = {i}" for i in range(self.params.r)]
        return []

    def _atom(self, atom: Atom) -> str:
        if atom.name == "pairwise":
            body = self._near(atom.i, atom.j)
        else:
            body = atom.name
        return f"!{body}" if atom.negated else body

    def _spec(self) -> List[str]:
        shape = " ".join(self.prop.shape)
        return ["LTLSPEC", f"  {shape} {self._atom(self.prop.atom)}"]

    def main(self) -> List[str]:
        out = ["MODULE main", "VAR"]
        out += [self._instance_decl(i) for i in range(self.params.r)]
        out += self._global_decls()
        out += self._defines()
        out += self._scheduler()
        out += self._frame_trans()
        out += self._initial()
        out += self._fairness()
        out += self._spec()
        return out

    def render(self) -> str:
        header = [
            config.config.SMV_DIALECT_HEADER,
            f"-- params: {self.params.model_dump_json()}",
            f"-- property: {self.prop}",
        ]
        sections = [header, self.robot()]
        if self.relative:
            sections.append(self.reference())
        sections.append(self.main())
        return "\n\n".join("\n".join(lines) for lines in sections) + "\n"


def emit_smv(params: ModelParams, prop: Optional[Property] = None) -> str:
    """Model text for params; identical input gives byte-identical output"""
    if params.mode == Mode.SYNC:
        raise UnsupportedConfiguration("SMV export supports strict, nonstrict and fair modes only")
    prop = prop or parse_property(DEFAULT_PROPERTY)
    check_property_fits(prop, params)
    text = SmvModel(params, prop).render()
    logger.debug(f"emitted {len(text)} characters of SMV for {params.label()}")
    return text


# ---------------------------------------------------------------------------
# Reading declarations back
# ---------------------------------------------------------------------------

_SECTIONS = {"VAR", "IVAR", "FROZENVAR", "DEFINE", "ASSIGN", "INIT", "TRANS", "INVAR",
             "FAIRNESS", "JUSTICE", "COMPASSION", "LTLSPEC", "CTLSPEC", "SPEC", "INVARSPEC"}
_MODULE_RE = re.compile(r"^MODULE\s+(\w+)\s*(?:\((.*)\))?\s*$")
_DECL_RE = re.compile(r"^(\w+)\s*:\s*(.+?)\s*;$")
_RANGE_RE = re.compile(r"^(-?\d+)\s*\.\.\s*(-?\d+)$")
_ENUM_RE = re.compile(r"^\{(.*)\}$")
_INSTANCE_RE = re.compile(r"^(?:process\s+)?([A-Za-z_]\w*)\s*(?:\((.*)\))?$")


def _domain_size(type_text: str, line_no: int) -> Optional[int]:
    """Size of a scalar type, None for a module instance"""
    if type_text == "boolean":
        return 2
    bounds = _RANGE_RE.match(type_text)
    if bounds:
        low, high = int(bounds.group(1)), int(bounds.group(2))
        if high < low:
            raise DomainParseError(f"empty range {type_text}", line_no)
        return high - low + 1
    values = _ENUM_RE.match(type_text)
    if values:
        items = [v.strip() for v in values.group(1).split(",") if v.strip()]
        if not items:
            raise DomainParseError("empty enumeration", line_no)
        return len(set(items))
    if _INSTANCE_RE.match(type_text):
        return None
    raise DomainParseError(f"unrecognised type '{type_text}'", line_no)


def _modules(text: str) -> Dict[str, List[Tuple[int, str, str]]]:
    """module name -> [(line, variable, type)] from its VAR sections"""
    modules: Dict[str, List[Tuple[int, str, str]]] = {}
    current: Optional[str] = None
    section: Optional[str] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        header = _MODULE_RE.match(line)
        if header:
            current = header.group(1)
            if current in modules:
                raise DomainParseError(f"module '{current}' declared twice", line_no)
            modules[current] = []
            section = None
            continue
        keyword = line.split()[0]
        if keyword in _SECTIONS:
            if current is None:
                raise DomainParseError(f"{keyword} section outside any module", line_no)
            section = keyword
            continue
        if section != "VAR":
            continue
        decl = _DECL_RE.match(line)
        if not decl:
            raise DomainParseError(f"malformed declaration '{line}'", line_no)
        modules[current].append((line_no, decl.group(1), decl.group(2)))
    return modules


def parse_domains(text: str) -> VariableSignature:
    """VariableSignature of a model written by emit_smv"""
    if not text.strip():
        raise DomainParseError("empty model text", 0)
    modules = _modules(text)
    if not modules:
        raise DomainParseError("no module found", 0)
    if "main" not in modules:
        raise DomainParseError("no main module", 0)

    def scalar_vars(name: str) -> Dict[str, int]:
        found = {}
        for line_no, var, type_text in modules[name]:
            size = _domain_size(type_text, line_no)
            if size is None:
                raise DomainParseError(f"nested instance '{var}' in module {name}", line_no)
            found[var] = size
        return found

    global_vars: Dict[str, int] = {}
    reference_vars: Dict[str, int] = {}
    robot_types = []
    for line_no, var, type_text in modules["main"]:
        size = _domain_size(type_text, line_no)
        if size is not None:
            global_vars[var] = size
            continue
        module = _INSTANCE_RE.match(type_text).group(1)
        if module not in modules:
            raise DomainParseError(f"instance '{var}' of undeclared module {module}", line_no)
        if var == "reference":
            reference_vars = scalar_vars(module)
        else:
            robot_types.append((line_no, module))

    robot_vars: Dict[str, int] = {}
    if robot_types:
        kinds = {module for _, module in robot_types}
        if len(kinds) > 1:
            raise DomainParseError(f"robots of different modules {sorted(kinds)}", robot_types[0][0])
        robot_vars = scalar_vars(robot_types[0][1])
    return VariableSignature(
        robot_vars=robot_vars,
        robot_count=len(robot_types),
        reference_vars=reference_vars,
        global_vars=global_vars,
    )
