"""
Temporal properties checked by swarmcheck

Grammar:  shape WS atom
          shape := "F" | "G" | "GF" | "FG"
          atom  := ["!"] identifier | ["!"] "pairwise(" i "," j ")"
"""

import re
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from swarmcheck import ConfigurationError, PropertyParseError
from swarmcheck.alpha_model import ModelParams, all_connected, collision_free
from swarmcheck.grid_core import within_range
from swarmcheck.symmetry import AnyState, as_global

SHAPES = ("F", "G", "GF", "FG")
ATOMS = ("all_connected", "collision_free", "pairwise")

Shape = Literal["F", "G", "GF", "FG"]
AtomName = Literal["all_connected", "collision_free", "pairwise"]


class Atom(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: AtomName
    negated: bool = False
    i: Optional[int] = None
    j: Optional[int] = None

    def __str__(self) -> str:
        body = f"pairwise({self.i},{self.j})" if self.name == "pairwise" else self.name
        return ("!" if self.negated else "") + body


class Property(BaseModel):
    model_config = ConfigDict(frozen=True)

    shape: Shape
    atom: Atom

    def __str__(self) -> str:
        return f"{self.shape} {self.atom}"


def _raw_atom(atom: Atom, state: AnyState, params: ModelParams) -> bool:
    s = as_global(state)
    if atom.name == "all_connected":
        return all_connected(s, params)
    if atom.name == "collision_free":
        return collision_free(s)
    a, b = s.robots[atom.i].pose, s.robots[atom.j].pose
    return within_range(a, b, params.m, params.w, params.metric)


def evaluate_atom(atom: Atom, state: AnyState, params: ModelParams) -> bool:
    """Truth of the atom in a state of either encoding (atoms are frame-invariant)"""
    return _raw_atom(atom, state, params) != atom.negated


def check_property_fits(prop: Property, params: ModelParams) -> None:
    atom = prop.atom
    if atom.name == "pairwise" and not (atom.i < params.r and atom.j < params.r):
        raise ConfigurationError(f"{atom} names a robot outside 0..{params.r - 1}")


_SHAPE_RE = re.compile(r"[A-Za-z]+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")


def parse_property(text: str) -> Property:
    pos = len(text) - len(text.lstrip())
    shape_match = _SHAPE_RE.match(text, pos)
    if not shape_match:
        raise PropertyParseError("expected a temporal operator", pos)
    shape = shape_match.group(0)
    if shape not in SHAPES:
        raise PropertyParseError(f"unsupported temporal operator '{shape}'", pos)
    pos = shape_match.end()

    after = len(text) - len(text[pos:].lstrip())
    if after == pos and pos < len(text):
        raise PropertyParseError("expected whitespace after the temporal operator", pos)
    pos = after

    negated = False
    if text.startswith("!", pos):
        negated = True
        pos += 1

    ident_match = _IDENT_RE.match(text, pos)
    if not ident_match:
        raise PropertyParseError("expected an atom", pos)
    name = ident_match.group(0)
    if name not in ATOMS:
        raise PropertyParseError(f"unknown atom '{name}'", pos)
    pos = ident_match.end()

    if name == "pairwise":
        pair = _PAIR_RE.match(text, pos)
        if not pair:
            raise PropertyParseError("malformed pairwise indices, expected pairwise(i,j)", pos)
        i, j = int(pair.group(1)), int(pair.group(2))
        if i == j:
            raise PropertyParseError("pairwise needs two distinct robots", pos)
        return Property(shape=shape, atom=Atom(name=name, negated=negated, i=i, j=j))

    if text[pos:].strip():
        raise PropertyParseError("unexpected trailing input", pos)
    return Property(shape=shape, atom=Atom(name=name, negated=negated))
