"""Runtime values of the object language.

Integers and booleans are plain Python objects (ints are unbounded by
construction). Locations are opaque triples carrying the block id, the
offset within the block, and the block length; ordering is lexicographic,
which makes allocation and printing deterministic.
"""
from __future__ import annotations

from typing import Dict, NamedTuple, Tuple, Union


class Loc(NamedTuple):
    block: int
    off: int
    length: int

    def shifted(self, delta: int) -> "Loc":
        return Loc(self.block, self.off + delta, self.length)

    def __repr__(self) -> str:
        return f"loc({self.block},{self.off},{self.length})"


class Index(NamedTuple):
    """A tagged tuple naming one component of a program product."""

    tag: int
    args: Tuple[int, ...] = ()

    def __repr__(self) -> str:
        inner = ", ".join(str(a) for a in (self.tag,) + self.args)
        return f"idx({inner})"


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unit"


UNIT = _Unit()

# bool must be tested before int: Python bools are ints.
Value = Union[int, bool, Loc, _Unit]

# Results of a product execution: one value per component index.
HyperValue = Dict[Index, Value]


def is_int(v: Value) -> bool:
    return type(v) is int


def is_bool(v: Value) -> bool:
    return type(v) is bool


def is_loc(v: Value) -> bool:
    return type(v) is Loc


def show_value(v: Value) -> str:
    if type(v) is bool:
        return "true" if v else "false"
    return repr(v) if type(v) is Loc else str(v)


def value_to_json(v: Value):
    """Canonical JSON form, used by reports and golden tests."""
    if type(v) is bool:
        return v
    if type(v) is int:
        return v
    if type(v) is Loc:
        return {"loc": [v.block, v.off, v.length]}
    return "unit"
