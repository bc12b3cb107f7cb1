"""Deterministic big-step evaluation over single heaps.

Faults are first-class outcomes (not Python bugs) and fuel exhaustion is
reported distinctly, never as nontermination. Allocation always picks the
least unused block id, so identical inputs give identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..values import UNIT, Loc, Value, is_bool, is_int, is_loc, show_value
from . import ast
from .heap import Heap

DEFAULT_FUEL = 10**7

UNALLOCATED_READ = "UnallocatedRead"
OUT_OF_BOUNDS = "OutOfBounds"
DOUBLE_FREE = "DoubleFree"
TYPE_ERROR = "TypeError"


class Fault(Exception):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class OutOfFuel(Exception):
    pass


class UnboundVariable(Exception):
    pass


@dataclass
class EvalBudget:
    fuel: int = DEFAULT_FUEL

    def spend(self) -> None:
        if self.fuel <= 0:
            raise OutOfFuel()
        self.fuel -= 1


def eval_expr(e: ast.Expr, env: Dict[str, Value]) -> Value:
    t = type(e)
    if t is ast.Lit:
        return e.value
    if t is ast.Var:
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if t is ast.BinOp:
        a = eval_expr(e.left, env)
        op = e.op
        if op == "and":
            if not is_bool(a):
                raise Fault(TYPE_ERROR, f"and on {show_value(a)}")
            if not a:
                return False
            b = eval_expr(e.right, env)
            if not is_bool(b):
                raise Fault(TYPE_ERROR, f"and on {show_value(b)}")
            return b
        b = eval_expr(e.right, env)
        if op == "=":
            if type(a) is not type(b):
                raise Fault(TYPE_ERROR, "= on mixed types")
            return a == b
        if not (is_int(a) and is_int(b)):
            raise Fault(TYPE_ERROR, f"{op} on non-integers")
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "<":
            return a < b
        raise Fault(TYPE_ERROR, f"unknown operator {op}")
    if t is ast.Not:
        v = eval_expr(e.arg, env)
        if not is_bool(v):
            raise Fault(TYPE_ERROR, "not on non-boolean")
        return not v
    raise TypeError(f"unknown expression node {e!r}")


class _Machine:
    __slots__ = ("heap", "budget", "program")

    def __init__(self, heap: Heap, budget: EvalBudget, program: Optional[ast.Program]):
        self.heap = heap
        self.budget = budget
        self.program = program

    def _loc(self, e: ast.Expr, env) -> Loc:
        v = eval_expr(e, env)
        if not is_loc(v):
            raise Fault(TYPE_ERROR, f"expected location, got {show_value(v)}")
        return v

    def _int(self, e: ast.Expr, env) -> int:
        v = eval_expr(e, env)
        if not is_int(v):
            raise Fault(TYPE_ERROR, f"expected integer, got {show_value(v)}")
        return v

    def run(self, c: ast.Cmd, env: Dict[str, Value]) -> Value:
        self.budget.spend()
        t = type(c)
        if t is ast.Pure:
            return eval_expr(c.expr, env)
        if t is ast.Let:
            v = self.run(c.bound, env)
            saved = env.get(c.name, _MISSING)
            env[c.name] = v
            try:
                return self.run(c.body, env)
            finally:
                if saved is _MISSING:
                    del env[c.name]
                else:
                    env[c.name] = saved
        if t is ast.Deref:
            loc = self._loc(c.ref, env)
            try:
                return self.heap.cells[loc]
            except KeyError:
                raise Fault(UNALLOCATED_READ, f"deref {loc!r}") from None
        if t is ast.Read:
            loc = self._loc(c.base, env)
            i = self._int(c.index, env)
            if not (0 <= loc.off + i < loc.length):
                raise Fault(OUT_OF_BOUNDS, f"{loc!r}[{i}]")
            cell = loc.shifted(i)
            try:
                return self.heap.cells[cell]
            except KeyError:
                raise Fault(UNALLOCATED_READ, f"read {cell!r}") from None
        if t is ast.Store:
            loc = self._loc(c.ref, env)
            if loc not in self.heap.cells:
                raise Fault(UNALLOCATED_READ, f"store {loc!r}")
            self.heap.cells[loc] = eval_expr(c.value, env)
            return UNIT
        if t is ast.StoreArr:
            loc = self._loc(c.base, env)
            i = self._int(c.index, env)
            if not (0 <= loc.off + i < loc.length):
                raise Fault(OUT_OF_BOUNDS, f"{loc!r}[{i}]")
            cell = loc.shifted(i)
            if cell not in self.heap.cells:
                raise Fault(UNALLOCATED_READ, f"store {cell!r}")
            self.heap.cells[cell] = eval_expr(c.value, env)
            return UNIT
        if t is ast.If:
            g = eval_expr(c.cond, env)
            if not is_bool(g):
                raise Fault(TYPE_ERROR, "if-guard is not a boolean")
            return self.run(c.then if g else c.orelse, env)
        if t is ast.For:
            lo = self._int(c.lo, env)
            hi = self._int(c.hi, env)
            saved = env.get(c.var, _MISSING)
            try:
                for i in range(lo, hi):
                    env[c.var] = i
                    self.run(c.body, env)
                    self.budget.spend()
            finally:
                if saved is _MISSING:
                    env.pop(c.var, None)
                else:
                    env[c.var] = saved
            return UNIT
        if t is ast.While:
            while True:
                g = self.run(c.guard, env)
                if not is_bool(g):
                    raise Fault(TYPE_ERROR, "while-guard returned a non-boolean")
                if not g:
                    return UNIT
                self.run(c.body, env)
                self.budget.spend()
        if t is ast.Alloc:
            v = eval_expr(c.value, env)
            return self.heap.alloc_block(1, [v])
        if t is ast.Malloc:
            n = self._int(c.size, env)
            if n < 0:
                raise Fault(TYPE_ERROR, f"malloc({n})")
            return self.heap.alloc_block(n, [0] * n)
        if t is ast.Free:
            loc = self._loc(c.ref, env)
            if loc.block not in self.heap.blocks:
                raise Fault(DOUBLE_FREE, f"free {loc!r}")
            if loc.off != 0 or self.heap.blocks[loc.block] != 1:
                raise Fault(TYPE_ERROR, f"free on non-scalar {loc!r}")
            self.heap.free_block(loc)
            return UNIT
        if t is ast.Mfree:
            loc = self._loc(c.ref, env)
            if loc.block not in self.heap.blocks:
                raise Fault(DOUBLE_FREE, f"mfree {loc!r}")
            if loc.off != 0:
                raise Fault(TYPE_ERROR, f"mfree on interior {loc!r}")
            self.heap.free_block(loc)
            return UNIT
        if t is ast.Length:
            loc = self._loc(c.arg, env)
            n = self.heap.blocks.get(loc.block)
            if n is None:
                raise Fault(UNALLOCATED_READ, f"length {loc!r}")
            return n
        if t is ast.Call:
            if self.program is None:
                raise Fault(TYPE_ERROR, f"call {c.name} without a program")
            d = self.program.lookup(c.name)
            if d is None:
                raise Fault(TYPE_ERROR, f"undefined function {c.name}")
            if len(d.params) != len(c.args):
                raise Fault(TYPE_ERROR, f"{c.name} arity mismatch")
            callee_env = {p: eval_expr(a, env) for p, a in zip(d.params, c.args)}
            return self.run(d.body, callee_env)
        raise TypeError(f"unknown command node {c!r}")


_MISSING = object()


def eval_cmd(
    c: ast.Cmd,
    heap: Heap,
    env: Optional[Dict[str, Value]] = None,
    budget: Optional[EvalBudget] = None,
    program: Optional[ast.Program] = None,
) -> Tuple[Value, Heap]:
    """Evaluate a command; returns (value, new heap) or raises Fault/OutOfFuel.

    The input heap is never mutated.
    """
    machine = _Machine(heap.clone(), budget if budget is not None else EvalBudget(), program)
    v = machine.run(c, dict(env) if env else {})
    return v, machine.heap


def run_program(
    program: ast.Program,
    args: Dict[str, Value],
    heap: Heap,
    budget: Optional[EvalBudget] = None,
    entry_name: Optional[str] = None,
) -> Tuple[Value, Heap]:
    entry = program.lookup(entry_name if entry_name is not None else program.entry)
    if entry is None:
        raise Fault(TYPE_ERROR, f"no definition named {entry_name}")
    missing = [p for p in entry.params if p not in args]
    if missing:
        raise Fault(TYPE_ERROR, f"missing arguments: {', '.join(missing)}")
    env = {p: args[p] for p in entry.params}
    return eval_cmd(entry.body, heap, env, budget, program)
