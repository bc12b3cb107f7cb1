"""AST of the object language.

Expressions are pure; all heap effects live in commands. Sequencing
``c1 ; c2`` is desugared by the parser into ``let _ := c1 in c2`` and
impure atoms inside expression positions are hoisted into lets, so the
core below stays minimal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from ..values import Value


class Expr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Lit(Expr):
    value: Value


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str  # one of: + - * = < and
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Not(Expr):
    arg: Expr


class Cmd:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Pure(Cmd):
    """An expression in command position (also covers `return e`)."""

    expr: Expr


@dataclass(frozen=True, slots=True)
class Deref(Cmd):
    ref: Expr  # !x


@dataclass(frozen=True, slots=True)
class Read(Cmd):
    base: Expr
    index: Expr  # x[e]


@dataclass(frozen=True, slots=True)
class Store(Cmd):
    ref: Expr
    value: Expr  # x := e


@dataclass(frozen=True, slots=True)
class StoreArr(Cmd):
    base: Expr
    index: Expr
    value: Expr  # x[e] := e


@dataclass(frozen=True, slots=True)
class Let(Cmd):
    name: str
    bound: Cmd
    body: Cmd


@dataclass(frozen=True, slots=True)
class If(Cmd):
    cond: Expr
    then: Cmd
    orelse: Cmd


@dataclass(frozen=True, slots=True)
class For(Cmd):
    var: str
    lo: Expr
    hi: Expr
    body: Cmd


@dataclass(frozen=True, slots=True)
class While(Cmd):
    guard: Cmd  # a command returning a boolean (guards read the heap)
    body: Cmd


@dataclass(frozen=True, slots=True)
class Alloc(Cmd):
    value: Expr


@dataclass(frozen=True, slots=True)
class Malloc(Cmd):
    size: Expr


@dataclass(frozen=True, slots=True)
class Free(Cmd):
    ref: Expr


@dataclass(frozen=True, slots=True)
class Mfree(Cmd):
    ref: Expr


@dataclass(frozen=True, slots=True)
class Length(Cmd):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Call(Cmd):
    name: str
    args: Tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Def:
    name: str
    params: Tuple[str, ...]
    body: Cmd


@dataclass(frozen=True, slots=True)
class Program:
    defs: Tuple[Def, ...]
    entry: str

    def lookup(self, name: str) -> Optional[Def]:
        for d in self.defs:
            if d.name == name:
                return d
        return None


def subst_expr(e: Expr, binding: dict) -> Expr:
    if type(e) is Var:
        if e.name in binding:
            return Lit(binding[e.name])
        return e
    if type(e) is BinOp:
        return BinOp(e.op, subst_expr(e.left, binding), subst_expr(e.right, binding))
    if type(e) is Not:
        return Not(subst_expr(e.arg, binding))
    return e


def subst_cmd(c: Cmd, binding: dict) -> Cmd:
    """Substitute values for free variables (capture handled via shadowing)."""
    t = type(c)
    if t is Pure:
        return Pure(subst_expr(c.expr, binding))
    if t is Deref:
        return Deref(subst_expr(c.ref, binding))
    if t is Read:
        return Read(subst_expr(c.base, binding), subst_expr(c.index, binding))
    if t is Store:
        return Store(subst_expr(c.ref, binding), subst_expr(c.value, binding))
    if t is StoreArr:
        return StoreArr(
            subst_expr(c.base, binding),
            subst_expr(c.index, binding),
            subst_expr(c.value, binding),
        )
    if t is Let:
        inner = binding
        if c.name in binding:
            inner = {k: v for k, v in binding.items() if k != c.name}
        return Let(c.name, subst_cmd(c.bound, binding), subst_cmd(c.body, inner))
    if t is If:
        return If(
            subst_expr(c.cond, binding),
            subst_cmd(c.then, binding),
            subst_cmd(c.orelse, binding),
        )
    if t is For:
        inner = binding
        if c.var in binding:
            inner = {k: v for k, v in binding.items() if k != c.var}
        return For(
            c.var,
            subst_expr(c.lo, binding),
            subst_expr(c.hi, binding),
            subst_cmd(c.body, inner),
        )
    if t is While:
        return While(subst_cmd(c.guard, binding), subst_cmd(c.body, binding))
    if t is Alloc:
        return Alloc(subst_expr(c.value, binding))
    if t is Malloc:
        return Malloc(subst_expr(c.size, binding))
    if t is Free:
        return Free(subst_expr(c.ref, binding))
    if t is Mfree:
        return Mfree(subst_expr(c.ref, binding))
    if t is Length:
        return Length(subst_expr(c.arg, binding))
    if t is Call:
        return Call(c.name, tuple(subst_expr(a, binding) for a in c.args))
    raise TypeError(f"unknown command node {c!r}")


def free_vars_expr(e: Expr, acc: set) -> None:
    if type(e) is Var:
        acc.add(e.name)
    elif type(e) is BinOp:
        free_vars_expr(e.left, acc)
        free_vars_expr(e.right, acc)
    elif type(e) is Not:
        free_vars_expr(e.arg, acc)


def free_vars_cmd(c: Cmd) -> set:
    acc: set = set()
    _fv_cmd(c, acc, set())
    return acc


def _fv_cmd(c: Cmd, acc: set, bound: set) -> None:
    def fv_e(e: Expr) -> None:
        got: set = set()
        free_vars_expr(e, got)
        acc.update(got - bound)

    t = type(c)
    if t is Pure:
        fv_e(c.expr)
    elif t is Deref:
        fv_e(c.ref)
    elif t is Read:
        fv_e(c.base)
        fv_e(c.index)
    elif t is Store:
        fv_e(c.ref)
        fv_e(c.value)
    elif t is StoreArr:
        fv_e(c.base)
        fv_e(c.index)
        fv_e(c.value)
    elif t is Let:
        _fv_cmd(c.bound, acc, bound)
        _fv_cmd(c.body, acc, bound | {c.name})
    elif t is If:
        fv_e(c.cond)
        _fv_cmd(c.then, acc, bound)
        _fv_cmd(c.orelse, acc, bound)
    elif t is For:
        fv_e(c.lo)
        fv_e(c.hi)
        _fv_cmd(c.body, acc, bound | {c.var})
    elif t is While:
        _fv_cmd(c.guard, acc, bound)
        _fv_cmd(c.body, acc, bound)
    elif t in (Alloc, Malloc):
        fv_e(c.value if t is Alloc else c.size)
    elif t in (Free, Mfree):
        fv_e(c.ref)
    elif t is Length:
        fv_e(c.arg)
    elif t is Call:
        for a in c.args:
            fv_e(a)
