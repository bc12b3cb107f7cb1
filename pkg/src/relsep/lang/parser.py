"""Concrete syntax of the object language.

The surface grammar is richer than the core AST: impure atoms (`!x`,
`x[e]`, `alloc`, `malloc`, `length`, calls) may appear in expression
positions and are hoisted into lets (left-to-right, strict), `c1 ; c2`
desugars into `let _ := c1 in c2`, and `<=`, `>`, `>=`, `!=`, `||` and
unary minus desugar to the core operators. Grammar reference lives in
docs/grammar.md.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from ..lexing import ParseError, TokenStream
from . import ast

KEYWORDS = {
    "def", "let", "in", "if", "else", "for", "while", "return", "range",
    "alloc", "malloc", "free", "mfree", "length", "not", "true", "false",
}


class _Hoist:
    """Collects impure sub-commands lifted out of an expression."""

    def __init__(self) -> None:
        self.bindings: List[Tuple[str, ast.Cmd]] = []
        self._n = 0

    def lift(self, c: ast.Cmd) -> ast.Expr:
        name = f"%t{self._n}"
        self._n += 1
        self.bindings.append((name, c))
        return ast.Var(name)

    def wrap(self, tail: ast.Cmd) -> ast.Cmd:
        for name, bound in reversed(self.bindings):
            tail = ast.Let(name, bound, tail)
        return tail


class _Parser:
    def __init__(self, source: str):
        self.ts = TokenStream(source)

    # --- commands ---

    def parse_cmd(self) -> ast.Cmd:
        first = self.parse_seq_item()
        if self.ts.accept(";"):
            rest = self.parse_cmd()
            return ast.Let("_", first, rest)
        return first

    def parse_seq_item(self) -> ast.Cmd:
        ts = self.ts
        if ts.at("let"):
            ts.next()
            name = ts.expect_kind("ident").text
            ts.expect(":=")
            bound = self.parse_seq_item()
            ts.expect("in")
            body = self.parse_cmd()
            return ast.Let(name, bound, body)
        if ts.at("if"):
            ts.next()
            ts.expect("(")
            h = _Hoist()
            cond = self.parse_expr(h)
            ts.expect(")")
            then = self.parse_block()
            ts.expect("else")
            orelse = self.parse_block()
            return h.wrap(ast.If(cond, then, orelse))
        if ts.at("for"):
            ts.next()
            var = ts.expect_kind("ident").text
            ts.expect("in")
            ts.expect("range")
            ts.expect("(")
            h = _Hoist()
            lo = self.parse_expr(h)
            ts.expect(",")
            hi = self.parse_expr(h)
            ts.expect(")")
            body = self.parse_block()
            return h.wrap(ast.For(var, lo, hi, body))
        if ts.at("while"):
            ts.next()
            ts.expect("(")
            guard = self.parse_cmd()
            ts.expect(")")
            body = self.parse_block()
            return ast.While(guard, body)
        if ts.at("return"):
            ts.next()
            h = _Hoist()
            e = self.parse_expr(h)
            return h.wrap(ast.Pure(e))
        if ts.at("free") or ts.at("mfree"):
            kind = ts.next().text
            ts.expect("(")
            h = _Hoist()
            e = self.parse_expr(h)
            ts.expect(")")
            node = ast.Free(e) if kind == "free" else ast.Mfree(e)
            return h.wrap(node)
        # assignments: IDENT := e  |  IDENT [ e ] := e
        if ts.at_kind("ident") and ts.peek().text not in KEYWORDS:
            if ts.peek(1).text == ":=":
                name = ts.next().text
                ts.next()
                h = _Hoist()
                v = self.parse_expr(h)
                return h.wrap(ast.Store(ast.Var(name), v))
            if ts.peek(1).text == "[":
                # lookahead for the matching `] :=`
                save = ts.pos
                name = ts.next().text
                ts.next()
                h = _Hoist()
                try:
                    idx = self.parse_expr(h)
                except ParseError:
                    ts.pos = save
                else:
                    if ts.at("]") and ts.peek(1).text == ":=":
                        ts.next()
                        ts.next()
                        v = self.parse_expr(h)
                        return h.wrap(ast.StoreArr(ast.Var(name), idx, v))
                    ts.pos = save
        # bare command-expression
        h = _Hoist()
        e = self.parse_expr(h)
        if not h.bindings:
            return ast.Pure(e)
        # a trailing pure Var wrapping a single lifted command collapses
        if type(e) is ast.Var and h.bindings and h.bindings[-1][0] == e.name:
            name, cmd = h.bindings.pop()
            return h.wrap(cmd)
        return h.wrap(ast.Pure(e))

    def parse_block(self) -> ast.Cmd:
        self.ts.expect("{")
        if self.ts.accept("}"):
            return ast.Pure(ast.Lit(0))
        body = self.parse_cmd()
        self.ts.expect("}")
        return body

    # --- expressions (with impure atoms hoisted) ---

    def parse_expr(self, h: _Hoist) -> ast.Expr:
        return self.parse_or(h)

    def parse_or(self, h: _Hoist) -> ast.Expr:
        e = self.parse_and(h)
        while self.ts.accept("||"):
            rhs = self.parse_and(h)
            e = ast.Not(ast.BinOp("and", ast.Not(e), ast.Not(rhs)))
        return e

    def parse_and(self, h: _Hoist) -> ast.Expr:
        e = self.parse_cmp(h)
        while self.ts.accept("&&"):
            rhs = self.parse_cmp(h)
            e = ast.BinOp("and", e, rhs)
        return e

    def parse_cmp(self, h: _Hoist) -> ast.Expr:
        e = self.parse_add(h)
        ts = self.ts
        for op in ("<=", ">=", "!=", "=", "<", ">"):
            if ts.at(op):
                ts.next()
                rhs = self.parse_add(h)
                if op == "=":
                    return ast.BinOp("=", e, rhs)
                if op == "<":
                    return ast.BinOp("<", e, rhs)
                if op == ">":
                    return ast.BinOp("<", rhs, e)
                if op == "<=":
                    return ast.Not(ast.BinOp("<", rhs, e))
                if op == ">=":
                    return ast.Not(ast.BinOp("<", e, rhs))
                return ast.Not(ast.BinOp("=", e, rhs))
        return e

    def parse_add(self, h: _Hoist) -> ast.Expr:
        e = self.parse_mul(h)
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next().text
            rhs = self.parse_mul(h)
            e = ast.BinOp(op, e, rhs)
        return e

    def parse_mul(self, h: _Hoist) -> ast.Expr:
        e = self.parse_unary(h)
        while self.ts.accept("*"):
            rhs = self.parse_unary(h)
            e = ast.BinOp("*", e, rhs)
        return e

    def parse_unary(self, h: _Hoist) -> ast.Expr:
        ts = self.ts
        if ts.accept("not"):
            return ast.Not(self.parse_unary(h))
        if ts.at("-"):
            ts.next()
            return ast.BinOp("-", ast.Lit(0), self.parse_unary(h))
        if ts.at("!"):
            ts.next()
            name = ts.expect_kind("ident").text
            return h.lift(ast.Deref(ast.Var(name)))
        return self.parse_primary(h)

    def parse_primary(self, h: _Hoist) -> ast.Expr:
        ts = self.ts
        t = ts.peek()
        if t.kind == "int":
            ts.next()
            return ast.Lit(int(t.text))
        if ts.accept("true"):
            return ast.Lit(True)
        if ts.accept("false"):
            return ast.Lit(False)
        if ts.accept("("):
            e = self.parse_expr(h)
            ts.expect(")")
            return e
        if t.text in ("alloc", "malloc", "length"):
            ts.next()
            ts.expect("(")
            arg = self.parse_expr(h)
            ts.expect(")")
            node = {"alloc": ast.Alloc, "malloc": ast.Malloc, "length": ast.Length}[t.text]
            return h.lift(node(arg))
        if t.kind == "ident" and t.text not in KEYWORDS:
            ts.next()
            name = t.text
            if ts.accept("("):
                args: List[ast.Expr] = []
                if not ts.at(")"):
                    args.append(self.parse_expr(h))
                    while ts.accept(","):
                        args.append(self.parse_expr(h))
                ts.expect(")")
                return h.lift(ast.Call(name, tuple(args)))
            if ts.accept("["):
                idx = self.parse_expr(h)
                ts.expect("]")
                return h.lift(ast.Read(ast.Var(name), idx))
            return ast.Var(name)
        raise ts.error(f"unexpected token {t.text!r} in expression")

    # --- programs ---

    def parse_program(self) -> ast.Program:
        defs: List[ast.Def] = []
        tail: Optional[ast.Cmd] = None
        while not self.ts.at_kind("eof"):
            if self.ts.at("def"):
                self.ts.next()
                name = self.ts.expect_kind("ident").text
                self.ts.expect("(")
                params: List[str] = []
                if not self.ts.at(")"):
                    params.append(self.ts.expect_kind("ident").text)
                    while self.ts.accept(","):
                        params.append(self.ts.expect_kind("ident").text)
                self.ts.expect(")")
                body = self.parse_block()
                defs.append(ast.Def(name, tuple(params), body))
            else:
                tail = self.parse_cmd()
                if not self.ts.at_kind("eof"):
                    raise self.ts.error("trailing input after entry command")
        if tail is not None:
            params = tuple(sorted(ast.free_vars_cmd(tail)))
            defs.append(ast.Def("main", params, tail))
            entry = "main"
        elif any(d.name == "main" for d in defs):
            entry = "main"
        elif defs:
            entry = defs[-1].name
        else:
            raise ParseError("empty program")
        return ast.Program(tuple(defs), entry)


def _check_calls(program: ast.Program) -> None:
    names = {d.name for d in program.defs}
    seen = set()
    for d in program.defs:
        if d.name in seen:
            raise ParseError(f"duplicate definition {d.name}")
        seen.add(d.name)
    callees: Dict[str, Set[str]] = {d.name: set() for d in program.defs}

    def scan(c: ast.Cmd, into: Set[str]) -> None:
        t = type(c)
        if t is ast.Call:
            if c.name not in names:
                raise ParseError(f"call to undefined function {c.name}")
            into.add(c.name)
        elif t is ast.Let:
            scan(c.bound, into)
            scan(c.body, into)
        elif t is ast.If:
            scan(c.then, into)
            scan(c.orelse, into)
        elif t is ast.For:
            scan(c.body, into)
        elif t is ast.While:
            scan(c.guard, into)
            scan(c.body, into)

    for d in program.defs:
        scan(d.body, callees[d.name])

    state: Dict[str, int] = {}

    def visit(name: str, stack: Tuple[str, ...]) -> None:
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle = " -> ".join(stack + (name,))
            raise ParseError(f"recursive call graph: {cycle}")
        state[name] = 1
        for callee in sorted(callees[name]):
            visit(callee, stack + (name,))
        state[name] = 2

    for d in program.defs:
        visit(d.name, ())


def parse_program(source: str) -> ast.Program:
    program = _Parser(source).parse_program()
    _check_calls(program)
    return program


def parse_command(source: str) -> ast.Cmd:
    p = _Parser(source)
    cmd = p.parse_cmd()
    if not p.ts.at_kind("eof"):
        raise p.ts.error("trailing input after command")
    return cmd
