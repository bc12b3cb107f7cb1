"""Text grammar for terms, formulas, assertions, index sets and reindexings.

This is the language of derivation-script witnesses and of the canonical
pretty-printer; docs/grammar.md is the reference.
"""
from __future__ import annotations

from typing import List, Optional, Tuple

from .assertions import (
    AArr,
    AEmp,
    AExists,
    APts,
    APure,
    ARepl,
    ABigStar,
    ABigStarSet,
    Assertion,
    Reindexing,
    WRange,
    WSeqs,
    star,
)
from .hyper import IndexSet, SetBuilder, SetDiff, SetExplicit, SetLit, SetUnion
from .lexing import ParseError, TokenStream
from .terms import (
    DRange,
    DSeq,
    FAnd,
    FBool,
    FCmp,
    FImp,
    FIn,
    FNot,
    FOr,
    FQuant,
    Formula,
    ITuple,
    IVar,
    IndexTerm,
    TAt,
    TBin,
    TCountLt,
    TFind,
    TFind2,
    TIte,
    TInt,
    TLen,
    TLit,
    TMerge,
    TRep,
    TRet,
    TSlice,
    TSum,
    TVar,
    THv,
    Term,
)
from .values import Index, Loc

_TERM_BUILTINS = {
    "min", "len", "at", "slice", "rep", "merge", "count_lt", "find", "find2",
    "sum", "ite", "ret", "loc",
}
_RESERVED = _TERM_BUILTINS | {
    "idx", "emp", "pt", "arr", "bigstar", "exists", "each", "in", "notin",
    "not", "true", "false", "forall", "if", "over", "elems", "seqs", "diff",
    "union",
}


class LogicParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    # --- index terms ---

    def parse_index_term(self) -> IndexTerm:
        ts = self.ts
        if ts.at("idx"):
            ts.next()
            ts.expect("(")
            tag = int(ts.expect_kind("int").text)
            args: List[Term] = []
            while ts.accept(","):
                args.append(self.parse_term())
            ts.expect(")")
            return ITuple(tag, tuple(args))
        name = ts.expect_kind("ident").text
        return IVar(name)

    # --- terms ---

    def parse_term(self) -> Term:
        e = self.parse_mul()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next().text
            e = TBin(op, e, self.parse_mul())
        return e

    def parse_mul(self) -> Term:
        e = self.parse_term_prim()
        while self.ts.accept("*"):
            e = TBin("*", e, self.parse_term_prim())
        return e

    def parse_term_prim(self) -> Term:
        ts = self.ts
        t = ts.peek()
        if t.kind == "int":
            ts.next()
            return TInt(int(t.text))
        if ts.at("-"):
            ts.next()
            inner = self.parse_term_prim()
            if type(inner) is TInt:
                return TInt(-inner.value)
            return TBin("-", TInt(0), inner)
        if ts.accept("("):
            e = self.parse_term()
            ts.expect(")")
            return e
        if ts.accept("["):
            items: List[int] = []
            if not ts.at("]"):
                items.append(self._const_int())
                while ts.accept(","):
                    items.append(self._const_int())
            ts.expect("]")
            return TLit(tuple(items))
        if ts.accept("true"):
            return TLit(True)
        if ts.accept("false"):
            return TLit(False)
        if t.kind != "ident":
            raise ts.error(f"unexpected token {t.text!r} in term")
        name = ts.next().text
        if name in _TERM_BUILTINS:
            return self._builtin(name)
        if ts.at("(") and self._peek_index_arg():
            ts.next()
            ix = self.parse_index_term()
            ts.expect(")")
            return THv(TVar(name), ix)
        if ts.accept("["):
            idx = self.parse_term()
            ts.expect("]")
            return TAt(TVar(name), idx)
        return TVar(name)

    def _peek_index_arg(self) -> bool:
        nxt = self.ts.peek(1)
        return nxt.kind == "ident" and nxt.text == "idx"

    def _const_int(self) -> int:
        neg = self.ts.accept("-")
        tok = self.ts.expect_kind("int")
        return -int(tok.text) if neg else int(tok.text)

    def _builtin(self, name: str) -> Term:
        ts = self.ts
        ts.expect("(")
        if name == "ret":
            ix = self.parse_index_term()
            ts.expect(")")
            return TRet(ix)
        if name == "sum":
            var = ts.expect_kind("ident").text
            ts.expect(",")
            lo = self.parse_term()
            ts.expect(",")
            hi = self.parse_term()
            ts.expect(",")
            body = self.parse_term()
            ts.expect(")")
            return TSum(var, lo, hi, body)
        if name == "ite":
            cond = self.parse_formula()
            ts.expect(",")
            a = self.parse_term()
            ts.expect(",")
            b = self.parse_term()
            ts.expect(")")
            return TIte(cond, a, b)
        if name == "loc":
            b = self._const_int()
            ts.expect(",")
            o = self._const_int()
            ts.expect(",")
            n = self._const_int()
            ts.expect(")")
            return TLit(Loc(b, o, n))
        args = [self.parse_term()]
        while ts.accept(","):
            args.append(self.parse_term())
        ts.expect(")")
        arity = {"min": 2, "len": 1, "at": 2, "slice": 3, "rep": 2, "merge": 2,
                 "count_lt": 2, "find": 3, "find2": 5}[name]
        if len(args) != arity:
            raise ts.error(f"{name} takes {arity} arguments")
        if name == "min":
            return TBin("min", *args)
        ctor = {"len": TLen, "at": TAt, "slice": TSlice, "rep": TRep,
                "merge": TMerge, "count_lt": TCountLt, "find": TFind, "find2": TFind2}[name]
        return ctor(*args)

    # --- formulas ---

    def parse_formula(self) -> Formula:
        f = self.parse_or_f()
        if self.ts.accept("->"):
            return FImp(f, self.parse_formula())
        return f

    def parse_or_f(self) -> Formula:
        f = self.parse_and_f()
        parts = [f]
        while self.ts.accept("||"):
            parts.append(self.parse_and_f())
        return parts[0] if len(parts) == 1 else FOr(tuple(parts))

    def parse_and_f(self) -> Formula:
        f = self.parse_atom_f()
        parts = [f]
        while self.ts.accept("&&"):
            parts.append(self.parse_atom_f())
        return parts[0] if len(parts) == 1 else FAnd(tuple(parts))

    def parse_atom_f(self) -> Formula:
        ts = self.ts
        if ts.accept("not"):
            return FNot(self.parse_atom_f())
        if ts.at("forall") or ts.at("exists"):
            kind = ts.next().text
            var = ts.expect_kind("ident").text
            ts.expect("in")
            dom = self._parse_domain()
            ts.expect(":")
            return FQuant(kind, var, dom, self.parse_formula())
        if ts.at("true") and ts.peek(1).text not in ("=", "!="):
            ts.next()
            return FBool(True)
        if ts.at("false") and ts.peek(1).text not in ("=", "!="):
            ts.next()
            return FBool(False)
        if ts.at("("):
            save = ts.pos
            ts.next()
            try:
                inner = self.parse_formula()
                ts.expect(")")
            except ParseError:
                ts.pos = save
            else:
                if not self._at_comparator():
                    return inner
                ts.pos = save
        return self._comparison()

    def _at_comparator(self) -> bool:
        return self.ts.peek().text in ("=", "<", "<=", ">", ">=", "!=", "in", "notin")

    def _comparison(self) -> Formula:
        ts = self.ts
        a = self.parse_term()
        t = ts.peek().text
        if t == "in" or t == "notin":
            ts.next()
            seq = self.parse_term()
            return FIn(a, seq, negated=(t == "notin"))
        if t not in ("=", "<", "<=", ">", ">=", "!="):
            raise ts.error(f"expected comparator, found {t!r}")
        ts.next()
        b = self.parse_term()
        if t == "=":
            return FCmp("=", a, b)
        if t == "<":
            return FCmp("<", a, b)
        if t == "<=":
            return FCmp("<=", a, b)
        if t == ">":
            return FCmp("<", b, a)
        if t == ">=":
            return FCmp("<=", b, a)
        return FNot(FCmp("=", a, b))

    def _parse_domain(self):
        ts = self.ts
        if ts.accept("["):
            lo = self.parse_term()
            ts.expect(",")
            hi = self.parse_term()
            ts.expect(")")
            return DRange(lo, hi)
        if ts.accept("elems"):
            ts.expect("(")
            seq = self.parse_term()
            ts.expect(")")
            return DSeq(seq)
        raise ts.error("expected a range [lo, hi) or elems(seq)")

    # --- assertions ---

    def parse_assertion(self) -> Assertion:
        parts = [self.parse_assertion_prim()]
        while self.ts.accept("*"):
            parts.append(self.parse_assertion_prim())
        return star(*parts)

    def parse_assertion_prim(self) -> Assertion:
        ts = self.ts
        if ts.accept("emp"):
            return AEmp()
        if ts.accept("pt"):
            ts.expect("(")
            loc = self.parse_term()
            ts.expect(",")
            ix = self.parse_index_term()
            ts.expect(",")
            val = self.parse_term()
            ts.expect(")")
            return APts(loc, ix, val)
        if ts.accept("arr"):
            ts.expect("(")
            loc = self.parse_term()
            ts.expect(",")
            ix = self.parse_index_term()
            ts.expect(",")
            seq = self.parse_term()
            ts.expect(")")
            return AArr(loc, ix, seq)
        if ts.accept("["):
            f = self.parse_formula()
            ts.expect("]")
            return APure(f)
        if ts.accept("("):
            a = self.parse_assertion()
            ts.expect(")")
            return a
        if ts.accept("bigstar"):
            var = ts.expect_kind("ident").text
            if ts.accept("over"):
                iset = self.parse_index_set()
                body = self._braced_assertion()
                return ABigStarSet(var, iset, body)
            ts.expect("in")
            dom = self._parse_domain()
            where = None
            if ts.accept("if"):
                where = self.parse_formula()
            body = self._braced_assertion()
            return ABigStar(var, dom, body, where)
        if ts.accept("exists"):
            var = ts.expect_kind("ident").text
            dom = None
            if ts.accept("in"):
                if ts.accept("seqs"):
                    ts.expect("(")
                    n = self._const_int()
                    ts.expect(",")
                    lo = self._const_int()
                    ts.expect(",")
                    hi = self._const_int()
                    ts.expect(")")
                    dom = WSeqs(n, lo, hi)
                else:
                    ts.expect("[")
                    lo_t = self.parse_term()
                    ts.expect(",")
                    hi_t = self.parse_term()
                    ts.expect(")")
                    dom = WRange(lo_t, hi_t)
            body = self._braced_assertion()
            return AExists(var, body, dom)
        if ts.accept("each"):
            var = ts.expect_kind("ident").text
            body = self._braced_assertion()
            return ARepl(var, body)
        raise ts.error(f"unexpected token {ts.peek().text!r} in assertion")

    def _braced_assertion(self) -> Assertion:
        self.ts.expect("{")
        a = self.parse_assertion()
        self.ts.expect("}")
        return a

    # --- index sets ---

    def parse_index_set(self) -> IndexSet:
        ts = self.ts
        if ts.accept("diff"):
            ts.expect("(")
            a = self.parse_index_set()
            ts.expect(",")
            b = self.parse_index_set()
            ts.expect(")")
            return SetDiff(a, b)
        if ts.accept("union"):
            ts.expect("(")
            parts = [self.parse_index_set()]
            while ts.accept(","):
                parts.append(self.parse_index_set())
            ts.expect(")")
            return SetUnion(tuple(parts))
        ts.expect("{")
        if ts.accept("}"):
            return SetLit(frozenset())
        head = self.parse_index_term()
        if type(head) is IVar:
            items = [head.name]
            while ts.accept(","):
                nxt = self.parse_index_term()
                items.append(nxt.name if type(nxt) is IVar else self._const_index(nxt))
            ts.expect("}")
            return SetExplicit(tuple(items))
        if ts.accept("|"):
            binders: List[Tuple[str, object]] = []
            constraints: List[Formula] = []
            while True:
                save = ts.pos
                if ts.at_kind("ident") and ts.peek(1).text == "in":
                    name = ts.next().text
                    ts.next()
                    if ts.at("[") or ts.at("elems"):
                        binders.append((name, self._parse_domain()))
                    else:
                        seq = self.parse_term()
                        constraints.append(FIn(TVar(name), seq))
                else:
                    constraints.append(self.parse_formula())
                if not ts.accept(","):
                    break
            ts.expect("}")
            where = None
            if constraints:
                where = constraints[0] if len(constraints) == 1 else FAnd(tuple(constraints))
            return SetBuilder(head.tag, head.args, tuple(binders), where)
        heads = [head]
        while ts.accept(","):
            nxt = self.parse_index_term()
            if type(nxt) is not ITuple:
                raise ts.error("index sets enumerate idx(...) tuples")
            heads.append(nxt)
        ts.expect("}")
        if all(all(type(a) is TInt for a in h.args) for h in heads):
            return SetLit(frozenset(self._const_index(h) for h in heads))
        if len(heads) == 1:
            return SetBuilder(heads[0].tag, heads[0].args, ())
        return SetUnion(tuple(SetBuilder(h.tag, h.args, ()) for h in heads))

    def _const_index(self, ix: IndexTerm) -> Index:
        if type(ix) is not ITuple:
            raise self.ts.error("expected a concrete idx(...) tuple")
        args = []
        for a in ix.args:
            if type(a) is not TInt:
                raise self.ts.error("explicit index sets need integer components")
            args.append(a.value)
        return Index(ix.tag, tuple(args))

    # --- reindexings ---

    def parse_reindexing(self) -> Reindexing:
        clauses = {}
        while True:
            ts = self.ts
            ts.expect("idx")
            ts.expect("(")
            tag = int(ts.expect_kind("int").text)
            params: List[str] = []
            while ts.accept(","):
                params.append(ts.expect_kind("ident").text)
            ts.expect(")")
            ts.expect("->")
            out = self.parse_index_term()
            if type(out) is not ITuple:
                raise ts.error("reindexing target must be idx(...)")
            clauses[tag] = (tuple(params), out)
            if not self.ts.accept(";"):
                break
        return Reindexing(clauses)


def _full(source: str, fn_name: str):
    ts = TokenStream(source)
    p = LogicParser(ts)
    out = getattr(p, fn_name)()
    if not ts.at_kind("eof"):
        raise ts.error("trailing input")
    return out


def parse_term(source: str) -> Term:
    return _full(source, "parse_term")


def parse_formula(source: str) -> Formula:
    return _full(source, "parse_formula")


def parse_assertion(source: str) -> Assertion:
    return _full(source, "parse_assertion")


def parse_index_set(source: str) -> IndexSet:
    return _full(source, "parse_index_set")


def parse_reindexing(source: str) -> Reindexing:
    return _full(source, "parse_reindexing")
