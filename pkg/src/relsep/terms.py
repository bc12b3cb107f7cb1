"""First-order terms and formulas over integers, sequences and hyper-values.

Everything is finite and evaluable under a full environment; under a
partial environment (results of still-open proof goals), terms normalise
to a canonical symbolic form instead. The canonical form doubles as the
assertion normal form used by goal matching and golden tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple, Union

from .values import Index, Loc, Value

SUM_EXPAND_CAP = 512
QUANT_EXPAND_CAP = 4096


class TermError(Exception):
    """Ill-typed term under the given environment."""


class Unresolved(Exception):
    """A term mentions a name (or a product result) that is not bound yet."""

    def __init__(self, what: str):
        self.what = what
        super().__init__(what)


class Term:
    __slots__ = ()


class IndexTerm:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class ITuple(IndexTerm):
    tag: int
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class IVar(IndexTerm):
    name: str


@dataclass(frozen=True, slots=True)
class TInt(Term):
    value: int


@dataclass(frozen=True, slots=True)
class TLit(Term):
    """A literal non-integer value: bool, Loc, or an integer sequence."""

    value: object


@dataclass(frozen=True, slots=True)
class TVar(Term):
    name: str


@dataclass(frozen=True, slots=True)
class TBin(Term):
    op: str  # + - * min
    a: Term
    b: Term


@dataclass(frozen=True, slots=True)
class TIte(Term):
    cond: "Formula"
    then: Term
    orelse: Term


@dataclass(frozen=True, slots=True)
class TLen(Term):
    seq: Term


@dataclass(frozen=True, slots=True)
class TAt(Term):
    seq: Term
    idx: Term


@dataclass(frozen=True, slots=True)
class TSlice(Term):
    seq: Term
    lo: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class TRep(Term):
    value: Term
    count: Term


@dataclass(frozen=True, slots=True)
class TMerge(Term):
    """Sorted duplicate-free union of two sorted integer sequences."""

    a: Term
    b: Term


@dataclass(frozen=True, slots=True)
class TCountLt(Term):
    seq: Term
    bound: Term


@dataclass(frozen=True, slots=True)
class TFind(Term):
    seq: Term
    needle: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class TFind2(Term):
    seq_a: Term
    seq_b: Term
    x: Term
    y: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class TSum(Term):
    var: str
    lo: Term
    hi: Term
    body: Term


@dataclass(frozen=True, slots=True)
class THv(Term):
    hv: Term
    index: IndexTerm


@dataclass(frozen=True, slots=True)
class TRet(Term):
    index: IndexTerm


RET_KEY = "%ret"


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class FBool(Formula):
    value: bool


@dataclass(frozen=True, slots=True)
class FCmp(Formula):
    op: str  # = < <=
    a: Term
    b: Term


@dataclass(frozen=True, slots=True)
class FAnd(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class FOr(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class FNot(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class FImp(Formula):
    a: Formula
    b: Formula


@dataclass(frozen=True, slots=True)
class FIn(Formula):
    item: Term
    seq: Term
    negated: bool = False


@dataclass(frozen=True, slots=True)
class DRange:
    lo: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class DSeq:
    seq: Term


Domain = Union[DRange, DSeq]


@dataclass(frozen=True, slots=True)
class FQuant(Formula):
    kind: str  # forall | exists
    var: str
    dom: Domain
    body: Formula


Env = Mapping[str, object]


def _lookup(env: Env, name: str):
    try:
        return env[name]
    except KeyError:
        raise Unresolved(name) from None


def eval_index(ix: IndexTerm, env: Env) -> Index:
    if type(ix) is IVar:
        v = _lookup(env, ix.name)
        if type(v) is not Index:
            raise TermError(f"{ix.name} is not an index")
        return v
    args = []
    for a in ix.args:
        v = eval_term(a, env)
        if type(v) is not int:
            raise TermError("index arguments must be integers")
        args.append(v)
    return Index(ix.tag, tuple(args))


def eval_term(t: Term, env: Env):
    ty = type(t)
    if ty is TInt:
        return t.value
    if ty is TLit:
        return t.value
    if ty is TVar:
        return _lookup(env, t.name)
    if ty is TBin:
        a = eval_term(t.a, env)
        b = eval_term(t.b, env)
        op = t.op
        if op == "+" and type(a) is Loc:
            if type(b) is not int:
                raise TermError("location offset must be an integer")
            return a.shifted(b)
        if type(a) is not int or type(b) is not int:
            raise TermError(f"{op} on non-integers")
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "min":
            return min(a, b)
        raise TermError(f"unknown operator {op}")
    if ty is TIte:
        return eval_term(t.then if eval_formula(t.cond, env) else t.orelse, env)
    if ty is TLen:
        return len(_seq(eval_term(t.seq, env)))
    if ty is TAt:
        s = _seq(eval_term(t.seq, env))
        i = _int(eval_term(t.idx, env))
        if not (0 <= i < len(s)):
            raise TermError(f"sequence index {i} out of range (len {len(s)})")
        return s[i]
    if ty is TSlice:
        s = _seq(eval_term(t.seq, env))
        lo = _int(eval_term(t.lo, env))
        hi = _int(eval_term(t.hi, env))
        if not (0 <= lo <= hi <= len(s)):
            raise TermError(f"slice [{lo},{hi}) out of range")
        return s[lo:hi]
    if ty is TRep:
        v = _int(eval_term(t.value, env))
        n = _int(eval_term(t.count, env))
        return (v,) * n
    if ty is TMerge:
        a = _seq(eval_term(t.a, env))
        b = _seq(eval_term(t.b, env))
        return tuple(sorted(set(a) | set(b)))
    if ty is TCountLt:
        s = _seq(eval_term(t.seq, env))
        x = _int(eval_term(t.bound, env))
        return sum(1 for v in s if v < x)
    if ty is TFind:
        s = _seq(eval_term(t.seq, env))
        x = eval_term(t.needle, env)
        hi = _int(eval_term(t.hi, env))
        for k in range(min(hi, len(s))):
            if s[k] == x:
                return k
        return -1
    if ty is TFind2:
        sa = _seq(eval_term(t.seq_a, env))
        sb = _seq(eval_term(t.seq_b, env))
        x = eval_term(t.x, env)
        y = eval_term(t.y, env)
        hi = _int(eval_term(t.hi, env))
        for k in range(min(hi, len(sa), len(sb))):
            if sa[k] == x and sb[k] == y:
                return k
        return -1
    if ty is TSum:
        lo = _int(eval_term(t.lo, env))
        hi = _int(eval_term(t.hi, env))
        total = 0
        inner = dict(env)
        for k in range(lo, hi):
            inner[t.var] = k
            total += _int(eval_term(t.body, inner))
        return total
    if ty is THv:
        hv = eval_term(t.hv, env)
        if not isinstance(hv, Mapping):
            raise TermError("application target is not a hyper-value")
        idx = eval_index(t.index, env)
        try:
            return hv[idx]
        except KeyError:
            raise Unresolved(f"result at {idx!r}") from None
    if ty is TRet:
        hv = _lookup(env, RET_KEY)
        idx = eval_index(t.index, env)
        try:
            return hv[idx]
        except KeyError:
            raise Unresolved(f"result at {idx!r}") from None
    raise TypeError(f"unknown term {t!r}")


def _int(v) -> int:
    if type(v) is not int:
        raise TermError(f"expected integer, got {v!r}")
    return v


def _seq(v) -> tuple:
    if type(v) is tuple:
        return v
    if type(v) is list:
        return tuple(v)
    raise TermError(f"expected sequence, got {v!r}")


def eval_formula(f: Formula, env: Env) -> bool:
    ty = type(f)
    if ty is FBool:
        return f.value
    if ty is FCmp:
        a = eval_term(f.a, env)
        b = eval_term(f.b, env)
        if f.op == "=":
            return a == b
        if type(a) is not int or type(b) is not int:
            raise TermError("ordering on non-integers")
        return a < b if f.op == "<" else a <= b
    if ty is FAnd:
        return all(eval_formula(p, env) for p in f.parts)
    if ty is FOr:
        return any(eval_formula(p, env) for p in f.parts)
    if ty is FNot:
        return not eval_formula(f.arg, env)
    if ty is FImp:
        return (not eval_formula(f.a, env)) or eval_formula(f.b, env)
    if ty is FIn:
        item = eval_term(f.item, env)
        seq = _seq(eval_term(f.seq, env))
        return (item in seq) != f.negated
    if ty is FQuant:
        values = domain_values(f.dom, env)
        inner = dict(env)
        if f.kind == "forall":
            for v in values:
                inner[f.var] = v
                if not eval_formula(f.body, inner):
                    return False
            return True
        for v in values:
            inner[f.var] = v
            if eval_formula(f.body, inner):
                return True
        return False
    raise TypeError(f"unknown formula {f!r}")


def domain_values(dom: Domain, env: Env):
    if type(dom) is DRange:
        return range(_int(eval_term(dom.lo, env)), _int(eval_term(dom.hi, env)))
    return _seq(eval_term(dom.seq, env))


# --- substitution ---


def subst_term_vars(t: Term, binding: Mapping[str, object]) -> Term:
    """Substitute terms or plain values for free variables."""

    def wrap(v) -> Term:
        if isinstance(v, Term):
            return v
        return TInt(v) if type(v) is int else TLit(v)

    def fix_ix(ix: IndexTerm) -> IndexTerm:
        if type(ix) is IVar:
            if ix.name in binding:
                v = binding[ix.name]
                if type(v) is Index:
                    return ITuple(v.tag, tuple(TInt(a) for a in v.args))
                raise TermError(f"index binder {ix.name} bound to non-index")
            return ix
        return ITuple(ix.tag, tuple(go(a) for a in ix.args))

    def go(t: Term) -> Term:
        ty = type(t)
        if ty is TVar:
            return wrap(binding[t.name]) if t.name in binding else t
        if ty is TBin:
            return TBin(t.op, go(t.a), go(t.b))
        if ty is TIte:
            return TIte(subst_formula_vars(t.cond, binding), go(t.then), go(t.orelse))
        if ty is TLen:
            return TLen(go(t.seq))
        if ty is TAt:
            return TAt(go(t.seq), go(t.idx))
        if ty is TSlice:
            return TSlice(go(t.seq), go(t.lo), go(t.hi))
        if ty is TRep:
            return TRep(go(t.value), go(t.count))
        if ty is TMerge:
            return TMerge(go(t.a), go(t.b))
        if ty is TCountLt:
            return TCountLt(go(t.seq), go(t.bound))
        if ty is TFind:
            return TFind(go(t.seq), go(t.needle), go(t.hi))
        if ty is TFind2:
            return TFind2(go(t.seq_a), go(t.seq_b), go(t.x), go(t.y), go(t.hi))
        if ty is TSum:
            inner = {k: v for k, v in binding.items() if k != t.var}
            return TSum(t.var, go(t.lo), go(t.hi), subst_term_vars(t.body, inner))
        if ty is THv:
            return THv(go(t.hv), fix_ix(t.index))
        if ty is TRet:
            return TRet(fix_ix(t.index))
        return t

    return go(t)


def subst_formula_vars(f: Formula, binding: Mapping[str, object]) -> Formula:
    ty = type(f)
    if ty is FBool:
        return f
    if ty is FCmp:
        return FCmp(f.op, subst_term_vars(f.a, binding), subst_term_vars(f.b, binding))
    if ty is FAnd:
        return FAnd(tuple(subst_formula_vars(p, binding) for p in f.parts))
    if ty is FOr:
        return FOr(tuple(subst_formula_vars(p, binding) for p in f.parts))
    if ty is FNot:
        return FNot(subst_formula_vars(f.arg, binding))
    if ty is FImp:
        return FImp(subst_formula_vars(f.a, binding), subst_formula_vars(f.b, binding))
    if ty is FIn:
        return FIn(subst_term_vars(f.item, binding), subst_term_vars(f.seq, binding), f.negated)
    if ty is FQuant:
        inner = {k: v for k, v in binding.items() if k != f.var}
        dom = f.dom
        if type(dom) is DRange:
            dom = DRange(subst_term_vars(dom.lo, binding), subst_term_vars(dom.hi, binding))
        else:
            dom = DSeq(subst_term_vars(dom.seq, binding))
        return FQuant(f.kind, f.var, dom, subst_formula_vars(f.body, inner))
    return f


def resolve_ret_term(t: Term, results: Mapping, scope: Env) -> Term:
    """Freeze `ret(i)` terms whose index is evaluable and has a known result.

    Binder-dependent indices are left alone; their meaning flows through
    the evaluation scope instead.
    """

    def go(t: Term) -> Term:
        ty = type(t)
        if ty is TRet:
            try:
                idx = eval_index(t.index, scope)
            except (Unresolved, TermError):
                return t
            if idx in results:
                v = results[idx]
                return TInt(v) if type(v) is int else TLit(v)
            return t
        if ty is TBin:
            return TBin(t.op, go(t.a), go(t.b))
        if ty is TIte:
            return TIte(resolve_ret_formula(t.cond, results, scope), go(t.then), go(t.orelse))
        if ty is TLen:
            return TLen(go(t.seq))
        if ty is TAt:
            return TAt(go(t.seq), go(t.idx))
        if ty is TSlice:
            return TSlice(go(t.seq), go(t.lo), go(t.hi))
        if ty is TRep:
            return TRep(go(t.value), go(t.count))
        if ty is TMerge:
            return TMerge(go(t.a), go(t.b))
        if ty is TCountLt:
            return TCountLt(go(t.seq), go(t.bound))
        if ty is TFind:
            return TFind(go(t.seq), go(t.needle), go(t.hi))
        if ty is TFind2:
            return TFind2(go(t.seq_a), go(t.seq_b), go(t.x), go(t.y), go(t.hi))
        if ty is TSum:
            return TSum(t.var, go(t.lo), go(t.hi),
                        resolve_ret_term(t.body, results, _without(scope, t.var)))
        if ty is THv:
            return THv(go(t.hv), t.index)
        return t

    return go(t)


def resolve_ret_formula(f: Formula, results: Mapping, scope: Env) -> Formula:
    ty = type(f)
    if ty is FCmp:
        return FCmp(f.op, resolve_ret_term(f.a, results, scope), resolve_ret_term(f.b, results, scope))
    if ty is FAnd:
        return FAnd(tuple(resolve_ret_formula(p, results, scope) for p in f.parts))
    if ty is FOr:
        return FOr(tuple(resolve_ret_formula(p, results, scope) for p in f.parts))
    if ty is FNot:
        return FNot(resolve_ret_formula(f.arg, results, scope))
    if ty is FImp:
        return FImp(resolve_ret_formula(f.a, results, scope), resolve_ret_formula(f.b, results, scope))
    if ty is FIn:
        return FIn(resolve_ret_term(f.item, results, scope), resolve_ret_term(f.seq, results, scope), f.negated)
    if ty is FQuant:
        inner = _without(scope, f.var)
        return FQuant(f.kind, f.var, f.dom, resolve_ret_formula(f.body, results, inner))
    return f


# --- canonical (partially evaluated) forms ---


def canon_term(t: Term, env: Env) -> Term:
    """Evaluate as far as the environment allows; normalise the rest."""
    try:
        v = eval_term(t, env)
    except Unresolved:
        pass
    else:
        return _term_of_value(v)
    ty = type(t)
    if ty is TBin:
        a = canon_term(t.a, env)
        b = canon_term(t.b, env)
        if t.op in ("+", "*") and type(a) is not Loc:
            parts = _flatten_bin(t.op, a) + _flatten_bin(t.op, b)
            parts.sort(key=show_term)
            out = parts[0]
            for p in parts[1:]:
                out = TBin(t.op, out, p)
            return out
        return TBin(t.op, a, b)
    if ty is TIte:
        return TIte(canon_formula(t.cond, env), canon_term(t.then, env), canon_term(t.orelse, env))
    if ty is TLen:
        return TLen(canon_term(t.seq, env))
    if ty is TAt:
        return TAt(canon_term(t.seq, env), canon_term(t.idx, env))
    if ty is TSlice:
        return TSlice(canon_term(t.seq, env), canon_term(t.lo, env), canon_term(t.hi, env))
    if ty is TRep:
        return TRep(canon_term(t.value, env), canon_term(t.count, env))
    if ty is TMerge:
        return TMerge(canon_term(t.a, env), canon_term(t.b, env))
    if ty is TCountLt:
        return TCountLt(canon_term(t.seq, env), canon_term(t.bound, env))
    if ty is TFind:
        return TFind(canon_term(t.seq, env), canon_term(t.needle, env), canon_term(t.hi, env))
    if ty is TFind2:
        return TFind2(
            canon_term(t.seq_a, env), canon_term(t.seq_b, env),
            canon_term(t.x, env), canon_term(t.y, env), canon_term(t.hi, env),
        )
    if ty is TSum:
        try:
            lo = _int(eval_term(t.lo, env))
            hi = _int(eval_term(t.hi, env))
        except (Unresolved, TermError):
            lo = hi = None
        if lo is not None and hi - lo <= SUM_EXPAND_CAP:
            inner = dict(env)
            parts = []
            for k in range(lo, hi):
                inner[t.var] = k
                parts.append(canon_term(t.body, inner))
            if not parts:
                return TInt(0)
            return canon_term(_sum_chain(parts), inner)
        return TSum(t.var, canon_term(t.lo, env), canon_term(t.hi, env),
                    canon_term(t.body, _without(env, t.var)))
    if ty is THv:
        return THv(canon_term(t.hv, env), canon_index(t.index, env))
    if ty is TRet:
        return TRet(canon_index(t.index, env))
    return t


def _sum_chain(parts) -> Term:
    # fold into +; constants collapse during the outer canon pass
    ints = sum(p.value for p in parts if type(p) is TInt)
    rest = sorted((p for p in parts if type(p) is not TInt), key=show_term)
    terms = ([TInt(ints)] if ints or not rest else []) + rest
    out = terms[0]
    for p in terms[1:]:
        out = TBin("+", out, p)
    return out


def _flatten_bin(op: str, t: Term):
    if type(t) is TBin and t.op == op:
        return _flatten_bin(op, t.a) + _flatten_bin(op, t.b)
    return [t]


def _without(env: Env, name: str) -> Dict[str, object]:
    return {k: v for k, v in env.items() if k != name}


def _term_of_value(v) -> Term:
    if type(v) is int:
        return TInt(v)
    return TLit(v)


def canon_index(ix: IndexTerm, env: Env) -> IndexTerm:
    try:
        got = eval_index(ix, env)
    except (Unresolved, TermError):
        pass
    else:
        return ITuple(got.tag, tuple(TInt(a) for a in got.args))
    if type(ix) is IVar:
        return ix
    return ITuple(ix.tag, tuple(canon_term(a, env) for a in ix.args))


def canon_formula(f: Formula, env: Env) -> Formula:
    try:
        v = eval_formula(f, env)
    except (Unresolved, TermError):
        pass
    else:
        return FBool(v)
    ty = type(f)
    if ty is FCmp:
        return FCmp(f.op, canon_term(f.a, env), canon_term(f.b, env))
    if ty in (FAnd, FOr):
        parts = []
        for p in f.parts:
            q = canon_formula(p, env)
            if type(q) is FBool:
                if ty is FAnd and not q.value:
                    return FBool(False)
                if ty is FOr and q.value:
                    return FBool(True)
                continue
            parts.append(q)
        if not parts:
            return FBool(ty is FAnd)
        parts = sorted(set(parts), key=show_formula)
        if len(parts) == 1:
            return parts[0]
        return (FAnd if ty is FAnd else FOr)(tuple(parts))
    if ty is FNot:
        inner = canon_formula(f.arg, env)
        if type(inner) is FBool:
            return FBool(not inner.value)
        return FNot(inner)
    if ty is FImp:
        a = canon_formula(f.a, env)
        if type(a) is FBool:
            return canon_formula(f.b, env) if a.value else FBool(True)
        return FImp(a, canon_formula(f.b, env))
    if ty is FIn:
        return FIn(canon_term(f.item, env), canon_term(f.seq, env), f.negated)
    if ty is FQuant:
        try:
            values = list(domain_values(f.dom, env))
        except (Unresolved, TermError):
            values = None
        if values is not None and len(values) <= QUANT_EXPAND_CAP:
            inner = dict(env)
            parts = []
            for v in values:
                inner[f.var] = v
                parts.append(canon_formula(f.body, inner))
            joined = FAnd(tuple(parts)) if f.kind == "forall" else FOr(tuple(parts))
            return canon_formula(joined, env)
        return FQuant(f.kind, f.var, f.dom, canon_formula(f.body, _without(env, f.var)))
    return f


# --- printing (canonical, parseable; see docs/grammar.md) ---


def show_index(ix: IndexTerm) -> str:
    if type(ix) is IVar:
        return ix.name
    inner = ", ".join([str(ix.tag)] + [show_term(a) for a in ix.args])
    return f"idx({inner})"


def show_term(t: Term) -> str:
    ty = type(t)
    if ty is TInt:
        return str(t.value)
    if ty is TLit:
        v = t.value
        if type(v) is bool:
            return "true" if v else "false"
        if type(v) is tuple:
            return "[" + ", ".join(str(x) for x in v) + "]"
        if type(v) is Loc:
            return f"loc({v.block}, {v.off}, {v.length})"
        return repr(v)
    if ty is TVar:
        return t.name
    if ty is TBin:
        if t.op == "min":
            return f"min({show_term(t.a)}, {show_term(t.b)})"
        return f"({show_term(t.a)} {t.op} {show_term(t.b)})"
    if ty is TIte:
        return f"ite({show_formula(t.cond)}, {show_term(t.then)}, {show_term(t.orelse)})"
    if ty is TLen:
        return f"len({show_term(t.seq)})"
    if ty is TAt:
        return f"at({show_term(t.seq)}, {show_term(t.idx)})"
    if ty is TSlice:
        return f"slice({show_term(t.seq)}, {show_term(t.lo)}, {show_term(t.hi)})"
    if ty is TRep:
        return f"rep({show_term(t.value)}, {show_term(t.count)})"
    if ty is TMerge:
        return f"merge({show_term(t.a)}, {show_term(t.b)})"
    if ty is TCountLt:
        return f"count_lt({show_term(t.seq)}, {show_term(t.bound)})"
    if ty is TFind:
        return f"find({show_term(t.seq)}, {show_term(t.needle)}, {show_term(t.hi)})"
    if ty is TFind2:
        return (f"find2({show_term(t.seq_a)}, {show_term(t.seq_b)}, "
                f"{show_term(t.x)}, {show_term(t.y)}, {show_term(t.hi)})")
    if ty is TSum:
        return f"sum({t.var}, {show_term(t.lo)}, {show_term(t.hi)}, {show_term(t.body)})"
    if ty is THv:
        return f"{show_term(t.hv)}({show_index(t.index)})"
    if ty is TRet:
        return f"ret({show_index(t.index)})"
    return repr(t)


def show_formula(f: Formula) -> str:
    ty = type(f)
    if ty is FBool:
        return "true" if f.value else "false"
    if ty is FCmp:
        return f"({show_term(f.a)} {f.op} {show_term(f.b)})"
    if ty is FAnd:
        return "(" + " && ".join(show_formula(p) for p in f.parts) + ")"
    if ty is FOr:
        return "(" + " || ".join(show_formula(p) for p in f.parts) + ")"
    if ty is FNot:
        return f"not {show_formula(f.arg)}"
    if ty is FImp:
        return f"({show_formula(f.a)} -> {show_formula(f.b)})"
    if ty is FIn:
        word = "notin" if f.negated else "in"
        return f"({show_term(f.item)} {word} {show_term(f.seq)})"
    if ty is FQuant:
        if type(f.dom) is DRange:
            dom = f"[{show_term(f.dom.lo)}, {show_term(f.dom.hi)})"
        else:
            dom = f"elems({show_term(f.dom.seq)})"
        return f"{f.kind} {f.var} in {dom}: {show_formula(f.body)}"
    return repr(f)


# --- convenience constructors used by the suite and tests ---


def tv(name: str) -> TVar:
    return TVar(name)


def ti(n: int) -> TInt:
    return TInt(n)


def ix(tag: int, *args) -> ITuple:
    return ITuple(tag, tuple(_as_term(a) for a in args))


def _as_term(a) -> Term:
    if isinstance(a, Term):
        return a
    if type(a) is int:
        return TInt(a)
    if type(a) is str:
        return TVar(a)
    return TLit(a)


def add(a, b) -> Term:
    return TBin("+", _as_term(a), _as_term(b))


def sub(a, b) -> Term:
    return TBin("-", _as_term(a), _as_term(b))


def mul(a, b) -> Term:
    return TBin("*", _as_term(a), _as_term(b))


def at(s, i) -> Term:
    return TAt(_as_term(s), _as_term(i))


def eq(a, b) -> FCmp:
    return FCmp("=", _as_term(a), _as_term(b))


def lt(a, b) -> FCmp:
    return FCmp("<", _as_term(a), _as_term(b))


def le(a, b) -> FCmp:
    return FCmp("<=", _as_term(a), _as_term(b))
