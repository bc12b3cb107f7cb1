"""Hyper-heap assertions: satisfaction, locality, reindexing, entailment.

Satisfaction is precision-first: points-to and array atoms determine their
fragments exactly, so star splitting never searches. Existentials carry a
declared finite witness domain or are pinned structurally (an array or
points-to atom, or a pure equality, fixes the witness from the heap).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from .hyper import HyperHeap, IndexSet
from .lang.heap import Heap
from .terms import (
    DRange,
    DSeq,
    Env,
    FAnd,
    FBool,
    FCmp,
    Formula,
    ITuple,
    IVar,
    IndexTerm,
    TAt,
    TInt,
    TLen,
    TLit,
    TVar,
    Term,
    TermError,
    Unresolved,
    canon_formula,
    canon_index,
    canon_term,
    domain_values,
    eval_formula,
    eval_index,
    eval_term,
    show_formula,
    show_index,
    show_term,
)
from .values import Index, Loc, Value


class AssertError(Exception):
    pass


class UnboundedExists(AssertError):
    """An existential without a witness domain could not be pinned."""


class NonInjective(AssertError):
    pass


class UnmappedIndex(AssertError):
    pass


class BudgetExceeded(Exception):
    pass


class Assertion:
    __slots__ = ()

    def __mul__(self, other: "Assertion") -> "Assertion":
        return star(self, other)


@dataclass(frozen=True, slots=True)
class AEmp(Assertion):
    pass


@dataclass(frozen=True, slots=True)
class APts(Assertion):
    loc: Term
    index: IndexTerm
    val: Term


@dataclass(frozen=True, slots=True)
class AArr(Assertion):
    loc: Term
    index: IndexTerm
    seq: Term


@dataclass(frozen=True, slots=True)
class APure(Assertion):
    formula: Formula


@dataclass(frozen=True, slots=True)
class AStar(Assertion):
    parts: Tuple[Assertion, ...]


@dataclass(frozen=True, slots=True)
class ABigStar(Assertion):
    """Iterated star over an integer range or the members of a sequence."""

    var: str
    dom: Union[DRange, DSeq]
    body: Assertion
    where: Optional[Formula] = None


@dataclass(frozen=True, slots=True)
class ABigStarSet(Assertion):
    """Iterated star over an index set; the binder is an Index."""

    var: str
    indices: IndexSet
    body: Assertion


@dataclass(frozen=True, slots=True)
class WRange:
    lo: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class WSeqs:
    max_len: int
    lo: int
    hi: int


WitnessDom = Union[WRange, WSeqs, None]


@dataclass(frozen=True, slots=True)
class AExists(Assertion):
    var: str
    body: Assertion
    dom: WitnessDom = None


@dataclass(frozen=True, slots=True)
class ARepl(Assertion):
    """The paper's per-component replication: one copy per ambient index."""

    var: str
    body: Assertion


EMP = AEmp()


def star(*parts: Assertion) -> Assertion:
    flat: List[Assertion] = []
    for p in parts:
        if type(p) is AStar:
            flat.extend(p.parts)
        elif type(p) is not AEmp:
            flat.append(p)
    if not flat:
        return EMP
    if len(flat) == 1:
        return flat[0]
    return AStar(tuple(flat))


def pure(f: Formula) -> Assertion:
    return APure(f)


def expand_replication(a: Assertion, ambient: FrozenSet[Index]) -> Assertion:
    """Eliminate (.)-replication against the ambient index set."""
    t = type(a)
    if t is ARepl:
        parts = [
            _subst_index_var(expand_replication(a.body, ambient), a.var, idx)
            for idx in sorted(ambient)
        ]
        return star(*parts)
    if t is AStar:
        return star(*(expand_replication(p, ambient) for p in a.parts))
    if t is ABigStar:
        return ABigStar(a.var, a.dom, expand_replication(a.body, ambient), a.where)
    if t is ABigStarSet:
        return ABigStarSet(a.var, a.indices, expand_replication(a.body, ambient))
    if t is AExists:
        return AExists(a.var, expand_replication(a.body, ambient), a.dom)
    return a


def _subst_index_var(a: Assertion, var: str, idx: Index) -> Assertion:
    """Replace an Index-valued binder with a concrete index."""

    def fix_ix(ix: IndexTerm) -> IndexTerm:
        if type(ix) is IVar and ix.name == var:
            return ITuple(idx.tag, tuple(TInt(x) for x in idx.args))
        return ix

    t = type(a)
    if t is APts:
        return APts(a.loc, fix_ix(a.index), a.val)
    if t is AArr:
        return AArr(a.loc, fix_ix(a.index), a.seq)
    if t is AStar:
        return AStar(tuple(_subst_index_var(p, var, idx) for p in a.parts))
    if t is ABigStar:
        if a.var == var:
            return a
        return ABigStar(a.var, a.dom, _subst_index_var(a.body, var, idx), a.where)
    if t is ABigStarSet:
        if a.var == var:
            return a
        return ABigStarSet(a.var, a.indices, _subst_index_var(a.body, var, idx))
    if t is AExists:
        return AExists(a.var, _subst_index_var(a.body, var, idx), a.dom)
    if t is ARepl:
        if a.var == var:
            return a
        return ARepl(a.var, _subst_index_var(a.body, var, idx))
    return a


def subst_assertion(a: Assertion, binding: Mapping[str, object]) -> Assertion:
    """Substitute terms/values (or Index values) for free logical variables."""
    from .terms import subst_formula_vars, subst_term_vars

    if not binding:
        return a

    def fix_ix(ix: IndexTerm) -> IndexTerm:
        if type(ix) is IVar:
            if ix.name in binding:
                v = binding[ix.name]
                if type(v) is Index:
                    return ITuple(v.tag, tuple(TInt(x) for x in v.args))
                raise TermError(f"index binder {ix.name} bound to non-index")
            return ix
        return ITuple(ix.tag, tuple(subst_term_vars(t, binding) for t in ix.args))

    t = type(a)
    if t is AEmp:
        return a
    if t is APts:
        return APts(subst_term_vars(a.loc, binding), fix_ix(a.index), subst_term_vars(a.val, binding))
    if t is AArr:
        return AArr(subst_term_vars(a.loc, binding), fix_ix(a.index), subst_term_vars(a.seq, binding))
    if t is APure:
        return APure(subst_formula_vars(a.formula, binding))
    if t is AStar:
        return AStar(tuple(subst_assertion(p, binding) for p in a.parts))
    if t is ABigStar:
        inner = {k: v for k, v in binding.items() if k != a.var}
        dom = a.dom
        if type(dom) is DRange:
            dom = DRange(subst_term_vars(dom.lo, binding), subst_term_vars(dom.hi, binding))
        else:
            dom = DSeq(subst_term_vars(dom.seq, binding))
        where = subst_formula_vars(a.where, inner) if a.where is not None else None
        return ABigStar(a.var, dom, subst_assertion(a.body, inner), where)
    if t is ABigStarSet:
        inner = {k: v for k, v in binding.items() if k != a.var}
        return ABigStarSet(a.var, a.indices, subst_assertion(a.body, inner))
    if t is AExists:
        inner = {k: v for k, v in binding.items() if k != a.var}
        dom = a.dom
        if type(dom) is WRange:
            dom = WRange(subst_term_vars(dom.lo, binding), subst_term_vars(dom.hi, binding))
        return AExists(a.var, subst_assertion(a.body, inner), dom)
    if t is ARepl:
        inner = {k: v for k, v in binding.items() if k != a.var}
        return ARepl(a.var, subst_assertion(a.body, inner))
    raise TypeError(f"unknown assertion {a!r}")


def resolve_ret_assertion(a: Assertion, results: Mapping, scope: Env) -> Assertion:
    """Freeze known component results inside an assertion (see resolve_ret_term)."""
    from .terms import resolve_ret_formula, resolve_ret_term

    def fix_t(t: Term) -> Term:
        return resolve_ret_term(t, results, scope)

    t = type(a)
    if t is AEmp:
        return a
    if t is APts:
        return APts(fix_t(a.loc), a.index, fix_t(a.val))
    if t is AArr:
        return AArr(fix_t(a.loc), a.index, fix_t(a.seq))
    if t is APure:
        return APure(resolve_ret_formula(a.formula, results, scope))
    if t is AStar:
        return AStar(tuple(resolve_ret_assertion(p, results, scope) for p in a.parts))
    if t is ABigStar:
        inner = {k: v for k, v in scope.items() if k != a.var}
        where = resolve_ret_formula(a.where, results, inner) if a.where is not None else None
        return ABigStar(a.var, a.dom, resolve_ret_assertion(a.body, results, inner), where)
    if t is ABigStarSet:
        inner = {k: v for k, v in scope.items() if k != a.var}
        return ABigStarSet(a.var, a.indices, resolve_ret_assertion(a.body, results, inner))
    if t is AExists:
        inner = {k: v for k, v in scope.items() if k != a.var}
        return AExists(a.var, resolve_ret_assertion(a.body, results, inner), a.dom)
    if t is ARepl:
        inner = {k: v for k, v in scope.items() if k != a.var}
        return ARepl(a.var, resolve_ret_assertion(a.body, results, inner))
    raise TypeError(f"unknown assertion {a!r}")


# --- satisfaction ---

CellMap = Dict[Tuple[Loc, Index], Value]


def _atom_cells_pts(a: APts, env: Env) -> Optional[CellMap]:
    loc = eval_term(a.loc, env)
    if type(loc) is not Loc:
        raise TermError(f"points-to base is not a location: {show_term(a.loc)}")
    idx = eval_index(a.index, env)
    if not (0 <= loc.off < loc.length):
        return None  # outside its block: unsatisfiable
    return {(loc, idx): eval_term(a.val, env)}


def _atom_cells_arr(a: AArr, env: Env) -> Optional[CellMap]:
    loc = eval_term(a.loc, env)
    if type(loc) is not Loc:
        raise TermError(f"array base is not a location: {show_term(a.loc)}")
    idx = eval_index(a.index, env)
    seq = eval_term(a.seq, env)
    if type(seq) is not tuple:
        raise TermError(f"array payload is not a sequence: {show_term(a.seq)}")
    if loc.off != 0 or loc.length != len(seq):
        return None
    return {(loc.shifted(k), idx): seq[k] for k in range(len(seq))}


def _merge_disjoint(a: CellMap, b: CellMap) -> Optional[CellMap]:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for k, v in b.items():
        if k in out:
            return None
        out[k] = v
    return out


def _witnesses(dom: WitnessDom, body: Assertion, env: Env, h: Optional[HyperHeap], var: str):
    if isinstance(dom, WRange):
        lo = eval_term(dom.lo, env)
        hi = eval_term(dom.hi, env)
        return list(range(lo, hi))
    if isinstance(dom, WSeqs):
        vals = range(dom.lo, dom.hi + 1)
        out = []
        for n in range(dom.max_len + 1):
            out.extend(itertools.product(vals, repeat=n))
        return out
    pinned = _pin_witness(body, env, h, var)
    if pinned is _NO_PIN:
        raise UnboundedExists(f"no witness domain for {var}")
    return [pinned]


_NO_PIN = object()


def _pin_witness(a: Assertion, env: Env, h: Optional[HyperHeap], var: str):
    """Derive the unique witness from spatial shape or a pure equality."""
    t = type(a)
    if t is AArr and type(a.seq) is TVar and a.seq.name == var and h is not None:
        try:
            loc = eval_term(a.loc, env)
            idx = eval_index(a.index, env)
        except (Unresolved, TermError):
            return _NO_PIN
        if type(loc) is not Loc:
            return _NO_PIN
        part = h.parts.get(idx)
        if part is None:
            return tuple()
        out = []
        for k in range(loc.length):
            v = part.cells.get(Loc(loc.block, k, loc.length))
            if v is None:
                return tuple()
            out.append(v)
        return tuple(out)
    if t is APts and type(a.val) is TVar and a.val.name == var and h is not None:
        try:
            loc = eval_term(a.loc, env)
            idx = eval_index(a.index, env)
        except (Unresolved, TermError):
            return _NO_PIN
        part = h.parts.get(idx)
        if part is not None and type(loc) is Loc and loc in part.cells:
            return part.cells[loc]
        return _NO_PIN
    if t is APure and type(a.formula) is FCmp and a.formula.op == "=":
        for mine, other in ((a.formula.a, a.formula.b), (a.formula.b, a.formula.a)):
            if type(mine) is TVar and mine.name == var:
                try:
                    return eval_term(other, env)
                except (Unresolved, TermError):
                    continue
        return _NO_PIN
    if t is AStar:
        for p in a.parts:
            got = _pin_witness(p, env, h, var)
            if got is not _NO_PIN:
                return got
    return _NO_PIN


def _branches(a: Assertion, env: Dict[str, object], h: Optional[HyperHeap]) -> Iterator[Optional[CellMap]]:
    """Yield candidate exact cell footprints; None never yielded (pruned)."""
    t = type(a)
    if t is AEmp:
        yield {}
        return
    if t is APure:
        if eval_formula(a.formula, env):
            yield {}
        return
    if t is APts:
        got = _atom_cells_pts(a, env)
        if got is not None:
            yield got
        return
    if t is AArr:
        got = _atom_cells_arr(a, env)
        if got is not None:
            yield got
        return
    if t is AStar:
        def go(k: int, acc: CellMap) -> Iterator[CellMap]:
            if k == len(a.parts):
                yield acc
                return
            for part_cells in _branches(a.parts[k], env, h):
                merged = _merge_disjoint(acc, part_cells)
                if merged is not None:
                    yield from go(k + 1, merged)

        yield from go(0, {})
        return
    if t is ABigStar:
        values = [
            v
            for v in domain_values(a.dom, env)
            if a.where is None or eval_formula(a.where, {**env, a.var: v})
        ]

        def go_range(k: int, acc: CellMap) -> Iterator[CellMap]:
            if k == len(values):
                yield acc
                return
            inner = {**env, a.var: values[k]}
            for part_cells in _branches(a.body, inner, h):
                merged = _merge_disjoint(acc, part_cells)
                if merged is not None:
                    yield from go_range(k + 1, merged)

        yield from go_range(0, {})
        return
    if t is ABigStarSet:
        indices = sorted(a.indices.materialize(env))

        def go_set(k: int, acc: CellMap) -> Iterator[CellMap]:
            if k == len(indices):
                yield acc
                return
            inner = {**env, a.var: indices[k]}
            for part_cells in _branches(a.body, inner, h):
                merged = _merge_disjoint(acc, part_cells)
                if merged is not None:
                    yield from go_set(k + 1, merged)

        yield from go_set(0, {})
        return
    if t is AExists:
        for w in _witnesses(a.dom, a.body, env, h, a.var):
            inner = {**env, a.var: w}
            yield from _branches(a.body, inner, h)
        return
    if t is ARepl:
        raise AssertError("replication must be expanded before satisfaction")
    raise TypeError(f"unknown assertion {a!r}")


def satisfies(
    h: HyperHeap,
    env: Env,
    a: Assertion,
    ambient: Optional[FrozenSet[Index]] = None,
) -> bool:
    """Exact separation-logic satisfaction against the full hyper-heap."""
    if ambient is not None:
        a = expand_replication(a, ambient)
    target = h.cells_flat()
    scope = dict(env)
    for cells in _branches(a, scope, h):
        if cells == target:
            return True
    return False


def satisfying_footprints(a: Assertion, env: Env, h: Optional[HyperHeap] = None) -> Iterator[CellMap]:
    """All candidate exact footprints of an assertion (used by entailment)."""
    yield from _branches(a, dict(env), h)


# --- locality (the structural decomposition check) ---


def is_local(
    a: Assertion,
    indices: FrozenSet[Index],
    env: Env,
    ambient: Optional[FrozenSet[Index]] = None,
) -> bool:
    """True only if every spatial atom provably names an index inside S.

    A sound under-approximation: anything it cannot decompose or evaluate
    yields False, never True.
    """
    if ambient is not None:
        a = expand_replication(a, ambient)
    try:
        return _is_local(a, indices, dict(env))
    except (Unresolved, TermError, AssertError):
        return False


def _is_local(a: Assertion, indices: FrozenSet[Index], env: Dict[str, object]) -> bool:
    t = type(a)
    if t in (AEmp, APure):
        return True
    if t in (APts, AArr):
        return eval_index(a.index, env) in indices
    if t is AStar:
        return all(_is_local(p, indices, env) for p in a.parts)
    if t is ABigStar:
        for v in domain_values(a.dom, env):
            inner = {**env, a.var: v}
            if a.where is not None and not eval_formula(a.where, inner):
                continue
            if not _is_local(a.body, indices, inner):
                return False
        return True
    if t is ABigStarSet:
        for idx in a.indices.materialize(env):
            if not _is_local(a.body, indices, {**env, a.var: idx}):
                return False
        return True
    if t is AExists:
        return _is_local(a.body, indices, env)
    return False


# --- injective reindexing ---


@dataclass(frozen=True)
class Reindexing:
    """Per-tag tuple transformers: tag -> (params, output index template)."""

    clauses: Mapping[int, Tuple[Tuple[str, ...], ITuple]]

    def apply_index(self, idx: Index, env: Optional[Env] = None) -> Index:
        try:
            params, out = self.clauses[idx.tag]
        except KeyError:
            raise UnmappedIndex(f"no clause for tag {idx.tag}") from None
        if len(params) != len(idx.args):
            raise UnmappedIndex(f"clause arity mismatch for {idx!r}")
        scope = dict(env) if env else {}
        scope.update(zip(params, idx.args))
        return eval_index(out, scope)

    def apply_ixterm(self, ix: IndexTerm) -> IndexTerm:
        if type(ix) is IVar:
            raise UnmappedIndex("cannot rewrite a symbolic index binder")
        try:
            params, out = self.clauses[ix.tag]
        except KeyError:
            raise UnmappedIndex(f"no clause for tag {ix.tag}") from None
        if len(params) != len(ix.args):
            raise UnmappedIndex(f"clause arity mismatch for tag {ix.tag}")
        binding = dict(zip(params, ix.args))
        return ITuple(out.tag, tuple(_subst_term_vars(t, binding) for t in out.args))

    def check_injective(self, domain: FrozenSet[Index], env: Optional[Env] = None) -> None:
        image = {self.apply_index(i, env) for i in domain}
        if len(image) != len(domain):
            raise NonInjective(f"mapping merges indices of {sorted(domain)}")

    def map_set(self, domain: FrozenSet[Index], env: Optional[Env] = None) -> FrozenSet[Index]:
        self.check_injective(domain, env)
        return frozenset(self.apply_index(i, env) for i in domain)

    def backmap(self, domain: FrozenSet[Index], env: Optional[Env] = None) -> Dict[Index, Index]:
        self.check_injective(domain, env)
        return {self.apply_index(i, env): i for i in domain}


def _subst_term_vars(t: Term, binding: Mapping[str, object]) -> Term:
    from .terms import subst_term_vars

    return subst_term_vars(t, binding)


def reindex(a: Assertion, phi: Reindexing) -> Assertion:
    """Push the reindexing through the connectives down to spatial atoms."""
    t = type(a)
    if t is APts:
        return APts(a.loc, phi.apply_ixterm(a.index), _reindex_term(a.val, phi))
    if t is AArr:
        return AArr(a.loc, phi.apply_ixterm(a.index), _reindex_term(a.seq, phi))
    if t is APure:
        return APure(_reindex_formula(a.formula, phi))
    if t is AStar:
        return AStar(tuple(reindex(p, phi) for p in a.parts))
    if t is ABigStar:
        return ABigStar(a.var, a.dom, reindex(a.body, phi), a.where)
    if t is ABigStarSet:
        raise UnmappedIndex("reindexing over a set binder requires materialisation")
    if t is AExists:
        return AExists(a.var, reindex(a.body, phi), a.dom)
    if t is ARepl:
        return ARepl(a.var, reindex(a.body, phi))
    return a


def _reindex_term(t: Term, phi: Reindexing) -> Term:
    from .terms import TBin, TIte, TLen, TAt, TSlice, TSum, THv, TRet, TCountLt, TMerge, TFind, TFind2, TRep

    ty = type(t)
    if ty is THv:
        return THv(_reindex_term(t.hv, phi), phi.apply_ixterm(t.index))
    if ty is TRet:
        return TRet(phi.apply_ixterm(t.index))
    if ty is TBin:
        return TBin(t.op, _reindex_term(t.a, phi), _reindex_term(t.b, phi))
    if ty is TIte:
        return TIte(_reindex_formula(t.cond, phi), _reindex_term(t.then, phi), _reindex_term(t.orelse, phi))
    if ty is TLen:
        return TLen(_reindex_term(t.seq, phi))
    if ty is TAt:
        return TAt(_reindex_term(t.seq, phi), _reindex_term(t.idx, phi))
    if ty is TSlice:
        return TSlice(_reindex_term(t.seq, phi), _reindex_term(t.lo, phi), _reindex_term(t.hi, phi))
    if ty is TRep:
        return TRep(_reindex_term(t.value, phi), _reindex_term(t.count, phi))
    if ty is TSum:
        return TSum(t.var, _reindex_term(t.lo, phi), _reindex_term(t.hi, phi), _reindex_term(t.body, phi))
    if ty is TMerge:
        return TMerge(_reindex_term(t.a, phi), _reindex_term(t.b, phi))
    if ty is TCountLt:
        return TCountLt(_reindex_term(t.seq, phi), _reindex_term(t.bound, phi))
    if ty is TFind:
        return TFind(_reindex_term(t.seq, phi), _reindex_term(t.needle, phi), _reindex_term(t.hi, phi))
    if ty is TFind2:
        return TFind2(
            _reindex_term(t.seq_a, phi), _reindex_term(t.seq_b, phi),
            _reindex_term(t.x, phi), _reindex_term(t.y, phi), _reindex_term(t.hi, phi),
        )
    return t


def _reindex_formula(f: Formula, phi: Reindexing) -> Formula:
    from .terms import FAnd, FOr, FNot, FImp, FIn, FQuant

    ty = type(f)
    if ty is FCmp:
        return FCmp(f.op, _reindex_term(f.a, phi), _reindex_term(f.b, phi))
    if ty is FAnd:
        return FAnd(tuple(_reindex_formula(p, phi) for p in f.parts))
    if ty is FOr:
        return FOr(tuple(_reindex_formula(p, phi) for p in f.parts))
    if ty is FNot:
        return FNot(_reindex_formula(f.arg, phi))
    if ty is FImp:
        return FImp(_reindex_formula(f.a, phi), _reindex_formula(f.b, phi))
    if ty is FIn:
        return FIn(_reindex_term(f.item, phi), _reindex_term(f.seq, phi), f.negated)
    if ty is FQuant:
        return FQuant(f.kind, f.var, f.dom, _reindex_formula(f.body, phi))
    return f


def relocate_hyper(h: HyperHeap, phi: Reindexing, env: Optional[Env] = None) -> HyperHeap:
    """Move each component of the hyper-heap to its image index."""
    out = HyperHeap()
    for idx, part in h.parts.items():
        out.set_component(phi.apply_index(idx, env), part.clone())
    return out


# --- bounded entailment ---


@dataclass
class BoundedModel:
    """Enumeration domains for the free variables of an entailment check."""

    var_domains: Dict[str, List[object]]
    extra_heaps: List[HyperHeap]
    budget: int = 20000

    def __init__(self, var_domains=None, extra_heaps=None, budget: int = 20000):
        self.var_domains = dict(var_domains) if var_domains else {}
        self.extra_heaps = list(extra_heaps) if extra_heaps else []
        self.budget = budget


@dataclass
class EntailVerdict:
    holds: bool
    checked: int
    counterexample: Optional[Tuple[HyperHeap, Dict[str, object]]] = None


def heap_from_cells(cells: CellMap) -> HyperHeap:
    out = HyperHeap()
    for (loc, idx), v in cells.items():
        part = out.parts.get(idx)
        if part is None:
            part = Heap()
            out.parts[idx] = part
        part.cells[loc] = v
        part.blocks[loc.block] = loc.length
    return out


def entails_bounded(
    a: Assertion,
    b: Assertion,
    model: Optional[BoundedModel] = None,
    env: Optional[Env] = None,
    ambient: Optional[FrozenSet[Index]] = None,
) -> EntailVerdict:
    """Check a |- b over every model state satisfying a. Bounded evidence.

    The satisfying states of `a` enumerate from its own footprints (complete
    for precise assertions) together with any extra heaps the model lists.
    """
    model = model or BoundedModel()
    if ambient is not None:
        a = expand_replication(a, ambient)
        b = expand_replication(b, ambient)
    base_env = dict(env) if env else {}
    names = sorted(model.var_domains)
    checked = 0
    for valuation in itertools.product(*(model.var_domains[n] for n in names)):
        scope = dict(base_env)
        scope.update(zip(names, valuation))
        candidates: List[HyperHeap] = []
        try:
            for cells in satisfying_footprints(a, scope):
                candidates.append(heap_from_cells(cells))
        except Unresolved as u:
            raise AssertError(f"entailment lhs is not closed: {u}") from None
        candidates.extend(model.extra_heaps)
        for h in candidates:
            checked += 1
            if checked > model.budget:
                raise BudgetExceeded(f"entailment model exceeds {model.budget} states")
            if not satisfies(h, scope, a):
                continue
            if not satisfies(h, scope, b):
                return EntailVerdict(False, checked, (h, scope))
    return EntailVerdict(True, checked)


# --- canonical normal form (the pretty-printer's structure) ---


@dataclass(frozen=True)
class CanonForm:
    cells: Tuple[Tuple[Loc, Index, Term], ...]
    pures: Tuple[Formula, ...]
    atoms: Tuple[Tuple[str, str], ...]  # unplaceable spatial atoms, printed
    exists: Tuple[Tuple[str, CanonForm], ...]

    def is_emp(self) -> bool:
        return not self.cells and not self.atoms and not self.exists

    def holds_nothing_false(self) -> bool:
        return all(not (type(p) is FBool and not p.value) for p in self.pures)


def canonize(
    a: Assertion,
    env: Env,
    ambient: Optional[FrozenSet[Index]] = None,
    _fresh: Optional[List[int]] = None,
) -> CanonForm:
    if ambient is not None:
        a = expand_replication(a, ambient)
    fresh = _fresh if _fresh is not None else [0]
    cells: Dict[Tuple[Index, Loc], Term] = {}
    pures: List[Formula] = []
    atoms: List[Tuple[str, str]] = []
    exists: List[Tuple[str, CanonForm]] = []
    _collect(a, dict(env), cells, pures, atoms, exists, fresh)
    cell_items = tuple(
        (loc, idx, val) for (idx, loc), val in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    )
    pure_items = tuple(sorted(
        (p for p in (canon_formula(q, env) for q in pures) if p != FBool(True)),
        key=show_formula,
    ))
    return CanonForm(cell_items, pure_items, tuple(sorted(atoms)), tuple(exists))


def _collect(a, env, cells, pures, atoms, exists, fresh) -> None:
    t = type(a)
    if t is AEmp:
        return
    if t is APure:
        pures.append(canon_formula(a.formula, env))
        return
    if t is APts:
        try:
            loc = eval_term(a.loc, env)
            idx = eval_index(a.index, env)
        except (Unresolved, TermError):
            atoms.append(("pt", f"pt({show_term(canon_term(a.loc, env))}, "
                               f"{show_index(canon_index(a.index, env))}, "
                               f"{show_term(canon_term(a.val, env))})"))
            return
        key = (idx, loc)
        if key in cells:
            pures.append(FBool(False))
            return
        cells[key] = canon_term(a.val, env)
        return
    if t is AArr:
        try:
            loc = eval_term(a.loc, env)
            idx = eval_index(a.index, env)
        except (Unresolved, TermError):
            atoms.append(("arr", f"arr({show_term(canon_term(a.loc, env))}, "
                                f"{show_index(canon_index(a.index, env))}, "
                                f"{show_term(canon_term(a.seq, env))})"))
            return
        if type(loc) is not Loc or loc.off != 0:
            pures.append(FBool(False))
            return
        try:
            seq = eval_term(a.seq, env)
        except (Unresolved, TermError):
            seq = None
        if seq is not None:
            if len(seq) != loc.length:
                pures.append(FBool(False))
                return
            vals = [canon_term(TLit(v) if type(v) is not int else TInt(v), env) for v in seq]
        else:
            seq_c = canon_term(a.seq, env)
            pures.append(canon_formula(FCmp("=", TLen(seq_c), TInt(loc.length)), env))
            vals = [canon_term(TAt(seq_c, TInt(k)), env) for k in range(loc.length)]
        for k, v in enumerate(vals):
            key = (idx, loc.shifted(k))
            if key in cells:
                pures.append(FBool(False))
                return
            cells[key] = v
        return
    if t is AStar:
        for p in a.parts:
            _collect(p, env, cells, pures, atoms, exists, fresh)
        return
    if t is ABigStar:
        try:
            values = list(domain_values(a.dom, env))
        except (Unresolved, TermError):
            atoms.append(("bigstar", f"<unexpandable bigstar {a.var}>"))
            return
        for v in values:
            inner = {**env, a.var: v}
            if a.where is not None and not eval_formula(a.where, inner):
                continue
            _collect(a.body, inner, cells, pures, atoms, exists, fresh)
        return
    if t is ABigStarSet:
        for idx in sorted(a.indices.materialize(env)):
            _collect(a.body, {**env, a.var: idx}, cells, pures, atoms, exists, fresh)
        return
    if t is AExists:
        name = f"%e{fresh[0]}"
        fresh[0] += 1
        renamed = _rename_var(a.body, a.var, name)
        sub = canonize(renamed, {k: v for k, v in env.items() if k != a.var}, None, fresh)
        exists.append((name, sub))
        return
    if t is ARepl:
        raise AssertError("replication must be expanded before normalisation")
    raise TypeError(f"unknown assertion {a!r}")


def _rename_var(a: Assertion, old: str, new: str) -> Assertion:
    def fix_t(t: Term) -> Term:
        return _subst_term_vars(t, {old: TVar(new)})

    t = type(a)
    if t is APts:
        return APts(fix_t(a.loc), a.index, fix_t(a.val))
    if t is AArr:
        return AArr(fix_t(a.loc), a.index, fix_t(a.seq))
    if t is APure:
        return APure(_rename_formula(a.formula, old, new))
    if t is AStar:
        return AStar(tuple(_rename_var(p, old, new) for p in a.parts))
    if t is ABigStar:
        if a.var == old:
            return a
        return ABigStar(a.var, a.dom, _rename_var(a.body, old, new), a.where)
    if t is ABigStarSet:
        if a.var == old:
            return a
        return ABigStarSet(a.var, a.indices, _rename_var(a.body, old, new))
    if t is AExists:
        if a.var == old:
            return a
        return AExists(a.var, _rename_var(a.body, old, new), a.dom)
    return a


def _rename_formula(f: Formula, old: str, new: str) -> Formula:
    from .terms import subst_formula_vars

    return subst_formula_vars(f, {old: TVar(new)})


def show_canon(c: CanonForm) -> str:
    lines = []
    for loc, idx, val in c.cells:
        lines.append(f"pt(loc({loc.block}, {loc.off}, {loc.length}), {idx!r}, {show_term(val)})")
    lines.extend(text for _, text in c.atoms)
    lines.extend(f"[{show_formula(p)}]" for p in c.pures)
    for name, sub in c.exists:
        inner = show_canon(sub).replace("\n", "\n  ")
        lines.append(f"exists {name} {{\n  {inner}\n}}")
    return "\n".join(lines) if lines else "emp"


def show_assertion(a: Assertion) -> str:
    t = type(a)
    if t is AEmp:
        return "emp"
    if t is APts:
        return f"pt({show_term(a.loc)}, {show_index(a.index)}, {show_term(a.val)})"
    if t is AArr:
        return f"arr({show_term(a.loc)}, {show_index(a.index)}, {show_term(a.seq)})"
    if t is APure:
        return f"[{show_formula(a.formula)}]"
    if t is AStar:
        return " * ".join(_paren(p) for p in a.parts)
    if t is ABigStar:
        dom = (
            f"[{show_term(a.dom.lo)}, {show_term(a.dom.hi)})"
            if type(a.dom) is DRange
            else f"elems({show_term(a.dom.seq)})"
        )
        guard = f" if {show_formula(a.where)}" if a.where is not None else ""
        return f"bigstar {a.var} in {dom}{guard} {{ {show_assertion(a.body)} }}"
    if t is ABigStarSet:
        return f"bigstar {a.var} over {{...}} {{ {show_assertion(a.body)} }}"
    if t is AExists:
        if type(a.dom) is WRange:
            dom = f" in [{show_term(a.dom.lo)}, {show_term(a.dom.hi)})"
        elif type(a.dom) is WSeqs:
            dom = f" in seqs({a.dom.max_len}, {a.dom.lo}, {a.dom.hi})"
        else:
            dom = ""
        return f"exists {a.var}{dom} {{ {show_assertion(a.body)} }}"
    if t is ARepl:
        return f"each {a.var} {{ {show_assertion(a.body)} }}"
    return repr(a)


def _paren(a: Assertion) -> str:
    text = show_assertion(a)
    if type(a) in (ABigStar, ABigStarSet, AExists, ARepl):
        return f"({text})"
    return text
