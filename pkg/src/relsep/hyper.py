"""Index sets, hyper-heaps and execution of indexed program products."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .lang import ast
from .lang.eval import EvalBudget, Fault, OutOfFuel
from .lang.heap import Heap
from .terms import (
    Domain,
    Env,
    Formula,
    Term,
    domain_values,
    eval_formula,
    eval_term,
    show_formula,
    show_term,
)
from .values import HyperValue, Index, Loc, Value


class SetError(Exception):
    pass


class OverlapError(SetError):
    pass


class IndexSet:
    """Either an explicit finite set or a descriptor materialised on demand."""

    __slots__ = ()

    def materialize(self, env: Env) -> FrozenSet[Index]:
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class SetLit(IndexSet):
    items: FrozenSet[Index]

    def materialize(self, env: Env) -> FrozenSet[Index]:
        return self.items


@dataclass(frozen=True, slots=True)
class SetBuilder(IndexSet):
    """{ <tag, a1..ak> | v_j in dom_j, constraints } with term-valued args."""

    tag: int
    args: Tuple[Term, ...]
    binders: Tuple[Tuple[str, Domain], ...]
    where: Optional[Formula] = None

    def materialize(self, env: Env) -> FrozenSet[Index]:
        out = []
        scope = dict(env)

        def emit() -> None:
            if self.where is not None and not eval_formula(self.where, scope):
                return
            vals = []
            for a in self.args:
                v = eval_term(a, scope)
                if type(v) is not int:
                    raise SetError("index components must be integers")
                vals.append(v)
            out.append(Index(self.tag, tuple(vals)))

        def go(k: int) -> None:
            if k == len(self.binders):
                emit()
                return
            var, dom = self.binders[k]
            for v in domain_values(dom, scope):
                scope[var] = v
                go(k + 1)
            scope.pop(var, None)

        go(0)
        return frozenset(out)


def builder(tag: int, *binders, where: Optional[Formula] = None, args=None) -> SetBuilder:
    """Builder set; by default the head args are exactly the binder vars."""
    from .terms import TVar

    bs = tuple(binders)
    if args is None:
        head = tuple(TVar(v) for v, _ in bs)
    else:
        head = tuple(args)
    return SetBuilder(tag, head, bs, where)


@dataclass(frozen=True, slots=True)
class SetExplicit(IndexSet):
    """Explicit items, each a concrete index or the name of an env-bound one."""

    items: Tuple[object, ...]

    def materialize(self, env: Env) -> FrozenSet[Index]:
        out = []
        for item in self.items:
            if type(item) is Index:
                out.append(item)
            else:
                v = env[item]
                if type(v) is not Index:
                    raise SetError(f"{item} is not bound to an index")
                out.append(v)
        return frozenset(out)


@dataclass(frozen=True, slots=True)
class SetUnion(IndexSet):
    parts: Tuple[IndexSet, ...]

    def materialize(self, env: Env) -> FrozenSet[Index]:
        out: FrozenSet[Index] = frozenset()
        for p in self.parts:
            out = out | p.materialize(env)
        return out


@dataclass(frozen=True, slots=True)
class SetDiff(IndexSet):
    a: IndexSet
    b: IndexSet

    def materialize(self, env: Env) -> FrozenSet[Index]:
        return self.a.materialize(env) - self.b.materialize(env)


def set_of(*items: Index) -> SetLit:
    return SetLit(frozenset(items))


EMPTY_SET = SetLit(frozenset())


def disjoint_union(a: FrozenSet[Index], b: FrozenSet[Index]) -> FrozenSet[Index]:
    overlap = a & b
    if overlap:
        raise OverlapError(f"sets overlap on {sorted(overlap)}")
    return a | b


def difference(a: FrozenSet[Index], b: FrozenSet[Index]) -> FrozenSet[Index]:
    return a - b


def partition_by_predicate(
    s: FrozenSet[Index],
    env: Env,
    arg_names: Tuple[str, ...],
    pred: Formula,
) -> Tuple[FrozenSet[Index], FrozenSet[Index]]:
    """Split a set by a formula over the tuple components.

    arg_names bind the args of each index (same arity required); an empty
    part is legitimate, never an error.
    """
    inside, outside = [], []
    scope = dict(env)
    for idx in s:
        if len(idx.args) != len(arg_names):
            raise SetError(f"arity mismatch for {idx!r}")
        scope.update(zip(arg_names, idx.args))
        (inside if eval_formula(pred, scope) else outside).append(idx)
    return frozenset(inside), frozenset(outside)


def image(s: FrozenSet[Index], fn: Callable[[Index], Index]) -> FrozenSet[Index]:
    return frozenset(fn(i) for i in s)


class HyperHeap:
    """Per-index heaps; cells at distinct indices never alias."""

    __slots__ = ("parts",)

    def __init__(self, parts: Optional[Dict[Index, Heap]] = None):
        self.parts: Dict[Index, Heap] = {}
        if parts:
            for idx, h in parts.items():
                if h.cells or h.blocks:
                    self.parts[idx] = h

    def clone(self) -> "HyperHeap":
        return HyperHeap({i: h.clone() for i, h in self.parts.items()})

    def project(self, idx: Index) -> Heap:
        h = self.parts.get(idx)
        return h.clone() if h is not None else Heap()

    def set_component(self, idx: Index, h: Heap) -> None:
        if h.cells or h.blocks:
            self.parts[idx] = h
        else:
            self.parts.pop(idx, None)

    def indices(self) -> FrozenSet[Index]:
        return frozenset(self.parts)

    def cell_domain(self) -> FrozenSet[Tuple[Loc, Index]]:
        return frozenset((loc, idx) for idx, h in self.parts.items() for loc in h.cells)

    def cells_flat(self) -> Dict[Tuple[Loc, Index], Value]:
        return {(loc, idx): v for idx, h in self.parts.items() for loc, v in h.cells.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, HyperHeap) and self.parts == other.parts

    def __repr__(self) -> str:
        inner = ", ".join(f"{i!r}: {h!r}" for i, h in sorted(self.parts.items()))
        return f"HyperHeap({{{inner}}})"


def lift(h: Heap, idx: Index) -> HyperHeap:
    return HyperHeap({idx: h.clone()})


def merge_hyper(*hs: HyperHeap) -> HyperHeap:
    """Union with disjoint per-index cells and blocks."""
    out = HyperHeap()
    for h in hs:
        for idx, part in h.parts.items():
            mine = out.parts.get(idx)
            if mine is None:
                out.parts[idx] = part.clone()
                continue
            if set(mine.cells) & set(part.cells) or set(mine.blocks) & set(part.blocks):
                raise OverlapError(f"component {idx!r} overlaps")
            mine.cells.update(part.cells)
            mine.blocks.update(part.blocks)
    return out


def hyper_to_json(h: HyperHeap):
    from .lang.heap import heap_to_json

    return [
        [[idx.tag, list(idx.args)], heap_to_json(part)]
        for idx, part in sorted(h.parts.items())
    ]


class ProgramProduct:
    """A total map from indices to closed commands.

    ``command_at`` substitutes the index components as integer literals;
    the remaining free variables are supplied by the evaluation env.
    """

    def __init__(self, program: Optional[ast.Program] = None):
        self.program = program

    def command_at(self, idx: Index) -> ast.Cmd:
        raise NotImplementedError

    def patched(self, patches: Dict[Index, ast.Cmd]) -> "ProgramProduct":
        return PatchedProduct(self, patches)


class TaggedProduct(ProgramProduct):
    """One command template per tag; template params bind the index args."""

    def __init__(
        self,
        parts: Mapping[int, Tuple[Tuple[str, ...], ast.Cmd]],
        program: Optional[ast.Program] = None,
    ):
        super().__init__(program)
        self.parts = dict(parts)

    def command_at(self, idx: Index) -> ast.Cmd:
        try:
            params, body = self.parts[idx.tag]
        except KeyError:
            raise SetError(f"product has no part for tag {idx.tag}") from None
        if len(params) != len(idx.args):
            raise SetError(f"part {idx.tag} arity mismatch for {idx!r}")
        if not params:
            return body
        return ast.subst_cmd(body, dict(zip(params, idx.args)))


class ExplicitProduct(ProgramProduct):
    def __init__(self, cmds: Mapping[Index, ast.Cmd], program: Optional[ast.Program] = None):
        super().__init__(program)
        self.cmds = dict(cmds)

    def command_at(self, idx: Index) -> ast.Cmd:
        try:
            return self.cmds[idx]
        except KeyError:
            raise SetError(f"product has no component {idx!r}") from None


class PatchedProduct(ProgramProduct):
    def __init__(self, base: ProgramProduct, patches: Dict[Index, ast.Cmd]):
        super().__init__(base.program)
        self.base = base
        self.patches = dict(patches)

    def command_at(self, idx: Index) -> ast.Cmd:
        got = self.patches.get(idx)
        return got if got is not None else self.base.command_at(idx)


class SingleProduct(ProgramProduct):
    """The same command at every index (parametrised single-component goals)."""

    def __init__(self, cmd: ast.Cmd, program: Optional[ast.Program] = None):
        super().__init__(program)
        self.cmd = cmd

    def command_at(self, idx: Index) -> ast.Cmd:
        return self.cmd


class MappedProduct(ProgramProduct):
    """Product for a reindexed goal: component phi(i) runs base's i."""

    def __init__(self, base: ProgramProduct, back: Dict[Index, Index]):
        super().__init__(base.program)
        self.base = base
        self.back = dict(back)  # new index -> old index

    def command_at(self, idx: Index) -> ast.Cmd:
        try:
            old = self.back[idx]
        except KeyError:
            raise SetError(f"no preimage for {idx!r}") from None
        return self.base.command_at(old)


@dataclass
class ComponentFault(Exception):
    index: Index
    fault: Fault

    def __str__(self) -> str:
        return f"component {self.index!r}: {self.fault}"


@dataclass
class ComponentOutOfFuel(Exception):
    index: Index


def eval_product(
    indices: Iterable[Index],
    product: ProgramProduct,
    h: HyperHeap,
    env: Optional[Mapping[str, Value]] = None,
    fuel: Optional[int] = None,
) -> Tuple[HyperValue, HyperHeap]:
    """Run every component on its own projection; the input heap is unchanged.

    Components are independent by construction, so the sorted evaluation
    order is unobservable (property-tested).
    """
    from .lang.eval import eval_cmd

    out = h.clone()
    results: HyperValue = {}
    for idx in sorted(indices):
        cmd = product.command_at(idx)
        budget = EvalBudget(fuel) if fuel is not None else EvalBudget()
        try:
            v, h2 = eval_cmd(cmd, out.project(idx), dict(env) if env else {}, budget, product.program)
        except Fault as f:
            raise ComponentFault(idx, f) from None
        except OutOfFuel:
            raise ComponentOutOfFuel(idx) from None
        results[idx] = v
        out.set_component(idx, h2)
    return results, out
