"""Proof goals and rule-application plumbing.

A goal is a hyper-triple instantiated at a concrete logical environment.
Results of already-closed sibling premises flow in through `outer` (for
postconditions) and `pre_ret` (for preconditions quoting earlier results),
so assertions never need structural result substitution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple

from ..assertions import (
    AArr,
    AEmp,
    APts,
    APure,
    AExists,
    AStar,
    ABigStar,
    ABigStarSet,
    ARepl,
    Assertion,
    CanonForm,
    canonize,
    expand_replication,
    subst_assertion,
)
from ..hyper import HyperHeap, ProgramProduct
from ..lang.heap import Heap
from ..terms import (
    RET_KEY,
    FBool,
    Formula,
    TInt,
    TLit,
    Term,
    TermError,
    Unresolved,
    domain_values,
    eval_formula,
    eval_index,
    eval_term,
)
from ..values import Index, Loc, Value

HyperResults = Dict[Index, Value]


class KernelError(Exception):
    """A rule application failed: shape mismatch or failed side condition."""


class SideConditionFailed(KernelError):
    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(f"side condition {condition}: {detail}" if detail else f"side condition {condition}")


class ShapeMismatch(KernelError):
    pass


@dataclass
class Goal:
    pre: Assertion
    indices: FrozenSet[Index]
    product: ProgramProduct
    post: Assertion
    env: Dict[str, object]
    outer: HyperResults = field(default_factory=dict)
    pre_ret: HyperResults = field(default_factory=dict)
    context: Tuple[Formula, ...] = ()

    def scope_pre(self) -> Dict[str, object]:
        scope = dict(self.env)
        ret = dict(self.outer)
        ret.update(self.pre_ret)
        scope[RET_KEY] = ret
        return scope

    def scope_post(self, results: Optional[HyperResults] = None) -> Dict[str, object]:
        scope = dict(self.env)
        ret = dict(self.outer)
        if results:
            ret.update(results)
        scope[RET_KEY] = ret
        return scope

    def value_env(self) -> Dict[str, Value]:
        """Program-level bindings: everything that is a runtime value."""
        out = {}
        for k, v in self.env.items():
            if type(v) in (int, bool, Loc) and not k.endswith("_p"):
                out[k] = v
        return out


def goal_of_triple(triple, env: Mapping[str, object]) -> Goal:
    indices = triple.indices.materialize(env)
    pre = expand_replication(triple.pre, indices)
    post = expand_replication(triple.post, indices)
    return Goal(pre, frozenset(indices), triple.product, post, dict(env))


@dataclass(frozen=True)
class RuleApp:
    rule: str
    witnesses: Mapping[str, object]


@dataclass
class Premise:
    """A deferred subgoal; `make` sees results of earlier-closed premises."""

    label: str
    make: Callable[[HyperResults], Goal]


@dataclass
class RulePlan:
    premises: List[Premise]
    assemble: Callable[[List[HyperResults]], HyperResults]
    entailments: int = 0


@dataclass
class LeafResult:
    results: HyperResults
    entailments: int = 0


# --- assertion utilities shared by the rules ---


def canon_pre(goal: Goal) -> CanonForm:
    return canonize(goal.pre, goal.scope_pre())


def canon_post(goal: Goal) -> CanonForm:
    return canonize(goal.post, goal.scope_post())


def canon_eq(a: Assertion, b: Assertion, scope: Dict[str, object], what: str) -> None:
    ca = canonize(a, scope)
    cb = canonize(b, scope)
    if ca != cb:
        from ..assertions import show_canon

        raise KernelError(
            f"{what}: assertions differ\n--- expected ---\n{show_canon(ca)}\n--- got ---\n{show_canon(cb)}"
        )


def flatten_atoms(a: Assertion, scope: Dict[str, object]):
    """Expand iterated stars into (spatial atoms, pure formulas).

    Binder values are substituted into the atom terms, so the result is a
    plain star of atoms; existentials are not allowed here.
    """
    atoms: List[Assertion] = []
    pures: List[Formula] = []

    def go(node: Assertion, binding: Dict[str, object]) -> None:
        node = subst_assertion(node, binding) if binding else node
        t = type(node)
        if t is AEmp:
            return
        if t in (APts, AArr):
            atoms.append(node)
            return
        if t is APure:
            pures.append(node.formula)
            return
        if t is AStar:
            for p in node.parts:
                go(p, {})
            return
        if t is ABigStar:
            for v in domain_values(node.dom, scope):
                inner = {node.var: v}
                if node.where is not None:
                    if not eval_formula(node.where, {**scope, node.var: v}):
                        continue
                go(node.body, inner)
            return
        if t is ABigStarSet:
            for idx in sorted(node.indices.materialize(scope)):
                go(node.body, {node.var: idx})
            return
        if t is ARepl:
            raise KernelError("replication must be expanded before slicing")
        if t is AExists:
            raise KernelError("existentials cannot be sliced; instantiate first")
        raise KernelError(f"cannot slice assertion node {node!r}")

    go(a, {})
    return atoms, pures


def split_assertion(
    a: Assertion, scope: Dict[str, object], inside: FrozenSet[Index]
) -> Tuple[Assertion, Assertion]:
    """Partition spatial atoms by component membership; pures go to both."""
    from ..assertions import star

    atoms, pures = flatten_atoms(a, scope)
    ins: List[Assertion] = []
    outs: List[Assertion] = []
    for atom in atoms:
        try:
            idx = eval_index(atom.index, scope)
        except (Unresolved, TermError) as e:
            raise KernelError(f"atom index not evaluable: {e}") from None
        (ins if idx in inside else outs).append(atom)
    pure_parts = [APure(p) for p in pures]
    return star(*ins, *pure_parts), star(*outs, *pure_parts)


def assertion_of_canon(c: CanonForm) -> Assertion:
    """Rebuild a (cell-level) assertion from a canonical form."""
    from ..assertions import star

    parts: List[Assertion] = []
    for loc, idx, val in c.cells:
        parts.append(APts(TLit(loc), _ixlit(idx), val))
    for _, text in c.atoms:
        raise KernelError(f"cannot rebuild symbolic atom {text}")
    for p in c.pures:
        parts.append(APure(p))
    for name, sub in c.exists:
        parts.append(AExists(name, assertion_of_canon(sub)))
    return star(*parts)


def _ixlit(idx: Index):
    from ..terms import ITuple

    return ITuple(idx.tag, tuple(TInt(a) for a in idx.args))


def heap_of_canon(c: CanonForm, what: str = "precondition") -> HyperHeap:
    """The unique hyper-heap of a precise, fully concrete canonical form."""
    if c.atoms or c.exists:
        raise KernelError(f"{what} is not concrete (symbolic atoms or existentials)")
    for p in c.pures:
        if type(p) is FBool and not p.value:
            raise KernelError(f"{what} is unsatisfiable")
        if type(p) is not FBool:
            raise KernelError(f"{what} has an unevaluated pure conjunct")
    h = HyperHeap()
    for loc, idx, val in c.cells:
        if type(val) is not TInt and type(val) is not TLit:
            raise KernelError(f"{what} holds a symbolic cell value at {loc!r}")
        v = val.value
        part = h.parts.get(idx)
        if part is None:
            part = Heap()
            h.parts[idx] = part
        part.cells[loc] = v
        part.blocks[loc.block] = loc.length
    return h


def registry_of(goal: Goal, idx: Index, cells: Dict[Loc, Value]) -> Dict[int, int]:
    """Block registry visible to one component: its cells plus env locations."""
    blocks: Dict[int, int] = {}
    for v in goal.env.values():
        if type(v) is Loc:
            blocks[v.block] = v.length
    for loc in cells:
        blocks[loc.block] = loc.length
    return blocks
