"""The proof rules as goal transformers with mechanical side conditions.

Leaf axioms compute each component's effect directly from the (unique)
heap of the goal's precondition, then check the goal's postcondition by
satisfaction. Structural rules return deferred premise plans; results of
earlier premises feed later ones, which is complete per environment
because preconditions are precise and evaluation is deterministic.

`skip_checks` exists only for the mutation-sensitivity harness: it
disables one named side condition so the soundness fuzzer can demonstrate
that the check is load-bearing.
"""
from __future__ import annotations

from typing import Dict, FrozenSet, List, Optional, Tuple

from ..assertions import (
    AArr,
    AExists,
    APts,
    APure,
    Assertion,
    BoundedModel,
    Reindexing,
    canonize,
    entails_bounded,
    is_local,
    reindex,
    satisfies,
    star,
)
from ..hyper import ExplicitProduct, MappedProduct, ProgramProduct, SetLit
from ..lang import ast
from ..lang.eval import Fault, eval_expr
from ..terms import (
    RET_KEY,
    FBool,
    FCmp,
    ITuple,
    TInt,
    TLit,
    TRet,
    Term,
    TermError,
    Unresolved,
    eval_index,
    eval_term,
    subst_term_vars,
)
from ..values import UNIT, Index, Loc, Value
from .goals import (
    Goal,
    HyperResults,
    KernelError,
    LeafResult,
    Premise,
    RulePlan,
    ShapeMismatch,
    SideConditionFailed,
    assertion_of_canon,
    canon_eq,
    heap_of_canon,
    registry_of,
    split_assertion,
)

LOCKSTEP_RULES = (
    "RET", "READ", "ASN", "FR", "ALC", "MALLOC", "MFREE", "LEN",
    "ASNARR", "READARR", "LET", "IF",
)
STRUCTURAL_RULES = (
    "SEQU", "SEQU1", "SEQU2", "PRODUCT", "FOCUS", "SUBST", "FOR",
    "WHILE", "FRAME", "CONSEQ", "WP_NEST", "UNFOLD",
)


def _pre_cells(goal: Goal) -> Dict[Tuple[Loc, Index], Value]:
    form = canonize(goal.pre, goal.scope_pre())
    h = heap_of_canon(form)
    return h.cells_flat()


def _commands(goal: Goal) -> Dict[Index, ast.Cmd]:
    return {idx: goal.product.command_at(idx) for idx in sorted(goal.indices)}


def _leaf_close(
    goal: Goal,
    results: HyperResults,
    cells: Dict[Tuple[Loc, Index], Value],
) -> LeafResult:
    """Final step of every leaf axiom: the post must hold of the new state."""
    from ..assertions import heap_from_cells

    h = heap_from_cells(cells)
    if not satisfies(h, goal.scope_post(results), goal.post):
        raise KernelError("leaf postcondition does not hold of the resulting state")
    return LeafResult(results)


def _component_value_env(goal: Goal) -> Dict[str, Value]:
    return goal.value_env()


def _eval_pure(goal: Goal, e: ast.Expr) -> Value:
    try:
        return eval_expr(e, _component_value_env(goal))
    except Fault as f:
        raise KernelError(f"expression evaluation faulted: {f}") from None


def _expect_loc(v: Value) -> Loc:
    if type(v) is not Loc:
        raise ShapeMismatch(f"expected a location, got {v!r}")
    return v


def leaf_ret(goal: Goal, w, skip) -> LeafResult:
    cells = _pre_cells(goal)
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Pure:
            raise ShapeMismatch(f"RET needs `return e` at {idx!r}")
        results[idx] = _eval_pure(goal, cmd.expr)
    return _leaf_close(goal, results, cells)


def leaf_read(goal: Goal, w, skip) -> LeafResult:
    cells = _pre_cells(goal)
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Deref:
            raise ShapeMismatch(f"READ needs `!x` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.ref))
        if (loc, idx) not in cells:
            raise KernelError(f"READ: no points-to for {loc!r} at {idx!r} in the precondition")
        results[idx] = cells[(loc, idx)]
    return _leaf_close(goal, results, cells)


def leaf_readarr(goal: Goal, w, skip) -> LeafResult:
    cells = _pre_cells(goal)
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Read:
            raise ShapeMismatch(f"READARR needs `x[e]` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.base))
        i = _eval_pure(goal, cmd.index)
        if "bounds" not in skip and not (0 <= loc.off + i < loc.length):
            raise SideConditionFailed("bounds", f"{loc!r}[{i}] at {idx!r}")
        cell = loc.shifted(i)
        if (cell, idx) not in cells:
            raise KernelError(f"READARR: no cell for {cell!r} at {idx!r}")
        results[idx] = cells[(cell, idx)]
    return _leaf_close(goal, results, cells)


def leaf_asn(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Store:
            raise ShapeMismatch(f"ASN needs `x := e` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.ref))
        if (loc, idx) not in cells:
            raise KernelError(f"ASN: no points-to for {loc!r} at {idx!r}")
        cells[(loc, idx)] = _eval_pure(goal, cmd.value)
        results[idx] = UNIT
    return _leaf_close(goal, results, cells)


def leaf_asnarr(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.StoreArr:
            raise ShapeMismatch(f"ASNARR needs `x[e] := e` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.base))
        i = _eval_pure(goal, cmd.index)
        if "bounds" not in skip and not (0 <= loc.off + i < loc.length):
            raise SideConditionFailed("bounds", f"{loc!r}[{i}] at {idx!r}")
        cell = loc.shifted(i)
        if (cell, idx) not in cells:
            raise KernelError(f"ASNARR: no cell for {cell!r} at {idx!r}")
        cells[(cell, idx)] = _eval_pure(goal, cmd.value)
        results[idx] = UNIT
    return _leaf_close(goal, results, cells)


def leaf_alc(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Alloc:
            raise ShapeMismatch(f"ALC needs `alloc(e)` at {idx!r}")
        v = _eval_pure(goal, cmd.value)
        blocks = registry_of(goal, idx, {loc: val for (loc, i), val in cells.items() if i == idx})
        b = 0
        while b in blocks:
            b += 1
        loc = Loc(b, 0, 1)
        cells[(loc, idx)] = v
        results[idx] = loc
    return _leaf_close(goal, results, cells)


def leaf_malloc(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Malloc:
            raise ShapeMismatch(f"MALLOC needs `malloc(e)` at {idx!r}")
        n = _eval_pure(goal, cmd.size)
        if type(n) is not int or n < 0:
            raise ShapeMismatch(f"MALLOC size {n!r} at {idx!r}")
        blocks = registry_of(goal, idx, {loc: val for (loc, i), val in cells.items() if i == idx})
        b = 0
        while b in blocks:
            b += 1
        base = Loc(b, 0, n)
        for k in range(n):
            cells[(Loc(b, k, n), idx)] = 0
        results[idx] = base
    return _leaf_close(goal, results, cells)


def leaf_free(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Free:
            raise ShapeMismatch(f"FR needs `free(x)` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.ref))
        if loc.off != 0 or loc.length != 1:
            raise ShapeMismatch(f"FR on non-scalar {loc!r}")
        if (loc, idx) not in cells:
            raise KernelError(f"FR: no points-to for {loc!r} at {idx!r}")
        del cells[(loc, idx)]
        results[idx] = UNIT
    return _leaf_close(goal, results, cells)


def leaf_mfree(goal: Goal, w, skip) -> LeafResult:
    cells = dict(_pre_cells(goal))
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Mfree:
            raise ShapeMismatch(f"MFREE needs `mfree(x)` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.ref))
        if loc.off != 0:
            raise ShapeMismatch(f"MFREE on interior {loc!r}")
        for k in range(loc.length):
            cell = Loc(loc.block, k, loc.length)
            if (cell, idx) not in cells:
                raise KernelError(f"MFREE: missing cell {cell!r} at {idx!r}")
            del cells[(cell, idx)]
        results[idx] = UNIT
    return _leaf_close(goal, results, cells)


def leaf_len(goal: Goal, w, skip) -> LeafResult:
    cells = _pre_cells(goal)
    results: HyperResults = {}
    for idx, cmd in _commands(goal).items():
        if type(cmd) is not ast.Length:
            raise ShapeMismatch(f"LEN needs `length(e)` at {idx!r}")
        loc = _expect_loc(_eval_pure(goal, cmd.arg))
        for k in range(loc.length):
            if (Loc(loc.block, k, loc.length), idx) not in cells:
                raise KernelError(f"LEN: array {loc!r} not wholly owned at {idx!r}")
        results[idx] = loc.length
    return _leaf_close(goal, results, cells)


def rule_if(goal: Goal, w, skip) -> RulePlan:
    """Branch selection; the guard value must be boolean in every component."""
    on = _witness_set(goal, w, "on", default_all=True)
    patches: Dict[Index, ast.Cmd] = {}
    for idx in sorted(on):
        cmd = goal.product.command_at(idx)
        if type(cmd) is not ast.If:
            raise ShapeMismatch(f"IF needs a conditional at {idx!r}")
        g = _eval_pure(goal, cmd.cond)
        if type(g) is not bool:
            raise SideConditionFailed("branch-agreement", f"guard at {idx!r} is {g!r}")
        patches[idx] = cmd.then if g else cmd.orelse

    def make(prior: HyperResults) -> Goal:
        return Goal(
            goal.pre, goal.indices, goal.product.patched(patches), goal.post,
            goal.env, dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    return RulePlan([Premise("taken", make)], lambda rs: rs[0])


def rule_unfold(goal: Goal, w, skip) -> RulePlan:
    """Inline acyclic calls (calls are semantically inlining)."""
    on = _witness_set(goal, w, "on", default_all=True)
    program = goal.product.program
    if program is None:
        raise ShapeMismatch("UNFOLD without definitions")
    patches: Dict[Index, ast.Cmd] = {}
    venv = goal.value_env()
    for idx in sorted(on):
        cmd = goal.product.command_at(idx)
        if type(cmd) is not ast.Call:
            raise ShapeMismatch(f"UNFOLD needs a call at {idx!r}")
        d = program.lookup(cmd.name)
        if d is None:
            raise ShapeMismatch(f"no definition {cmd.name}")
        binding = {}
        for p, a in zip(d.params, cmd.args):
            try:
                binding[p] = eval_expr(a, venv)
            except Fault as f:
                raise KernelError(f"call argument not evaluable: {f}") from None
        patches[idx] = ast.subst_cmd(d.body, binding)

    def make(prior: HyperResults) -> Goal:
        return Goal(
            goal.pre, goal.indices, goal.product.patched(patches), goal.post,
            goal.env, dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    return RulePlan([Premise("inlined", make)], lambda rs: rs[0])


def _witness_set(goal: Goal, w, key: str, default_all: bool = False) -> FrozenSet[Index]:
    got = w.get(key)
    if got is None:
        if default_all:
            return goal.indices
        raise KernelError(f"rule needs witness {key!r}")
    if isinstance(got, frozenset):
        out = got
    else:
        out = got.materialize(goal.scope_pre())
    if not out <= goal.indices:
        raise KernelError(f"witness {key} mentions components outside the goal: {sorted(out - goal.indices)}")
    return out


def _witness_assertion(w, key: str) -> Assertion:
    got = w.get(key)
    if got is None:
        raise KernelError(f"rule needs witness {key!r}")
    return got


def plan_let(goal: Goal, w, skip, rule_name: str) -> RulePlan:
    """SEQU1 (one focused component or a lockstep subset) and LET."""
    on = _witness_set(goal, w, "on", default_all=(rule_name == "LET"))
    mid = _witness_assertion(w, "mid")
    heads: Dict[Index, ast.Cmd] = {}
    conts: Dict[Index, Tuple[str, ast.Cmd]] = {}
    for idx in sorted(on):
        cmd = goal.product.command_at(idx)
        if type(cmd) is not ast.Let:
            raise ShapeMismatch(f"{rule_name} needs a let/sequence at {idx!r}")
        heads[idx] = cmd.bound
        conts[idx] = (cmd.name, cmd.body)
    scope = goal.scope_pre()
    pre_in, pre_out = split_assertion(goal.pre, scope, on)
    rest = goal.indices - on

    def make_head(prior: HyperResults) -> Goal:
        return Goal(
            pre_in, frozenset(on), ExplicitProduct(heads, goal.product.program),
            mid, goal.env, dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    def make_tail(prior: HyperResults) -> Goal:
        from ..assertions import resolve_ret_assertion

        patches = {}
        for idx in on:
            name, body = conts[idx]
            if idx not in prior:
                raise KernelError(f"{rule_name}: no computed result for {idx!r}")
            patches[idx] = ast.subst_cmd(body, {name: prior[idx]})
        own = {i: prior[i] for i in on}
        new_pre = resolve_ret_assertion(star(mid, pre_out), own, scope)
        pre_ret = dict(goal.pre_ret)
        pre_ret.update(own)
        return Goal(
            new_pre, goal.indices, goal.product.patched(patches),
            goal.post, goal.env, dict(goal.outer), pre_ret, goal.context,
        )

    def assemble(rs: List[HyperResults]) -> HyperResults:
        return dict(rs[1])

    return RulePlan([Premise("bind", make_head), Premise("body", make_tail)], assemble)


def plan_sequ2(goal: Goal, w, skip) -> RulePlan:
    """Run everything but one component's continuation first."""
    on = _witness_set(goal, w, "on")
    mid = _witness_assertion(w, "mid")
    heads: Dict[Index, ast.Cmd] = {}
    conts: Dict[Index, Tuple[str, ast.Cmd]] = {}
    for idx in sorted(on):
        cmd = goal.product.command_at(idx)
        if type(cmd) is not ast.Let:
            raise ShapeMismatch(f"SEQU2 needs a let/sequence at {idx!r}")
        heads[idx] = cmd.bound
        conts[idx] = (cmd.name, cmd.body)
    rest = goal.indices - on

    def make_main(prior: HyperResults) -> Goal:
        return Goal(
            goal.pre, goal.indices, goal.product.patched(heads), mid,
            goal.env, dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    def make_last(prior: HyperResults) -> Goal:
        from ..assertions import resolve_ret_assertion

        patches = {}
        for idx in on:
            name, body = conts[idx]
            patches[idx] = ast.subst_cmd(body, {name: prior[idx]})
        outer = dict(goal.outer)
        outer.update({i: v for i, v in prior.items() if i in rest})
        own = {i: prior[i] for i in on}
        scope2 = goal.scope_pre()
        new_pre = resolve_ret_assertion(mid, own, scope2)
        pre_ret = dict(goal.pre_ret)
        pre_ret.update(prior)
        return Goal(
            new_pre, frozenset(on), goal.product.patched(patches), goal.post,
            goal.env, outer, pre_ret, goal.context,
        )

    def assemble(rs: List[HyperResults]) -> HyperResults:
        out = {i: v for i, v in rs[0].items() if i in rest}
        out.update(rs[1])
        return out

    return RulePlan([Premise("main", make_main), Premise("last", make_last)], assemble)


def plan_focus(goal: Goal, w, skip, rule_name: str) -> RulePlan:
    s1 = _witness_set(goal, w, "s1")
    s2 = w.get("s2")
    if s2 is None:
        s2_set = goal.indices - s1
    else:
        s2_set = _witness_set(goal, w, "s2")
    mid = _witness_assertion(w, "mid")
    if "disjointness" not in skip:
        if s1 & s2_set:
            raise SideConditionFailed("disjointness", f"{rule_name}: {sorted(s1 & s2_set)}")
        if s1 | s2_set != goal.indices:
            raise SideConditionFailed("cover", f"{rule_name}: split misses components")
    scope = goal.scope_pre()
    pre_in, pre_out = split_assertion(goal.pre, scope, s1)

    def make_focused(prior: HyperResults) -> Goal:
        return Goal(
            pre_in, frozenset(s1), goal.product, mid,
            goal.env, dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    def make_rest(prior: HyperResults) -> Goal:
        outer = dict(goal.outer)
        outer.update(prior)
        pre_ret = dict(goal.pre_ret)
        pre_ret.update(prior)
        return Goal(
            star(mid, pre_out), frozenset(s2_set), goal.product, goal.post,
            goal.env, outer, pre_ret, goal.context,
        )

    def assemble(rs: List[HyperResults]) -> HyperResults:
        out = dict(rs[0])
        out.update(rs[1])
        return out

    return RulePlan([Premise("focused", make_focused), Premise("rest", make_rest)], assemble)


def plan_product(goal: Goal, w, skip) -> RulePlan:
    var = w.get("var", "I")
    p_tpl = _witness_assertion(w, "ppre")
    q_tpl = _witness_assertion(w, "ppost")
    scope = goal.scope_pre()
    from ..assertions import ABigStarSet, subst_assertion

    if "locality" not in skip:
        for idx in sorted(goal.indices):
            inst = subst_assertion(p_tpl, {var: idx})
            if not is_local(inst, frozenset({idx}), scope):
                raise SideConditionFailed("locality", f"P({idx!r}) is not local to its component")
            qinst = subst_assertion(q_tpl, {var: idx})
            if not is_local(qinst, frozenset({idx}), scope):
                raise SideConditionFailed("locality", f"Q({idx!r}) is not local to its component")
    woven = ABigStarSet(var, SetLit(goal.indices), p_tpl)
    canon_eq(woven, goal.pre, scope, "PRODUCT precondition decomposition")
    woven_q = ABigStarSet(var, SetLit(goal.indices), q_tpl)
    canon_eq(woven_q, goal.post, goal.scope_post(), "PRODUCT postcondition decomposition")

    premises = []
    order = sorted(goal.indices)

    def mk(idx: Index):
        def make(prior: HyperResults) -> Goal:
            return Goal(
                subst_assertion(p_tpl, {var: idx}), frozenset({idx}), goal.product,
                subst_assertion(q_tpl, {var: idx}), goal.env,
                dict(goal.outer), dict(goal.pre_ret), goal.context,
            )

        return make

    for idx in order:
        premises.append(Premise(f"each:{idx!r}", mk(idx)))

    def assemble(rs: List[HyperResults]) -> HyperResults:
        out: HyperResults = {}
        for r in rs:
            out.update(r)
        return out

    return RulePlan(premises, assemble)


def plan_frame(goal: Goal, w, skip) -> RulePlan:
    frame = _witness_assertion(w, "h")
    scope = goal.scope_pre()
    frame_c = canonize(frame, scope)
    if frame_c.exists or frame_c.atoms:
        raise KernelError("frame must be a concrete spatial assertion")
    pre_c = canonize(goal.pre, scope)
    post_c = canonize(goal.post, goal.scope_post())
    new_pre = _subtract(pre_c, frame_c, "precondition")
    new_post = _subtract(post_c, frame_c, "postcondition")

    def make(prior: HyperResults) -> Goal:
        return Goal(
            assertion_of_canon(new_pre), goal.indices, goal.product,
            assertion_of_canon(new_post), goal.env,
            dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    return RulePlan([Premise("framed", make)], lambda rs: rs[0])


def _subtract(whole, part, what):
    from ..assertions import CanonForm

    cells = dict(((loc, idx), val) for loc, idx, val in whole.cells)
    for loc, idx, val in part.cells:
        got = cells.get((loc, idx))
        if got is None or got != val:
            raise SideConditionFailed("frame", f"{what} does not contain cell {loc!r}@{idx!r}")
        del cells[(loc, idx)]
    pures = list(whole.pures)
    for p in part.pures:
        if p in pures:
            pures.remove(p)
    return CanonForm(
        tuple((loc, idx, val) for (loc, idx), val in sorted(cells.items(), key=lambda kv: (kv[0][1], kv[0][0]))),
        tuple(pures), whole.atoms, whole.exists,
    )


def plan_conseq(goal: Goal, w, skip) -> RulePlan:
    new_pre = w.get("pre", goal.pre)
    new_post = w.get("post", goal.post)
    model: BoundedModel = w.get("model") or BoundedModel()
    entailments = 0
    if new_pre is not goal.pre:
        v = entails_bounded(goal.pre, new_pre, model, goal.scope_pre())
        entailments += 1
        if not v.holds:
            raise SideConditionFailed("entailment", "pre |- pre' failed")

    check_post = new_post is not goal.post

    def make(prior: HyperResults) -> Goal:
        return Goal(
            new_pre, goal.indices, goal.product, new_post, goal.env,
            dict(goal.outer), dict(goal.pre_ret), goal.context,
        )

    plan = RulePlan([Premise("weakened", make)], lambda rs: rs[0], entailments)
    if check_post:
        def assemble(rs: List[HyperResults]) -> HyperResults:
            v2 = entails_bounded(new_post, goal.post, model, goal.scope_post(rs[0]))
            if not v2.holds:
                raise SideConditionFailed("entailment", "post' |- post failed")
            return rs[0]

        plan.assemble = assemble
        plan.entailments += 1
    return plan


def plan_subst(goal: Goal, w, skip) -> RulePlan:
    phi: Reindexing = w.get("phi")
    if phi is None:
        raise KernelError("SUBST needs witness phi")
    if "injectivity" not in skip:
        phi.check_injective(goal.indices, goal.env)
        back = {phi.apply_index(i, goal.env): i for i in goal.indices}
    else:
        back = {}
        for i in sorted(goal.indices):
            back[phi.apply_index(i, goal.env)] = i
    new_set = frozenset(back)
    new_pre = reindex(goal.pre, phi)
    new_post = reindex(goal.post, phi)
    fwd = {i: phi.apply_index(i, goal.env) for i in goal.indices}

    def remap(m: HyperResults) -> HyperResults:
        out = {}
        for i, v in m.items():
            out[fwd.get(i, i)] = v
        return out

    def make(prior: HyperResults) -> Goal:
        return Goal(
            new_pre, new_set, MappedProduct(goal.product, back), new_post,
            goal.env, remap(goal.outer), remap(goal.pre_ret), goal.context,
        )

    def assemble(rs: List[HyperResults]) -> HyperResults:
        return {back[i]: v for i, v in rs[0].items() if i in back}

    return RulePlan([Premise("image", make)], assemble)


def _loop_shape(goal: Goal, w, node_type):
    on = _witness_set(goal, w, "on")
    if len(on) != 1:
        raise ShapeMismatch("loop rules focus exactly one component")
    (iota,) = tuple(on)
    cmd = goal.product.command_at(iota)
    if type(cmd) is not node_type:
        raise ShapeMismatch(f"component {iota!r} is not the right loop form")
    return iota, cmd


def _instantiate(tpl: Tuple[str, Assertion], k: int) -> Assertion:
    from ..assertions import subst_assertion

    var, body = tpl
    return subst_assertion(body, {var: k})


def _instantiate_set(goal: Goal, tpl, k: int) -> FrozenSet[Index]:
    var, iset = tpl
    scope = dict(goal.scope_pre())
    scope[var] = k
    return iset.materialize(scope)


def plan_for(goal: Goal, w, skip) -> RulePlan:
    iota, loop = _loop_shape(goal, w, ast.For)
    inv = w.get("inv")
    batches = w.get("batch")
    rpre = w.get("rpre")
    if inv is None or batches is None or rpre is None:
        raise KernelError("FOR needs witnesses inv, batch, rpre")
    venv = goal.value_env()
    lo = eval_expr(loop.lo, venv)
    hi = eval_expr(loop.hi, venv)
    rest = goal.indices - {iota}
    batch_sets: Dict[int, FrozenSet[Index]] = {}
    seen: set = set()
    for k in range(lo, hi):
        bk = _instantiate_set(goal, batches, k)
        batch_sets[k] = bk
        if "disjointness" not in skip and (bk & seen):
            raise SideConditionFailed("disjointness", f"batch {k} overlaps earlier batches")
        seen |= bk
    if "disjointness" not in skip and seen != rest:
        raise SideConditionFailed(
            "cover", f"batches cover {len(seen)} of {len(rest)} aligned components"
        )
    scope = goal.scope_pre()
    if "locality" not in skip:
        for k in range(lo, hi):
            if not is_local(_instantiate(rpre, k), batch_sets[k], scope):
                raise SideConditionFailed("locality", f"R_{k} is not local to its batch")
    shape = star(_instantiate(inv, lo), *(_instantiate(rpre, k) for k in range(lo, hi)))
    canon_eq(shape, goal.pre, scope, "FOR precondition")
    canon_eq(_instantiate(inv, hi), goal.post, goal.scope_post(), "FOR postcondition")

    premises: List[Premise] = []

    def mk(k: int):
        def make(prior: HyperResults) -> Goal:
            patched = goal.product.patched({iota: ast.subst_cmd(loop.body, {loop.var: k})})
            outer = dict(goal.outer)
            outer.update(prior)
            pre_ret = dict(goal.pre_ret)
            pre_ret.update(prior)
            return Goal(
                star(_instantiate(inv, k), _instantiate(rpre, k)),
                frozenset({iota}) | batch_sets[k], patched,
                _instantiate(inv, k + 1), goal.env, outer, pre_ret, goal.context,
            )

        return make

    for k in range(lo, hi):
        premises.append(Premise(f"body:{k}", mk(k)))

    def assemble(rs: List[HyperResults]) -> HyperResults:
        out: HyperResults = {iota: UNIT}
        for r in rs:
            for i, v in r.items():
                if i != iota:
                    out[i] = v
        return out

    return RulePlan(premises, assemble)


def plan_while(goal: Goal, w, skip) -> RulePlan:
    """Reconstructed while rule: explicit iteration count, aligned batches,
    an invariant over completed iterations, and a decreasing measure."""
    iota, loop = _loop_shape(goal, w, ast.While)
    inv = w.get("inv")
    batches = w.get("batch")
    rpre = w.get("rpre")
    count_term = w.get("count")
    if inv is None or batches is None or rpre is None or count_term is None:
        raise KernelError("WHILE needs witnesses inv, batch, rpre, count")
    scope = goal.scope_pre()
    K = eval_term(count_term, scope)
    if type(K) is not int or K < 0:
        raise KernelError(f"WHILE iteration count is {K!r}")
    measure = w.get("measure")
    if measure is not None:
        mvar, mterm = measure
        vals = [eval_term(subst_term_vars(mterm, {mvar: k}), scope) for k in range(K + 1)]
        if any(v < 0 for v in vals) or any(vals[k] <= vals[k + 1] for k in range(K)):
            raise SideConditionFailed("measure", "not strictly decreasing and nonnegative")
    rest = goal.indices - {iota}
    batch_sets: Dict[int, FrozenSet[Index]] = {}
    seen: set = set()
    for k in range(K):
        bk = _instantiate_set(goal, batches, k)
        batch_sets[k] = bk
        if "disjointness" not in skip and (bk & seen):
            raise SideConditionFailed("disjointness", f"batch {k} overlaps earlier batches")
        seen |= bk
    if "disjointness" not in skip and seen != rest:
        raise SideConditionFailed("cover", "batches do not cover the aligned components")
    if "locality" not in skip:
        for k in range(K):
            if not is_local(_instantiate(rpre, k), batch_sets[k], scope):
                raise SideConditionFailed("locality", f"R_{k} is not local to its batch")
    shape = star(_instantiate(inv, 0), *(_instantiate(rpre, k) for k in range(K)))
    canon_eq(shape, goal.pre, scope, "WHILE precondition")
    canon_eq(_instantiate(inv, K), goal.post, goal.scope_post(), "WHILE postcondition")

    premises: List[Premise] = []

    def guard_goal(k: int):
        def make(prior: HyperResults) -> Goal:
            inv_k = _instantiate(inv, k)
            pre_ret = dict(goal.pre_ret)
            pre_ret.update(prior)
            outer = dict(goal.outer)
            outer.update(prior)
            scope_k = dict(goal.scope_pre())
            scope_k[RET_KEY] = {**outer}
            inv_slice, _ = split_assertion(inv_k, scope_k, frozenset({iota}))
            want = TLit(k < K)
            post = star(
                APure(FCmp("=", TRet(ITuple(iota.tag, tuple(TInt(a) for a in iota.args))), want)),
                inv_slice,
            )
            return Goal(
                inv_slice, frozenset({iota}), goal.product.patched({iota: loop.guard}),
                post, goal.env, outer, pre_ret, goal.context,
            )

        return make

    def body_goal(k: int):
        def make(prior: HyperResults) -> Goal:
            outer = dict(goal.outer)
            outer.update(prior)
            pre_ret = dict(goal.pre_ret)
            pre_ret.update(prior)
            return Goal(
                star(_instantiate(inv, k), _instantiate(rpre, k)),
                frozenset({iota}) | batch_sets[k],
                goal.product.patched({iota: loop.body}),
                _instantiate(inv, k + 1), goal.env, outer, pre_ret, goal.context,
            )

        return make

    for k in range(K):
        premises.append(Premise(f"guard:{k}", guard_goal(k)))
        premises.append(Premise(f"body:{k}", body_goal(k)))
    premises.append(Premise(f"guard:{K}", guard_goal(K)))

    def assemble(rs: List[HyperResults]) -> HyperResults:
        out: HyperResults = {iota: UNIT}
        for label, r in zip((p.label for p in premises), rs):
            if label.startswith("body:"):
                for i, v in r.items():
                    if i != iota:
                        out[i] = v
        return out

    return RulePlan(premises, assemble)


def plan_entail(goal: Goal, w, skip) -> LeafResult:
    """Close an empty-product goal by bounded entailment."""
    if goal.indices:
        raise ShapeMismatch("entailment closes only empty-product goals")
    model: BoundedModel = w.get("model") or BoundedModel()
    v = entails_bounded(goal.pre, goal.post, model, goal.scope_post({}))
    if not v.holds:
        raise KernelError("entailment leaf failed")
    return LeafResult({}, entailments=1)


_LEAVES = {
    "RET": leaf_ret,
    "READ": leaf_read,
    "READARR": leaf_readarr,
    "ASN": leaf_asn,
    "ASNARR": leaf_asnarr,
    "ALC": leaf_alc,
    "MALLOC": leaf_malloc,
    "FR": leaf_free,
    "MFREE": leaf_mfree,
    "LEN": leaf_len,
    "ENTAIL": plan_entail,
}

_PLANS = {
    "IF": rule_if,
    "UNFOLD": rule_unfold,
    "SEQU2": plan_sequ2,
    "PRODUCT": plan_product,
    "FRAME": plan_frame,
    "CONSEQ": plan_conseq,
    "SUBST": plan_subst,
    "FOR": plan_for,
    "WHILE": plan_while,
}


def apply_rule(goal: Goal, app, skip_checks: FrozenSet[str] = frozenset()):
    """Apply one rule; returns a LeafResult or a RulePlan."""
    name = app.rule.upper()
    w = app.witnesses
    if name in ("SEQU1", "LET"):
        return plan_let(goal, w, skip_checks, name)
    if name in ("FOCUS", "SEQU", "WP_NEST"):
        return plan_focus(goal, w, skip_checks, name)
    if name in _LEAVES:
        return _LEAVES[name](goal, w, skip_checks)
    if name in _PLANS:
        return _PLANS[name](goal, w, skip_checks)
    raise KernelError(f"unknown rule {app.rule!r}")
