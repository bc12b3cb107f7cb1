"""Derivation scripts and their replay.

A script is a tactic-style tree: within a block, one-premise rules apply
in sequence; a multi-premise rule ends its block and closes its premises
through labeled child blocks (templates bind per-premise counters).
Replay is concrete: the script runs against a goal instantiated at an
explicit environment, results of closed premises feed later ones, and
every discharge is mechanical. `when` blocks select on evaluable guards,
`name` binds computed values for later witnesses, and `case`/`lemma`
steps splice in stored sub-derivations after an exact goal match.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..assertions import BudgetExceeded, canonize, show_canon
from ..hyper import IndexSet
from ..lang import ast
from ..lexing import ParseError, TokenStream
from ..logic_text import LogicParser
from ..terms import eval_formula, eval_term
from ..values import Index, Value
from .goals import Goal, HyperResults, KernelError, LeafResult, RulePlan, goal_of_triple
from .rules import apply_rule
from .goals import RuleApp

DERIV_DIR = os.path.join(os.path.dirname(__file__), "..", "suite", "derivs")

RULE_STEP_KINDS = {
    "ret": "RET", "read": "READ", "readarr": "READARR", "asn": "ASN",
    "asnarr": "ASNARR", "alc": "ALC", "malloc": "MALLOC", "free": "FR",
    "mfree": "MFREE", "len": "LEN", "entail": "ENTAIL", "if": "IF",
    "unfold": "UNFOLD", "frame": "FRAME", "conseq": "CONSEQ", "subst": "SUBST",
    "sequ1": "SEQU1", "sequ2": "SEQU2", "let": "LET", "focus": "FOCUS",
    "sequ": "SEQU", "wpnest": "WP_NEST", "product": "PRODUCT",
    "for": "FOR", "while": "WHILE",
}

TRANSFORMERS = {"IF", "UNFOLD", "FRAME", "CONSEQ"}
SINGLE_WRAPPERS = {"SUBST"}


class ScriptError(Exception):
    pass


@dataclass
class Step:
    kind: str
    args: Dict[str, str]
    blocks: List[Tuple[str, "Block"]]
    line: int
    text: str = ""


Block = List["Step"]


@dataclass
class Script:
    name: str
    target: Tuple[str, str]  # ("case", "3") or ("lemma", "index_range")
    block: Block


_ARG_RE = re.compile(r'([A-Za-z_][A-Za-z0-9_]*)=("(?:[^"]*)"|\S+)')


def _parse_line(text: str) -> Tuple[str, Dict[str, str]]:
    head, _, rest = text.partition(" ")
    args = {}
    for key, raw in _ARG_RE.findall(rest):
        args[key] = raw[1:-1] if raw.startswith('"') else raw
    return head, args


def parse_script(source: str, name: str = "<script>") -> Script:
    rows: List[Tuple[int, str, int]] = []
    for ln, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip())
        if indent % 2:
            raise ScriptError(f"{name}:{ln}: odd indentation")
        rows.append((indent // 2, stripped.strip(), ln))
    if not rows or not rows[0][1].startswith("target "):
        raise ScriptError(f"{name}: first line must be `target case <id>` or `target lemma <name>`")
    _, header, _ = rows[0]
    parts = header.split()
    if len(parts) != 3 or parts[1] not in ("case", "lemma"):
        raise ScriptError(f"{name}: bad target line {header!r}")
    target = (parts[1], parts[2])
    block, rest = _parse_block(rows[1:], 0, name)
    if rest:
        raise ScriptError(f"{name}:{rest[0][2]}: content at unexpected indentation")
    return Script(name, target, block)


def _parse_block(rows, level: int, name: str) -> Tuple[Block, list]:
    block: Block = []
    while rows:
        indent, text, ln = rows[0]
        if indent < level:
            break
        if indent > level:
            raise ScriptError(f"{name}:{ln}: unexpected indentation")
        rows = rows[1:]
        if text.startswith("@") or text.startswith("when "):
            raise ScriptError(f"{name}:{ln}: label outside a rule")
        head, args = _parse_line(text)
        step = Step(head, args, [], ln, text)
        # gather labeled child blocks and when-alternatives
        while rows and rows[0][0] == level + 1 and (
            rows[0][1].startswith("@") or rows[0][1].startswith("when ")
        ):
            label_indent, label_text, label_ln = rows[0]
            if not label_text.endswith(":"):
                raise ScriptError(f"{name}:{label_ln}: label must end with ':'")
            rows = rows[1:]
            child, rows = _parse_block(rows, level + 2, name)
            step.blocks.append((label_text[:-1].strip(), child))
        block.append(step)
    return block, rows


# --- witness parsing helpers ---


def _sub_parser(text: str) -> LogicParser:
    return LogicParser(TokenStream(text))


def _parse_full(text: str, what: str):
    p = _sub_parser(text)
    out = getattr(p, what)()
    if not p.ts.at_kind("eof"):
        raise p.ts.error("trailing input in witness")
    return out


def _parse_template(text: str, what: str) -> Tuple[str, object]:
    binder, sep, body = text.partition("=>")
    if not sep:
        raise ScriptError(f"template witness needs 'k => ...': {text!r}")
    return binder.strip(), _parse_full(body.strip(), what)


def _split_top(text: str) -> List[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    last = "".join(cur).strip()
    if last:
        out.append(last)
    return out


_WITNESS_KINDS = {
    "on": "parse_index_set",
    "s1": "parse_index_set",
    "s2": "parse_index_set",
    "mid": "parse_assertion",
    "h": "parse_assertion",
    "ppre": "parse_assertion",
    "ppost": "parse_assertion",
    "pre": "parse_assertion",
    "post": "parse_assertion",
    "phi": "parse_reindexing",
    "count": "parse_term",
}
_TEMPLATE_KEYS = {"inv": "parse_assertion", "batch": "parse_index_set", "rpre": "parse_assertion",
                  "measure": "parse_term"}


def _witnesses_of(step: Step) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for key, raw in step.args.items():
        if key in _WITNESS_KINDS:
            out[key] = _parse_full(raw, _WITNESS_KINDS[key])
        elif key in _TEMPLATE_KEYS:
            out[key] = _parse_template(raw, _TEMPLATE_KEYS[key])
        elif key == "var":
            out[key] = raw
    return out


# --- replay engine ---


@dataclass
class ReplayOutcome:
    status: str  # checked | conditional | failed
    entailments: int = 0
    assumptions: List[str] = field(default_factory=list)
    rules_used: List[str] = field(default_factory=list)
    milestones: Dict[str, str] = field(default_factory=dict)
    reason: str = ""
    root_cross_check: str = ""
    rule_ticks_expected: List[str] = field(default_factory=list)
    ticks_match: Optional[bool] = None

    @property
    def exit_code(self) -> int:
        return {"checked": 0, "failed": 1}.get(self.status, 2)

    def summary(self) -> str:
        if self.status == "checked":
            return f"Checked (bounded entailments: {self.entailments})"
        if self.status == "conditional":
            return f"Conditional on {len(self.assumptions)} assumption(s)"
        return f"Failed: {self.reason}"

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "bounded_entailments": self.entailments,
            "rules_used": sorted(set(self.rules_used)),
        }
        if self.assumptions:
            out["assumptions"] = list(self.assumptions)
        if self.reason:
            out["reason"] = self.reason
        if self.root_cross_check:
            out["root_cross_check"] = self.root_cross_check
        if self.ticks_match is not None:
            out["expected_rules"] = self.rule_ticks_expected
            out["rules_match_table"] = self.ticks_match
        return out


class ReplayCtx:
    def __init__(self, loader, depth: int = 0):
        self.entailments = 0
        self.assumptions: List[str] = []
        self.rules_used: List[str] = []
        self.milestones: Dict[str, str] = {}
        self.loader = loader
        self.depth = depth

    def child(self) -> "ReplayCtx":
        sub = ReplayCtx(self.loader, self.depth + 1)
        if sub.depth > 16:
            raise ScriptError("derivation composition nests too deeply")
        return sub


def show_goal(goal: Goal) -> str:
    pre = show_canon(canonize(goal.pre, goal.scope_pre()))
    post = show_canon(canonize(goal.post, goal.scope_post()))
    idxs = ", ".join(repr(i) for i in sorted(goal.indices))
    return f"indices: {idxs}\n--- pre ---\n{pre}\n--- post ---\n{post}"


def run_block(block: Block, goal: Goal, ctx: ReplayCtx, top: bool) -> HyperResults:
    wrappers: List = []

    def finish(results: HyperResults) -> HyperResults:
        for assemble in reversed(wrappers):
            results = assemble([results])
        return results

    i = 0
    while i < len(block):
        step = block[i]
        kind = step.kind
        if kind == "name":
            m = re.match(r"(\w+)\s*=\s*(.+)", " ".join(step.text.split()[1:]))
            if not m:
                raise ScriptError(f"line {step.line}: bad name step")
            term = _parse_full(m.group(2), "parse_term")
            value = eval_term(term, goal.scope_pre())
            env = dict(goal.env)
            env[m.group(1)] = value
            goal = Goal(goal.pre, goal.indices, goal.product, goal.post, env,
                        dict(goal.outer), dict(goal.pre_ret), goal.context)
            i += 1
            continue
        if kind == "milestone":
            label = step.text.split(None, 1)[1]
            ctx.milestones[label] = show_goal(goal)
            i += 1
            continue
        if kind == "assume":
            ctx.assumptions.append(step.args.get("note", f"line {step.line}"))
            return finish({})
        if kind in ("case", "lemma"):
            return finish(_run_composition(step, goal, ctx))
        if kind == "when":
            raise ScriptError(f"line {step.line}: bare `when` outside alternatives")
        if kind not in RULE_STEP_KINDS:
            raise ScriptError(f"line {step.line}: unknown step {kind!r}")
        rule = RULE_STEP_KINDS[kind]
        if top:
            ctx.rules_used.append(rule)
        witnesses = _witnesses_of(step)
        try:
            outcome = apply_rule(goal, RuleApp(rule, witnesses))
        except KernelError as e:
            raise ScriptError(f"line {step.line} ({kind}): {e}") from None
        if isinstance(outcome, LeafResult):
            ctx.entailments += outcome.entailments
            if i + 1 != len(block):
                raise ScriptError(f"line {step.line}: steps after a closing leaf")
            return finish(outcome.results)
        ctx.entailments += outcome.entailments
        if rule in TRANSFORMERS or rule in SINGLE_WRAPPERS:
            if len(outcome.premises) != 1:
                raise ScriptError(f"line {step.line}: expected one premise")
            sub = outcome.premises[0].make({})
            if step.blocks:
                results = _run_alternatives_or_block(step, sub, ctx, top)
                try:
                    return finish(outcome.assemble([results]))
                except KernelError as e:
                    raise ScriptError(f"line {step.line}: {e}") from None
            goal = sub
            wrappers.append(outcome.assemble)
            i += 1
            if i == len(block):
                raise ScriptError(f"line {step.line}: {kind} needs a continuation")
            continue
        # multi-premise rule: close premises via labeled/templated blocks
        results_list: List[HyperResults] = []
        acc: HyperResults = {}
        for premise in outcome.premises:
            sub = premise.make(dict(acc))
            chosen = _match_block(step, premise.label, sub)
            if chosen is None:
                raise ScriptError(
                    f"line {step.line}: no block for premise {premise.label!r}"
                )
            bound_block, binding = chosen
            if binding:
                env = dict(sub.env)
                env.update(binding)
                sub = Goal(sub.pre, sub.indices, sub.product, sub.post, env,
                           dict(sub.outer), dict(sub.pre_ret), sub.context)
            try:
                res = run_block(bound_block, sub, ctx, top)
            except ScriptError:
                raise
            results_list.append(res)
            acc.update(res)
        if len(block) != i + 1:
            raise ScriptError(f"line {step.line}: steps after a multi-premise rule")
        try:
            return finish(outcome.assemble(results_list))
        except KernelError as e:
            raise ScriptError(f"line {step.line}: {e}") from None
    raise ScriptError("block ended without closing its goal")


def _run_alternatives_or_block(step: Step, goal: Goal, ctx: ReplayCtx, top: bool) -> HyperResults:
    """Child of a transformer: either a single unlabeled continuation made of
    `when` alternatives, or a plain labeled block."""
    whens = [(lbl, blk) for lbl, blk in step.blocks if lbl.startswith("when ")]
    if whens:
        return _select_when(whens, goal, ctx, top, step.line)
    if len(step.blocks) == 1:
        return run_block(step.blocks[0][1], goal, ctx, top)
    raise ScriptError(f"line {step.line}: ambiguous continuation blocks")


def _select_when(whens, goal: Goal, ctx: ReplayCtx, top: bool, line: int) -> HyperResults:
    scope = goal.scope_pre()
    matches = []
    for lbl, blk in whens:
        cond_text = lbl[len("when "):].strip()
        if cond_text.startswith('"') and cond_text.endswith('"'):
            cond_text = cond_text[1:-1]
        cond = _parse_full(cond_text, "parse_formula")
        if eval_formula(cond, scope):
            matches.append((lbl, blk))
    if len(matches) != 1:
        raise ScriptError(f"line {line}: {len(matches)} `when` guards hold (need exactly 1)")
    return run_block(matches[0][1], goal, ctx, top)


def _match_block(step: Step, label: str, sub: Goal):
    """Find the child block for a premise label; bind template parameters."""
    kind, _, payload = label.partition(":")
    for lbl, blk in step.blocks:
        if lbl.startswith("when "):
            continue
        if not lbl.startswith("@"):
            continue
        tokens = lbl[1:].split()
        if not tokens:
            continue
        want = tokens[0]
        if want != kind and not (want == "each" and kind == "each"):
            continue
        if kind in ("body", "guard") and len(tokens) == 2:
            return blk, {tokens[1]: int(payload)}
        if kind == "each":
            binding: Dict[str, object] = {}
            (idx,) = tuple(sub.indices)
            binding["iota"] = idx
            if len(tokens) == 2:
                names = tokens[1].strip("()").split(",")
                names = [n.strip() for n in names if n.strip()]
                if len(names) != len(idx.args):
                    raise ScriptError(
                        f"@each binders {names} do not fit index {idx!r}"
                    )
                binding.update(dict(zip(names, idx.args)))
            return blk, binding
        if len(tokens) == 1:
            return blk, {}
    # templates allow a `when` split directly under a parametric label
    return None


def _run_composition(step: Step, goal: Goal, ctx: ReplayCtx) -> HyperResults:
    target_kind = step.kind  # case | lemma
    target_name = step.text.split()[1]
    bind_text = step.args.get("bind", "")
    scope = goal.scope_pre()
    env: Dict[str, object] = {}
    for item in _split_top(bind_text):
        if not item:
            continue
        key, _, vtext = item.partition("=")
        key = key.strip()
        vtext = vtext.strip()
        if _looks_like_index(vtext):
            env[key] = eval_term_index(vtext, scope)
        else:
            env[key] = eval_term(_parse_full(vtext, "parse_term"), scope)
    script, root_goal = ctx.loader(target_kind, target_name, env)
    _match_goal(goal, root_goal, step)
    sub_ctx = ctx.child()
    results = run_block(script.block, root_goal, sub_ctx, top=False)
    ctx.entailments += sub_ctx.entailments
    ctx.assumptions.extend(sub_ctx.assumptions)
    return results


def _looks_like_index(text: str) -> bool:
    return text.startswith("idx(") or text == "iota"


def eval_term_index(text: str, scope) -> Index:
    from ..terms import eval_index

    p = _sub_parser(text)
    ix = p.parse_index_term()
    return eval_index(ix, scope)


def _match_goal(goal: Goal, target: Goal, step: Step) -> None:
    if goal.indices != target.indices:
        raise ScriptError(
            f"line {step.line}: index sets differ: {sorted(goal.indices)} vs {sorted(target.indices)}"
        )
    ca, cb = canonize(goal.pre, goal.scope_pre()), canonize(target.pre, target.scope_pre())
    if ca != cb:
        raise ScriptError(
            f"line {step.line}: preconditions differ\n--- goal ---\n{show_canon(ca)}\n--- target ---\n{show_canon(cb)}"
        )
    pa, pb = canonize(goal.post, goal.scope_post()), canonize(target.post, target.scope_post())
    if pa != pb:
        raise ScriptError(
            f"line {step.line}: postconditions differ\n--- goal ---\n{show_canon(pa)}\n--- target ---\n{show_canon(pb)}"
        )
    genv = goal.value_env()
    tenv = target.value_env()
    for idx in sorted(goal.indices):
        a = _eta(ast.subst_cmd(goal.product.command_at(idx), genv))
        b = _eta(ast.subst_cmd(target.product.command_at(idx), tenv))
        if a != b:
            raise ScriptError(
                f"line {step.line}: programs differ at {idx!r}:\n{a!r}\nvs\n{b!r}"
            )


def _eta(cmd: ast.Cmd) -> ast.Cmd:
    """`let x := c in return x` is c."""
    while (
        type(cmd) is ast.Let
        and type(cmd.body) is ast.Pure
        and type(cmd.body.expr) is ast.Var
        and cmd.body.expr.name == cmd.name
    ):
        cmd = cmd.bound
    return cmd


# --- loading and top-level entry points ---

_SCRIPT_CACHE: Dict[str, Script] = {}


def load_script(kind: str, name: str) -> Script:
    fname = f"{kind}{name}.deriv" if kind == "case" else f"lemma_{name}.deriv"
    path = os.path.join(DERIV_DIR, fname)
    key = os.path.abspath(path)
    if key not in _SCRIPT_CACHE:
        if not os.path.exists(path):
            raise ScriptError(f"stored derivation {fname} is missing")
        with open(path, "r", encoding="utf-8") as fh:
            _SCRIPT_CACHE[key] = parse_script(fh.read(), fname)
    return _SCRIPT_CACHE[key]


def _loader(kind: str, name: str, env: Dict[str, object]):
    script = load_script(kind, name)
    if kind == "case":
        from ..suite.cases import get_case

        case = get_case(int(name))
        root = goal_of_triple(case.triple, env)
    else:
        from .lemmas import get_lemma

        lemma = get_lemma(name)
        root = goal_of_triple(lemma.triple, env)
    return script, root


def replay_goal(script: Script, root: Goal) -> ReplayOutcome:
    ctx = ReplayCtx(_loader)
    try:
        run_block(script.block, root, ctx, top=True)
    except (ScriptError, KernelError, BudgetExceeded) as e:
        return ReplayOutcome("failed", ctx.entailments, ctx.assumptions,
                             ctx.rules_used, ctx.milestones, reason=str(e))
    status = "conditional" if ctx.assumptions else "checked"
    return ReplayOutcome(status, ctx.entailments, ctx.assumptions,
                         ctx.rules_used, ctx.milestones)


def replay_case(case, config=None) -> ReplayOutcome:
    """Replay a case's stored script at its canonical instance, then
    cross-check the root triple semantically (belt and braces)."""
    from ..checker import Config, check_triple

    config = config or Config()
    script = load_script("case", str(case.cid))
    env, _ = case.scenario.build(case.canonical_params)
    root = goal_of_triple(case.triple, env)
    outcome = replay_goal(script, root)
    outcome.rule_ticks_expected = sorted(case.ticks)
    used = set(outcome.rules_used) & {"FOR", "WHILE", "FOCUS", "SUBST"}
    outcome.ticks_match = used == set(case.ticks)
    if outcome.status == "checked":
        trials = min(30, config.trials)
        verdict = check_triple(case.triple, case.scenario, trials, config)
        outcome.root_cross_check = verdict.kind
        if verdict.kind != "valid":
            raise RuntimeError(
                f"kernel bug: case {case.cid} derivation checked but the root "
                f"triple is {verdict.kind} semantically"
            )
    return outcome


def replay_lemma(name: str) -> ReplayOutcome:
    from .lemmas import get_lemma

    lemma = get_lemma(name)
    script = load_script("lemma", name)
    root = goal_of_triple(lemma.triple, lemma.canonical_env())
    outcome = replay_goal(script, root)
    if outcome.status == "checked":
        ok = _semantic_check_goal(root)
        outcome.root_cross_check = "valid" if ok else "invalid"
        if not ok:
            raise RuntimeError(f"kernel bug: lemma {name} checked but semantically invalid")
    return outcome


def _semantic_check_goal(goal: Goal) -> bool:
    """Execute the goal's unique pre-state and check the postcondition."""
    from ..assertions import satisfies
    from ..hyper import eval_product
    from .goals import heap_of_canon

    form = canonize(goal.pre, goal.scope_pre())
    h = heap_of_canon(form)
    try:
        results, h2 = eval_product(goal.indices, goal.product, h, goal.value_env())
    except Exception:
        return False
    return satisfies(h2, goal.scope_post(results), goal.post)


def replay_file(path: str) -> ReplayOutcome:
    with open(path, "r", encoding="utf-8") as fh:
        script = parse_script(fh.read(), os.path.basename(path))
    kind, name = script.target
    if kind == "case":
        from ..suite.cases import get_case

        return replay_case(get_case(int(name)))
    return replay_lemma(name)
