"""Bounded semantic checking of hyper-triples.

A triple is checked by generating (environment, hyper-heap) pairs from a
scenario, re-checking the precondition (generator bugs surface as
GeneratorError, never as verdicts), running the product, and checking the
postcondition against the results. Counterexamples shrink by reducing
dimensions first, then value magnitudes.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .assertions import Assertion, expand_replication, is_local, satisfies
from .hyper import (
    ComponentFault,
    ComponentOutOfFuel,
    HyperHeap,
    IndexSet,
    ProgramProduct,
    hyper_to_json,
)
from .lang.eval import DEFAULT_FUEL
from .terms import RET_KEY, FBool, canon_formula, show_formula
from .values import HyperValue, Index, value_to_json


class GeneratorError(Exception):
    """A scenario emitted a state that does not satisfy the precondition."""


class BudgetExceeded(Exception):
    pass


@dataclass
class Config:
    seed: int = 0
    trials: int = 200
    max_dim: int = 8
    value_lo: int = -5
    value_hi: int = 5
    densities: Tuple[float, ...] = (0.3, 0.5, 0.7)
    fuel: int = DEFAULT_FUEL
    exhaustive_cap: int = 5000

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "max_dim": self.max_dim,
            "value_range": [self.value_lo, self.value_hi],
            "densities": list(self.densities),
            "fuel": self.fuel,
            "exhaustive_cap": self.exhaustive_cap,
        }


@dataclass(frozen=True)
class HyperTriple:
    pre: Assertion
    indices: IndexSet
    product: ProgramProduct
    post: Assertion
    name: str = ""


Params = Dict[str, object]
BuildResult = Tuple[Dict[str, object], HyperHeap]


@dataclass
class Scenario:
    """Deterministic builder over a sampled parameter space.

    build() must be a pure function of the params; sample() draws params
    from the trial RNG; shrinks() proposes strictly smaller candidates;
    space() enumerates the whole bounded-exhaustive space when available.
    """

    build: Callable[[Params], BuildResult]
    sample: Callable[[random.Random, Config], Params]
    shrinks: Callable[[Params], Iterator[Params]] = lambda p: iter(())
    space: Optional[Callable[[Config], Iterator[Params]]] = None
    salt: str = ""


@dataclass
class Verdict:
    kind: str  # valid | invalid | inconclusive
    trials_run: int
    seed: int
    counterexample: Optional[dict] = None
    detail: str = ""
    exhaustive: bool = False

    @property
    def exit_code(self) -> int:
        return {"valid": 0, "invalid": 1}.get(self.kind, 2)

    def to_json(self) -> dict:
        out = {
            "verdict": self.kind,
            "trials": self.trials_run,
            "seed": self.seed,
        }
        if self.exhaustive:
            out["exhaustive"] = True
        if self.detail:
            out["detail"] = self.detail
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


def trial_rng(seed: int, salt: str, trial: int) -> random.Random:
    return random.Random(f"{seed}/{salt}/{trial}")


def _params_json(params: Params):
    out = {}
    for k in sorted(params):
        v = params[k]
        if isinstance(v, tuple):
            out[k] = [list(r) if isinstance(r, tuple) else r for r in v]
        else:
            out[k] = v
    return out


@dataclass
class _TrialOutcome:
    status: str  # ok | post_failed | fault | fuel
    index: Optional[Index] = None
    results: Optional[HyperValue] = None
    heap: Optional[HyperHeap] = None
    failing: Optional[List[str]] = None
    fault: str = ""


def _run_once(triple: HyperTriple, env: Dict[str, object], h: HyperHeap, config: Config) -> _TrialOutcome:
    from .hyper import eval_product

    indices = triple.indices.materialize(env)
    pre = expand_replication(triple.pre, indices)
    if not satisfies(h, env, pre):
        raise GeneratorError("generated state does not satisfy the precondition")
    try:
        results, h2 = eval_product(indices, triple.product, h, env, config.fuel)
    except ComponentFault as cf:
        return _TrialOutcome("fault", index=cf.index, fault=str(cf.fault))
    except ComponentOutOfFuel as of:
        return _TrialOutcome("fuel", index=of.index)
    post_env = dict(env)
    post_env[RET_KEY] = results
    post = expand_replication(triple.post, indices)
    if satisfies(h2, post_env, post):
        return _TrialOutcome("ok", results=results, heap=h2)
    return _TrialOutcome(
        "post_failed",
        results=results,
        heap=h2,
        failing=_failing_conjuncts(post, post_env),
    )


def _failing_conjuncts(post: Assertion, env: Dict[str, object]) -> List[str]:
    """Names of pure conjuncts that evaluate false; spatial mismatch otherwise."""
    from .assertions import canonize

    try:
        form = canonize(post, env)
    except Exception:
        return ["<postcondition not evaluable>"]
    out = []
    for p in form.pures:
        q = canon_formula(p, env)
        if q == FBool(False):
            out.append(show_formula(p))
    return out or ["<spatial mismatch>"]


def _counterexample_json(params: Params, outcome: _TrialOutcome, trial: int) -> dict:
    ce = {"trial": trial, "params": _params_json(params)}
    if outcome.results is not None:
        ce["results"] = [
            [[i.tag, list(i.args)], value_to_json(v)] for i, v in sorted(outcome.results.items())
        ]
    if outcome.heap is not None:
        ce["heap"] = hyper_to_json(outcome.heap)
    if outcome.failing:
        ce["failing"] = outcome.failing
    if outcome.fault:
        ce["fault"] = outcome.fault
        if outcome.index is not None:
            ce["index"] = [outcome.index.tag, list(outcome.index.args)]
    return ce


def _shrink(
    triple: HyperTriple,
    scenario: Scenario,
    params: Params,
    config: Config,
    max_steps: int = 400,
) -> Tuple[Params, _TrialOutcome]:
    current = params
    env, h = scenario.build(current)
    outcome = _run_once(triple, env, h, config)
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for cand in scenario.shrinks(current):
            steps += 1
            if steps >= max_steps:
                break
            try:
                env, h = scenario.build(cand)
                got = _run_once(triple, env, h, config)
            except Exception:
                # incoherent shrink candidate (coupled dims, format invariants)
                continue
            if got.status in ("post_failed", "fault"):
                current, outcome = cand, got
                improved = True
                break
    return current, outcome


def check_triple(
    triple: HyperTriple,
    scenario: Scenario,
    trials: int,
    config: Optional[Config] = None,
) -> Verdict:
    config = config or Config()
    assert trials >= 1
    for t in range(trials):
        rng = trial_rng(config.seed, scenario.salt, t)
        params = scenario.sample(rng, config)
        env, h = scenario.build(params)
        outcome = _run_once(triple, env, h, config)
        if outcome.status == "ok":
            continue
        if outcome.status == "fuel":
            return Verdict(
                "inconclusive", t + 1, config.seed,
                detail=f"fuel exhausted at component {outcome.index!r}",
            )
        shrunk, final = _shrink(triple, scenario, params, config)
        return Verdict(
            "invalid", t + 1, config.seed,
            counterexample=_counterexample_json(shrunk, final, t),
            detail="fault under satisfied precondition" if final.status == "fault" else "",
        )
    return Verdict("valid", trials, config.seed)


def check_triple_exhaustive(
    triple: HyperTriple,
    scenario: Scenario,
    config: Optional[Config] = None,
) -> Verdict:
    config = config or Config()
    if scenario.space is None:
        raise BudgetExceeded("scenario has no exhaustive space")
    count = 0
    for params in scenario.space(config):
        count += 1
        if count > config.exhaustive_cap:
            raise BudgetExceeded(f"model space exceeds {config.exhaustive_cap} instances")
        env, h = scenario.build(params)
        outcome = _run_once(triple, env, h, config)
        if outcome.status == "ok":
            continue
        if outcome.status == "fuel":
            return Verdict("inconclusive", count, config.seed,
                           detail=f"fuel exhausted at component {outcome.index!r}")
        return Verdict(
            "invalid", count, config.seed,
            counterexample=_counterexample_json(params, outcome, count - 1),
            detail="fault under satisfied precondition" if outcome.status == "fault" else "",
        )
    return Verdict("valid", count, config.seed, exhaustive=True)


def triple_locality_ok(triple: HyperTriple, env: Dict[str, object]) -> bool:
    """The triple invariant: spatial parts of pre/post stay inside the set."""
    indices = triple.indices.materialize(env)
    scope = dict(env)
    scope[RET_KEY] = {i: 0 for i in indices}
    return is_local(triple.pre, indices, scope, ambient=indices) and is_local(
        triple.post, indices, scope, ambient=indices
    )


# --- generic shrinking helpers over dense parameter dicts ---


def shrink_int(v: int) -> Iterator[int]:
    if v == 0:
        return
    yield 0
    if abs(v) > 1:
        yield v // 2
    if v > 0:
        yield v - 1
    else:
        yield v + 1


def shrink_vector(v: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if len(v) > 1:
        yield v[:-1]
        yield v[1:]
    for k in range(len(v)):
        for smaller in shrink_int(v[k]):
            yield v[:k] + (smaller,) + v[k + 1:]


def shrink_matrix(m: Tuple[Tuple[int, ...], ...]) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    if len(m) > 1:
        yield m[:-1]
        yield m[1:]
    if m and len(m[0]) > 1:
        yield tuple(r[:-1] for r in m)
        yield tuple(r[1:] for r in m)
    for i in range(len(m)):
        for smaller in shrink_vector(m[i]):
            yield m[:i] + (smaller,) + m[i + 1:]


def shrink_params(params: Params) -> Iterator[Params]:
    """Dimension reductions first, then magnitude reductions, key by key."""
    keys = sorted(params)
    for key in keys:
        v = params[key]
        if isinstance(v, tuple) and v and isinstance(v[0], tuple):
            for m in shrink_matrix(v):
                yield {**params, key: m}
        elif isinstance(v, tuple):
            for w in shrink_vector(v):
                yield {**params, key: w}
    for key in keys:
        v = params[key]
        if isinstance(v, int) and not isinstance(v, bool):
            for w in shrink_int(v):
                yield {**params, key: w}
