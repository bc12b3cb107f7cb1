"""The case-study registry: kernels, triples, scenarios, mutations.

Postconditions are stated against access-function hyper-results (never a
hand-written dense model); the dense oracles enter only through tests.
Composite kernels over unordered rows declare per-batch copies of the
sparse-vector access components (tag 3 carries the batch position), which
keeps loop-rule batches strictly disjoint.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Optional, Tuple

from ..assertions import AArr, ARepl, Assertion, star
from ..checker import Config, HyperTriple, Params, Scenario, shrink_params
from ..formats import (
    encode_coo,
    encode_csr,
    encode_rle,
    encode_sv,
    encode_ucsr,
)
from ..hyper import HyperHeap, IndexSet, TaggedProduct
from ..lang import ast, parse_command
from ..lang.heap import Heap
from ..logic_text import parse_assertion, parse_index_set
from ..terms import IVar, tv
from ..values import Loc
from . import programs


def arrs_each(names: Tuple[str, ...]) -> Assertion:
    """The replicated unmodified-arrays predicate over all components."""
    return ARepl("I", star(*(AArr(tv(n), IVar("I"), tv(n + "_p")) for n in names)))


def _call(text: str) -> ast.Cmd:
    return parse_command(text)


def _layout(payloads: Dict[str, Tuple[int, ...]]) -> Tuple[Dict[str, object], Heap]:
    heap = Heap()
    env: Dict[str, object] = {}
    for name in sorted(payloads):
        data = list(payloads[name])
        env[name] = heap.alloc_block(len(data), data)
        env[name + "_p"] = tuple(data)
    return env, heap


def replicate(base: Heap, indices) -> HyperHeap:
    h = HyperHeap()
    for idx in indices:
        h.set_component(idx, base.clone())
    return h


def sample_vector(rng: random.Random, config: Config, n: Optional[int] = None) -> Tuple[int, ...]:
    if n is None:
        n = rng.randint(1, config.max_dim)
    density = rng.choice(config.densities)
    pool = [v for v in range(config.value_lo, config.value_hi + 1) if v != 0]
    return tuple(rng.choice(pool) if rng.random() < density else 0 for _ in range(n))


def sample_matrix(rng: random.Random, config: Config) -> Tuple[Tuple[int, ...], ...]:
    m = rng.randint(1, config.max_dim)
    n = rng.randint(1, config.max_dim)
    density = rng.choice(config.densities)
    pool = [v for v in range(config.value_lo, config.value_hi + 1) if v != 0]
    return tuple(
        tuple(rng.choice(pool) if rng.random() < density else 0 for _ in range(n))
        for _ in range(m)
    )


@dataclass
class CaseStudy:
    cid: int
    title: str
    formats: str
    returns: str
    ticks: frozenset
    uses: Tuple[int, ...]
    kernel_name: str
    triple: HyperTriple
    scenario: Scenario
    mutation_label: str
    mutated_triple: HyperTriple
    canonical_params: Params
    derivation: Optional[str] = None

    def table_row(self) -> dict:
        return {
            "id": self.cid,
            "operation": self.title,
            "formats": self.formats,
            "returns": self.returns,
            "rules": sorted(self.ticks),
            "uses": list(self.uses),
            "derivation": self.derivation or "",
        }


def _triple_pair(cid: int, pre, iset, parts, post) -> Tuple[HyperTriple, str, HyperTriple]:
    """The case triple plus the same triple over the mutated program."""
    program = programs.case_program(cid)
    label, bad_program = programs.mutated_program(cid)
    name = f"case{cid}"
    good = HyperTriple(pre, iset, TaggedProduct(parts, program), post, name)
    bad = HyperTriple(pre, iset, TaggedProduct(parts, bad_program), post, name + ":" + label)
    return good, label, bad


def _mk_scenario(
    triple: HyperTriple,
    sample: Callable[[random.Random, Config], Params],
    build_env: Callable[[Params], Tuple[Dict[str, object], Heap]],
    salt: str,
) -> Scenario:
    def build(params: Params):
        env, base = build_env(params)
        indices = triple.indices.materialize(env)
        return env, replicate(base, indices)

    return Scenario(build=build, sample=sample, shrinks=shrink_params, salt=salt)


_REGISTRY: Dict[int, CaseStudy] = {}


def _register(case: CaseStudy) -> None:
    _REGISTRY[case.cid] = case


def _case_1() -> CaseStudy:
    pre = arrs_each(("x_ind", "x_val"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i) | i in [0, N)})")
    parts = {
        1: ((), _call("sv_sum(x_ind, x_val, lo, hi)")),
        2: (("i",), _call("sv_get_range(x_ind, x_val, lo, hi, i)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, N, ret(idx(2, i)))]"
        " * each I { arr(x_ind, I, x_ind_p) * arr(x_val, I, x_val_p) }"
    )
    triple, label, bad = _triple_pair(1, pre, iset, parts, post)

    def build_env(params: Params):
        sv = encode_sv(params["x"])
        sv.validate()
        env, heap = _layout({"x_ind": sv.x_ind, "x_val": sv.x_val})
        env.update(N=sv.n, lo=0, hi=len(sv.x_ind))
        return env, heap

    scenario = _mk_scenario(
        triple, lambda rng, cfg: {"x": sample_vector(rng, cfg)}, build_env, "case1"
    )
    return CaseStudy(
        1, "sum_i x_i", "SV (x)", "int", frozenset({"FOR", "FOCUS"}), (),
        "sv_sum", triple, scenario, label, bad,
        {"x": (0, 10, 0, 20)}, derivation="case1",
    )


def _case_2() -> CaseStudy:
    pre = arrs_each(("x_ind", "x_val", "y"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i) | i in [0, N)})")
    parts = {
        1: ((), _call("sv_dot_dense(x_ind, x_val, y, lo, hi)")),
        2: (("i",), _call("sv_get_range(x_ind, x_val, lo, hi, i)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, N, ret(idx(2, i)) * at(y_p, i))]"
        " * each I { arr(x_ind, I, x_ind_p) * arr(x_val, I, x_val_p) * arr(y, I, y_p) }"
    )
    triple, label, bad = _triple_pair(2, pre, iset, parts, post)

    def build_env(params: Params):
        sv = encode_sv(params["x"])
        sv.validate()
        env, heap = _layout({"x_ind": sv.x_ind, "x_val": sv.x_val, "y": params["y"]})
        env.update(N=sv.n, lo=0, hi=len(sv.x_ind))
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        x = sample_vector(rng, cfg)
        return {"x": x, "y": sample_vector(rng, cfg, n=len(x))}

    scenario = _mk_scenario(triple, sample, build_env, "case2")
    return CaseStudy(
        2, "sum_i x_i*y_i", "SV (x), D (y)", "int", frozenset({"FOR", "FOCUS"}), (),
        "sv_dot_dense", triple, scenario, label, bad,
        {"x": (0, 2, 0, 3), "y": (1, -1, 2, 5)}, derivation="case2",
    )


def _case_3() -> CaseStudy:
    pre = arrs_each(("y_ind", "y_val", "x_ind", "x_val"))
    iset = parse_index_set(
        "union({idx(1)}, {idx(2, j) | j in [0, N)}, {idx(3, j) | j in [0, N)})"
    )
    parts = {
        1: ((), _call("spvspv(y_ind, y_val, ylo, yhi, x_ind, x_val)")),
        2: (("j",), _call("sv_get_range(y_ind, y_val, ylo, yhi, j)")),
        3: (("j",), _call("sv_get(x_ind, x_val, j)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(j, 0, N, ret(idx(2, j)) * ret(idx(3, j)))]"
        " * each I { arr(y_ind, I, y_ind_p) * arr(y_val, I, y_val_p)"
        " * arr(x_ind, I, x_ind_p) * arr(x_val, I, x_val_p) }"
    )
    triple, label, bad = _triple_pair(3, pre, iset, parts, post)

    def build_env(params: Params):
        ysv = encode_sv(params["y"])
        xsv = encode_sv(params["x"])
        ysv.validate()
        xsv.validate()
        env, heap = _layout({
            "y_ind": ysv.x_ind, "y_val": ysv.x_val,
            "x_ind": xsv.x_ind, "x_val": xsv.x_val,
        })
        env.update(N=xsv.n, ylo=0, yhi=len(ysv.x_ind))
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        n = rng.randint(1, cfg.max_dim)
        return {"y": sample_vector(rng, cfg, n=n), "x": sample_vector(rng, cfg, n=n)}

    scenario = _mk_scenario(triple, sample, build_env, "case3")
    return CaseStudy(
        3, "sum_i x_i*y_i", "SV (x), SV (y)", "int", frozenset({"WHILE", "FOCUS"}), (),
        "spvspv", triple, scenario, label, bad,
        {"y": (5, 0, 0, 7), "x": (0, 10, 0, 20)}, derivation="case3",
    )


def _case_4() -> CaseStudy:
    pre = arrs_each(("row", "col", "val"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)})")
    parts = {
        1: ((), _call("coo_sum(row, col, val)")),
        2: (("i", "j"), _call("coo_get(row, col, val, i, j)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, M, sum(j, 0, N, ret(idx(2, i, j))))]"
        " * each I { arr(row, I, row_p) * arr(col, I, col_p) * arr(val, I, val_p) }"
    )
    triple, label, bad = _triple_pair(4, pre, iset, parts, post)

    def build_env(params: Params):
        coo = encode_coo(params["a"], seed=params["perm"])
        coo.validate()
        env, heap = _layout({"row": coo.row, "col": coo.col, "val": coo.val})
        env.update(M=coo.m, N=coo.n)
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        return {"a": sample_matrix(rng, cfg), "perm": rng.getrandbits(16)}

    scenario = _mk_scenario(triple, sample, build_env, "case4")
    return CaseStudy(
        4, "sum_ij A_ij", "COO (A)", "int", frozenset({"FOR", "FOCUS"}), (),
        "coo_sum", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "perm": 1}, derivation="case4",
    )


def _csr_env(params: Params):
    csr = encode_csr(params["a"])
    csr.validate()
    payloads = {"m_ptr": csr.m_ptr, "m_ind": csr.m_ind, "m_val": csr.m_val}
    extra = dict(params.get("extra_payloads", {}))
    payloads.update(extra)
    env, heap = _layout(payloads)
    env.update(M=csr.m, N=csr.n)
    return env, heap


def _case_5() -> CaseStudy:
    pre = arrs_each(("m_ptr", "m_ind", "m_val"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)})")
    parts = {
        1: ((), _call("csr_sum(m_ptr, m_ind, m_val, M)")),
        2: (("i", "j"), _call("csr_get(m_ptr, m_ind, m_val, i, j)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, M, sum(j, 0, N, ret(idx(2, i, j))))]"
        " * each I { arr(m_ptr, I, m_ptr_p) * arr(m_ind, I, m_ind_p) * arr(m_val, I, m_val_p) }"
    )
    triple, label, bad = _triple_pair(5, pre, iset, parts, post)
    scenario = _mk_scenario(
        triple, lambda rng, cfg: {"a": sample_matrix(rng, cfg)}, _csr_env, "case5"
    )
    return CaseStudy(
        5, "sum_ij A_ij", "CSR (A)", "int", frozenset({"FOR", "SUBST"}), (1,),
        "csr_sum", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0))}, derivation="case5",
    )


def _case_6() -> CaseStudy:
    pre = arrs_each(("m_ptr", "m_ind", "m_val", "y"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)})")
    parts = {
        1: ((), _call("csr_matvec_d(m_ptr, m_ind, m_val, y, M)")),
        2: (("i", "j"), _call("csr_get(m_ptr, m_ind, m_val, i, j)")),
    }
    post = parse_assertion(
        "exists s { arr(ret(idx(1)), idx(1), s)"
        " * [forall i in [0, M): at(s, i) = sum(j, 0, N, ret(idx(2, i, j)) * at(y_p, j))] }"
        " * each I { arr(m_ptr, I, m_ptr_p) * arr(m_ind, I, m_ind_p)"
        " * arr(m_val, I, m_val_p) * arr(y, I, y_p) }"
    )
    triple, label, bad = _triple_pair(6, pre, iset, parts, post)

    def sample(rng: random.Random, cfg: Config) -> Params:
        a = sample_matrix(rng, cfg)
        return {"a": a, "extra_payloads": {"y": sample_vector(rng, cfg, n=len(a[0]))}}

    scenario = _mk_scenario(triple, sample, _csr_env, "case6")
    return CaseStudy(
        6, "sum_j A_ij*x_j", "CSR (A), D (x)", "int[]", frozenset({"FOR", "SUBST"}), (2,),
        "csr_matvec_d", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "extra_payloads": {"y": (1, -1, 2)}},
        derivation="case6",
    )


def _case_7() -> CaseStudy:
    pre = arrs_each(("m_ptr", "m_ind", "m_val", "x_ind", "x_val"))
    iset = parse_index_set(
        "union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)},"
        " {idx(3, k, j) | k in [0, M), j in [0, N)})"
    )
    parts = {
        1: ((), _call("csr_matvec_sv(m_ptr, m_ind, m_val, x_ind, x_val, M)")),
        2: (("i", "j"), _call("csr_get(m_ptr, m_ind, m_val, i, j)")),
        3: (("k", "j"), _call("sv_get(x_ind, x_val, j)")),
    }
    post = parse_assertion(
        "exists s { arr(ret(idx(1)), idx(1), s)"
        " * [forall i in [0, M): at(s, i) = sum(j, 0, N, ret(idx(2, i, j)) * ret(idx(3, i, j)))] }"
        " * each I { arr(m_ptr, I, m_ptr_p) * arr(m_ind, I, m_ind_p) * arr(m_val, I, m_val_p)"
        " * arr(x_ind, I, x_ind_p) * arr(x_val, I, x_val_p) }"
    )
    triple, label, bad = _triple_pair(7, pre, iset, parts, post)

    def build_env(params: Params):
        csr = encode_csr(params["a"])
        csr.validate()
        xsv = encode_sv(params["x"])
        xsv.validate()
        env, heap = _layout({
            "m_ptr": csr.m_ptr, "m_ind": csr.m_ind, "m_val": csr.m_val,
            "x_ind": xsv.x_ind, "x_val": xsv.x_val,
        })
        env.update(M=csr.m, N=csr.n)
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        a = sample_matrix(rng, cfg)
        return {"a": a, "x": sample_vector(rng, cfg, n=len(a[0]))}

    scenario = _mk_scenario(triple, sample, build_env, "case7")
    return CaseStudy(
        7, "sum_j A_ij*x_j", "CSR (A), SV (x)", "int[]", frozenset({"FOR", "SUBST"}), (3,),
        "csr_matvec_sv", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "x": (0, 2, 5)},
    )


def _ucsr_env(params: Params):
    u = encode_ucsr(params["a"], seed=params["perm"])
    u.validate()
    payloads = {"m_idx": u.m_idx, "m_ptr": u.m_ptr, "m_ind": u.m_ind, "m_val": u.m_val}
    payloads.update(params.get("extra_payloads", {}))
    env, heap = _layout(payloads)
    env.update(M=u.m, N=u.n)
    return env, heap


def _case_8() -> CaseStudy:
    pre = arrs_each(("m_idx", "m_ptr", "m_ind", "m_val"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)})")
    parts = {
        1: ((), _call("ucsr_sum(m_idx, m_ptr, m_ind, m_val)")),
        2: (("i", "j"), _call("ucsr_get(m_idx, m_ptr, m_ind, m_val, i, j)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, M, sum(j, 0, N, ret(idx(2, i, j))))]"
        " * each I { arr(m_idx, I, m_idx_p) * arr(m_ptr, I, m_ptr_p)"
        " * arr(m_ind, I, m_ind_p) * arr(m_val, I, m_val_p) }"
    )
    triple, label, bad = _triple_pair(8, pre, iset, parts, post)

    def sample(rng: random.Random, cfg: Config) -> Params:
        return {"a": sample_matrix(rng, cfg), "perm": rng.getrandbits(16)}

    scenario = _mk_scenario(triple, sample, _ucsr_env, "case8")
    return CaseStudy(
        8, "sum_ij A_ij", "uCSR (A)", "int", frozenset({"FOR", "FOCUS", "SUBST"}), (1,),
        "ucsr_sum", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "perm": 1}, derivation="case8",
    )


def _case_9() -> CaseStudy:
    pre = arrs_each(("m_idx", "m_ptr", "m_ind", "m_val", "y"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)})")
    parts = {
        1: ((), _call("ucsr_matvec_d(m_idx, m_ptr, m_ind, m_val, y, M)")),
        2: (("i", "j"), _call("ucsr_get(m_idx, m_ptr, m_ind, m_val, i, j)")),
    }
    post = parse_assertion(
        "exists s { arr(ret(idx(1)), idx(1), s)"
        " * [forall i in [0, M): at(s, i) = sum(j, 0, N, ret(idx(2, i, j)) * at(y_p, j))] }"
        " * each I { arr(m_idx, I, m_idx_p) * arr(m_ptr, I, m_ptr_p)"
        " * arr(m_ind, I, m_ind_p) * arr(m_val, I, m_val_p) * arr(y, I, y_p) }"
    )
    triple, label, bad = _triple_pair(9, pre, iset, parts, post)

    def sample(rng: random.Random, cfg: Config) -> Params:
        a = sample_matrix(rng, cfg)
        return {
            "a": a, "perm": rng.getrandbits(16),
            "extra_payloads": {"y": sample_vector(rng, cfg, n=len(a[0]))},
        }

    scenario = _mk_scenario(triple, sample, _ucsr_env, "case9")
    return CaseStudy(
        9, "sum_j A_ij*x_j", "uCSR (A), D (x)", "int[]",
        frozenset({"FOR", "FOCUS", "SUBST"}), (2,),
        "ucsr_matvec_d", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "perm": 1,
         "extra_payloads": {"y": (1, -1, 2)}},
    )


def _case_10() -> CaseStudy:
    pre = arrs_each(("m_idx", "m_ptr", "m_ind", "m_val", "x_ind", "x_val"))
    iset = parse_index_set(
        "union({idx(1)}, {idx(2, i, j) | i in [0, M), j in [0, N)},"
        " {idx(3, k, j) | k in [0, len(m_idx_p)), j in [0, N)})"
    )
    parts = {
        1: ((), _call("spmspv(m_idx, m_ptr, m_ind, m_val, x_ind, x_val, M)")),
        2: (("i", "j"), _call("ucsr_get(m_idx, m_ptr, m_ind, m_val, i, j)")),
        3: (("k", "j"), _call("sv_get(x_ind, x_val, j)")),
    }
    post = parse_assertion(
        "exists s { arr(ret(idx(1)), idx(1), s)"
        " * [forall k in [0, len(m_idx_p)):"
        " at(s, at(m_idx_p, k)) = sum(j, 0, N, ret(idx(2, at(m_idx_p, k), j)) * ret(idx(3, k, j)))]"
        " * [forall i in [0, M): i notin m_idx_p -> at(s, i) = 0] }"
        " * each I { arr(m_idx, I, m_idx_p) * arr(m_ptr, I, m_ptr_p)"
        " * arr(m_ind, I, m_ind_p) * arr(m_val, I, m_val_p)"
        " * arr(x_ind, I, x_ind_p) * arr(x_val, I, x_val_p) }"
    )
    triple, label, bad = _triple_pair(10, pre, iset, parts, post)

    def build_env(params: Params):
        u = encode_ucsr(params["a"], seed=params["perm"])
        u.validate()
        xsv = encode_sv(params["x"])
        xsv.validate()
        env, heap = _layout({
            "m_idx": u.m_idx, "m_ptr": u.m_ptr, "m_ind": u.m_ind, "m_val": u.m_val,
            "x_ind": xsv.x_ind, "x_val": xsv.x_val,
        })
        env.update(M=u.m, N=u.n)
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        a = sample_matrix(rng, cfg)
        return {"a": a, "perm": rng.getrandbits(16), "x": sample_vector(rng, cfg, n=len(a[0]))}

    scenario = _mk_scenario(triple, sample, build_env, "case10")
    return CaseStudy(
        10, "sum_j A_ij*x_j", "uCSR (A), SV (x)", "int[]",
        frozenset({"FOR", "FOCUS", "SUBST"}), (3,),
        "spmspv", triple, scenario, label, bad,
        {"a": ((1, 0, 3), (0, 0, 0), (0, 4, 0)), "perm": 1, "x": (0, 2, 5)},
        derivation="case10",
    )


def _case_11() -> CaseStudy:
    pre = arrs_each(("pos", "val"))
    iset = parse_index_set("union({idx(1)}, {idx(2, i) | i in [0, N)})")
    parts = {
        1: ((), _call("rle_sum(pos, val)")),
        2: (("i",), _call("rle_get(pos, val, i)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, N, ret(idx(2, i)))]"
        " * each I { arr(pos, I, pos_p) * arr(val, I, val_p) }"
    )
    triple, label, bad = _triple_pair(11, pre, iset, parts, post)

    def build_env(params: Params):
        r = encode_rle(params["x"])
        r.validate()
        env, heap = _layout({"pos": r.pos, "val": r.val})
        env.update(N=r.n)
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        n = rng.randint(1, cfg.max_dim)
        vals = [-2, -1, 0, 1, 2, 5]
        out = []
        while len(out) < n:
            run = min(rng.randint(1, 3), n - len(out))
            out.extend([rng.choice(vals)] * run)
        return {"x": tuple(out)}

    scenario = _mk_scenario(triple, sample, build_env, "case11")
    return CaseStudy(
        11, "sum_i x_i", "RL (x)", "int", frozenset({"FOR"}), (),
        "rle_sum", triple, scenario, label, bad,
        {"x": (5, 5, 5, 0, 0)}, derivation="case11",
    )


def _case_12() -> CaseStudy:
    pre = arrs_each(("xpos", "xval", "ypos", "yval"))
    iset = parse_index_set(
        "union({idx(1)}, {idx(2, i) | i in [0, N)}, {idx(3, i) | i in [0, N)})"
    )
    parts = {
        1: ((), _call("rle_axpy_sum(alpha, xpos, xval, beta, ypos, yval, N)")),
        2: (("i",), _call("rle_get(xpos, xval, i)")),
        3: (("i",), _call("rle_get(ypos, yval, i)")),
    }
    post = parse_assertion(
        "[ret(idx(1)) = sum(i, 0, N, alpha * ret(idx(2, i)) + beta * ret(idx(3, i)))]"
        " * each I { arr(xpos, I, xpos_p) * arr(xval, I, xval_p)"
        " * arr(ypos, I, ypos_p) * arr(yval, I, yval_p) }"
    )
    triple, label, bad = _triple_pair(12, pre, iset, parts, post)

    def build_env(params: Params):
        rx = encode_rle(params["x"])
        ry = encode_rle(params["y"])
        rx.validate()
        ry.validate()
        env, heap = _layout({
            "xpos": rx.pos, "xval": rx.val, "ypos": ry.pos, "yval": ry.val,
        })
        env.update(N=rx.n, alpha=params["alpha"], beta=params["beta"])
        return env, heap

    def sample(rng: random.Random, cfg: Config) -> Params:
        n = rng.randint(1, cfg.max_dim)
        vals = [-3, -1, 0, 2, 4]

        def rle_like() -> Tuple[int, ...]:
            out = []
            while len(out) < n:
                run = min(rng.randint(1, 3), n - len(out))
                out.extend([rng.choice(vals)] * run)
            return tuple(out)

        return {
            "x": rle_like(), "y": rle_like(),
            "alpha": rng.randint(-3, 3), "beta": rng.randint(-3, 3),
        }

    scenario = _mk_scenario(triple, sample, build_env, "case12")
    return CaseStudy(
        12, "sum_i alpha*x_i + beta*y_i", "RL (x), RL (y)", "int",
        frozenset({"WHILE"}), (),
        "rle_axpy_sum", triple, scenario, label, bad,
        {"x": (5, 5, 0), "y": (2, 7, 7), "alpha": 2, "beta": -1},
    )


for _mk in (
    _case_1, _case_2, _case_3, _case_4, _case_5, _case_6,
    _case_7, _case_8, _case_9, _case_10, _case_11, _case_12,
):
    _register(_mk())


class UnknownCase(Exception):
    pass


def get_case(cid: int) -> CaseStudy:
    try:
        return _REGISTRY[cid]
    except KeyError:
        raise UnknownCase(f"no case #{cid}") from None


def list_cases():
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]
