"""Parametrised single-component specifications for the access functions.

Each lemma is a hyper-triple over one env-bound component index `iota`;
its stored derivation replays at whatever environment a composition site
supplies. Postconditions pin the result with closed terms over the array
payloads (find-based decompression), so canonical matching at call sites
is exact once the environment is concrete.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

from ..checker import HyperTriple
from ..formats import access_program
from ..hyper import SetExplicit, SingleProduct
from ..lang import parse_command
from ..logic_text import parse_assertion
from ..values import Index, Loc


@dataclass
class Lemma:
    name: str
    triple: HyperTriple
    canonical_env: Callable[[], Dict[str, object]]


_REGISTRY: Dict[str, Lemma] = {}


def _register(name: str, cmd_text: str, pre_text: str, post_text: str, canonical) -> None:
    triple = HyperTriple(
        parse_assertion(pre_text),
        SetExplicit(("iota",)),
        SingleProduct(parse_command(cmd_text), access_program()),
        parse_assertion(post_text),
        f"lemma:{name}",
    )
    _REGISTRY[name] = Lemma(name, triple, canonical)


def get_lemma(name: str) -> Lemma:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"no lemma named {name}") from None


def list_lemmas():
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def _arrays_env(**payloads) -> Dict[str, object]:
    """Cells live at block ids in name order, mirroring the suite layout."""
    env: Dict[str, object] = {}
    for b, name in enumerate(sorted(payloads)):
        data = tuple(payloads[name])
        env[name] = Loc(b, 0, len(data))
        env[name + "_p"] = data
    return env


# find over a slice, as an absolute position (or -1)
IR = (
    "ite(find(slice({s}, {lo}, {hi}), {x}, {hi} - {lo}) = -1, -1,"
    " {lo} + find(slice({s}, {lo}, {hi}), {x}, {hi} - {lo}))"
)


def _ir(s: str, lo: str, hi: str, x: str) -> str:
    return IR.format(s=s, lo=lo, hi=hi, x=x)


def _svr(ind: str, val: str, lo: str, hi: str, q: str) -> str:
    found = _ir(ind, lo, hi, q)
    return f"ite({found} = -1, 0, at({val}, {found}))"


_register(
    "index_range",
    "index_range(a, lo, hi, x)",
    "arr(a, iota, a_p)",
    f"[ret(iota) = {_ir('a_p', 'lo', 'hi', 'x')}] * arr(a, iota, a_p)",
    lambda: {**_arrays_env(a=(4, 7, 9)), "lo": 0, "hi": 3, "x": 7, "iota": Index(2, (1,))},
)

_register(
    "index",
    "index(a, x)",
    "arr(a, iota, a_p)",
    f"[ret(iota) = {_ir('a_p', '0', 'len(a_p)', 'x')}] * arr(a, iota, a_p)",
    lambda: {**_arrays_env(a=(4, 7, 9)), "x": 9, "iota": Index(2, (0,))},
)

_register(
    "sv_get_range",
    "sv_get_range(x_ind, x_val, lo, hi, q)",
    "arr(x_ind, iota, x_ind_p) * arr(x_val, iota, x_val_p)",
    f"[ret(iota) = {_svr('x_ind_p', 'x_val_p', 'lo', 'hi', 'q')}]"
    " * arr(x_ind, iota, x_ind_p) * arr(x_val, iota, x_val_p)",
    lambda: {
        **_arrays_env(x_ind=(1, 3), x_val=(10, 20)),
        "lo": 0, "hi": 2, "q": 3, "iota": Index(2, (3,)),
    },
)

_register(
    "sv_get",
    "sv_get(x_ind, x_val, q)",
    "arr(x_ind, iota, x_ind_p) * arr(x_val, iota, x_val_p)",
    f"[ret(iota) = {_svr('x_ind_p', 'x_val_p', '0', 'len(x_ind_p)', 'q')}]"
    " * arr(x_ind, iota, x_ind_p) * arr(x_val, iota, x_val_p)",
    lambda: {
        **_arrays_env(x_ind=(1, 3), x_val=(10, 20)),
        "q": 2, "iota": Index(3, (2,)),
    },
)

_register(
    "csr_get",
    "csr_get(m_ptr, m_ind, m_val, qi, qj)",
    "arr(m_ptr, iota, m_ptr_p) * arr(m_ind, iota, m_ind_p) * arr(m_val, iota, m_val_p)",
    f"[ret(iota) = {_svr('m_ind_p', 'm_val_p', 'at(m_ptr_p, qi)', 'at(m_ptr_p, qi + 1)', 'qj')}]"
    " * arr(m_ptr, iota, m_ptr_p) * arr(m_ind, iota, m_ind_p) * arr(m_val, iota, m_val_p)",
    lambda: {
        **_arrays_env(m_ptr=(0, 2, 2, 3), m_ind=(0, 2, 1), m_val=(1, 3, 4)),
        "qi": 0, "qj": 2, "iota": Index(2, (0, 2)),
    },
)

_UCSR_ROW = _ir("m_idx_p", "0", "len(m_idx_p)", "qi")
_register(
    "ucsr_get",
    "ucsr_get(m_idx, m_ptr, m_ind, m_val, qi, qj)",
    "arr(m_idx, iota, m_idx_p) * arr(m_ptr, iota, m_ptr_p)"
    " * arr(m_ind, iota, m_ind_p) * arr(m_val, iota, m_val_p)",
    f"[ret(iota) = ite({_UCSR_ROW} = -1, 0,"
    f" {_svr('m_ind_p', 'm_val_p', f'at(m_ptr_p, {_UCSR_ROW})', f'at(m_ptr_p, {_UCSR_ROW} + 1)', 'qj')})]"
    " * arr(m_idx, iota, m_idx_p) * arr(m_ptr, iota, m_ptr_p)"
    " * arr(m_ind, iota, m_ind_p) * arr(m_val, iota, m_val_p)",
    lambda: {
        **_arrays_env(m_idx=(2, 0), m_ptr=(0, 1, 3), m_ind=(1, 0, 2), m_val=(4, 1, 3)),
        "qi": 0, "qj": 2, "iota": Index(2, (0, 2)),
    },
)

_register(
    "coo_get",
    "coo_get(row, col, val, qi, qj)",
    "arr(row, iota, row_p) * arr(col, iota, col_p) * arr(val, iota, val_p)",
    "[ret(iota) = sum(t, 0, len(val_p),"
    " ite(at(row_p, t) = qi && at(col_p, t) = qj, at(val_p, t), 0))]"
    " * arr(row, iota, row_p) * arr(col, iota, col_p) * arr(val, iota, val_p)",
    lambda: {
        **_arrays_env(row=(0, 2, 0), col=(0, 1, 2), val=(1, 4, 3)),
        "qi": 0, "qj": 2, "iota": Index(2, (0, 2)),
    },
)

_register(
    "rle_get",
    "rle_get(pos, val, q)",
    "arr(pos, iota, pos_p) * arr(val, iota, val_p)",
    "[ret(iota) = sum(t, 0, len(val_p),"
    " ite(at(pos_p, t) <= q && q < at(pos_p, t + 1), at(val_p, t), 0))]"
    " * arr(pos, iota, pos_p) * arr(val, iota, val_p)",
    lambda: {
        **_arrays_env(pos=(0, 3, 5), val=(5, 0)),
        "q": 1, "iota": Index(2, (1,)),
    },
)
