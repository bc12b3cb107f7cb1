"""Sparse/compressed tensor formats and their dense oracles.

Each format ships an encoder (seed-controlled where the format leaves
order unspecified), a decoder, an invariant validator, and an access
function written in the object language. The dense helpers below are the
single source of truth for every kernel check.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .lang import ast, parse_program
from .lang.heap import Heap
from .values import Loc


class FormatError(Exception):
    pass


class DimensionMismatch(Exception):
    pass


Dense = Tuple[int, ...]
DenseMatrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class SparseVector:
    x_ind: Tuple[int, ...]
    x_val: Tuple[int, ...]
    n: int

    def validate(self) -> None:
        if len(self.x_ind) != len(self.x_val):
            raise FormatError("index/value length mismatch")
        for k, i in enumerate(self.x_ind):
            if not (0 <= i < self.n):
                raise FormatError(f"position {i} out of range")
            if k and self.x_ind[k - 1] >= i:
                raise FormatError("positions must be strictly increasing")
        if any(v == 0 for v in self.x_val):
            raise FormatError("explicit zeros are not allowed")

    def decode(self) -> Dense:
        out = [0] * self.n
        for i, v in zip(self.x_ind, self.x_val):
            out[i] = v
        return tuple(out)


@dataclass(frozen=True)
class CsrMatrix:
    m_ptr: Tuple[int, ...]
    m_ind: Tuple[int, ...]
    m_val: Tuple[int, ...]
    m: int
    n: int

    def validate(self) -> None:
        if len(self.m_ptr) != self.m + 1 or self.m_ptr[0] != 0:
            raise FormatError("bad row boundaries")
        if self.m_ptr[-1] != len(self.m_ind) or len(self.m_ind) != len(self.m_val):
            raise FormatError("payload length mismatch")
        for r in range(self.m):
            lo, hi = self.m_ptr[r], self.m_ptr[r + 1]
            if lo > hi:
                raise FormatError("row boundaries must be nondecreasing")
            SparseVector(self.m_ind[lo:hi], self.m_val[lo:hi], self.n).validate()

    def decode(self) -> DenseMatrix:
        rows = []
        for r in range(self.m):
            lo, hi = self.m_ptr[r], self.m_ptr[r + 1]
            rows.append(SparseVector(self.m_ind[lo:hi], self.m_val[lo:hi], self.n).decode())
        return tuple(rows)


@dataclass(frozen=True)
class UcsrMatrix:
    m_idx: Tuple[int, ...]
    m_ptr: Tuple[int, ...]
    m_ind: Tuple[int, ...]
    m_val: Tuple[int, ...]
    m: int
    n: int

    def validate(self) -> None:
        if len(set(self.m_idx)) != len(self.m_idx):
            raise FormatError("duplicate row positions")
        if any(not (0 <= i < self.m) for i in self.m_idx):
            raise FormatError("row position out of range")
        if len(self.m_ptr) != len(self.m_idx) + 1 or (self.m_ptr and self.m_ptr[0] != 0):
            raise FormatError("bad row boundaries")
        if not self.m_ptr:
            raise FormatError("m_ptr must hold at least the initial boundary")
        if self.m_ptr[-1] != len(self.m_ind) or len(self.m_ind) != len(self.m_val):
            raise FormatError("payload length mismatch")
        for k in range(len(self.m_idx)):
            lo, hi = self.m_ptr[k], self.m_ptr[k + 1]
            if lo > hi or hi - lo == 0:
                raise FormatError("stored rows must be nonempty")
            SparseVector(self.m_ind[lo:hi], self.m_val[lo:hi], self.n).validate()

    def decode(self) -> DenseMatrix:
        rows = [[0] * self.n for _ in range(self.m)]
        for k, r in enumerate(self.m_idx):
            lo, hi = self.m_ptr[k], self.m_ptr[k + 1]
            dense = SparseVector(self.m_ind[lo:hi], self.m_val[lo:hi], self.n).decode()
            rows[r] = list(dense)
        return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class CooMatrix:
    row: Tuple[int, ...]
    col: Tuple[int, ...]
    val: Tuple[int, ...]
    m: int
    n: int

    def validate(self) -> None:
        if not (len(self.row) == len(self.col) == len(self.val)):
            raise FormatError("payload length mismatch")
        pairs = list(zip(self.row, self.col))
        if len(set(pairs)) != len(pairs):
            raise FormatError("duplicate coordinates")
        for i, j, v in zip(self.row, self.col, self.val):
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise FormatError("coordinate out of range")
            if v == 0:
                raise FormatError("explicit zeros are not allowed")

    def decode(self) -> DenseMatrix:
        rows = [[0] * self.n for _ in range(self.m)]
        for i, j, v in zip(self.row, self.col, self.val):
            rows[i][j] = v
        return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class RleVector:
    pos: Tuple[int, ...]
    val: Tuple[int, ...]
    n: int

    def validate(self) -> None:
        if len(self.pos) != len(self.val) + 1:
            raise FormatError("boundary/value length mismatch")
        if self.pos[0] != 0 or self.pos[-1] != self.n:
            raise FormatError("boundaries must span [0, n]")
        for k in range(len(self.val)):
            if self.pos[k] >= self.pos[k + 1]:
                raise FormatError("run boundaries must be strictly increasing")
            if k and self.val[k - 1] == self.val[k]:
                raise FormatError("adjacent runs must differ (canonical form)")

    def decode(self) -> Dense:
        out: List[int] = []
        for k, v in enumerate(self.val):
            out.extend([v] * (self.pos[k + 1] - self.pos[k]))
        return tuple(out)


def encode_sv(dense: Sequence[int]) -> SparseVector:
    ind = tuple(i for i, v in enumerate(dense) if v != 0)
    val = tuple(dense[i] for i in ind)
    return SparseVector(ind, val, len(dense))


def encode_csr(dense: Sequence[Sequence[int]]) -> CsrMatrix:
    m = len(dense)
    n = len(dense[0]) if m else 0
    ptr = [0]
    ind: List[int] = []
    val: List[int] = []
    for row in dense:
        if len(row) != n:
            raise DimensionMismatch("ragged matrix")
        sv = encode_sv(row)
        ind.extend(sv.x_ind)
        val.extend(sv.x_val)
        ptr.append(len(ind))
    return CsrMatrix(tuple(ptr), tuple(ind), tuple(val), m, n)


def encode_ucsr(dense: Sequence[Sequence[int]], seed: int = 0) -> UcsrMatrix:
    """The row order is a seed-controlled permutation: the format is unordered."""
    m = len(dense)
    n = len(dense[0]) if m else 0
    nonempty = [i for i, row in enumerate(dense) if any(v != 0 for v in row)]
    rng = random.Random(f"ucsr:{seed}")
    rng.shuffle(nonempty)
    ptr = [0]
    ind: List[int] = []
    val: List[int] = []
    for i in nonempty:
        sv = encode_sv(dense[i])
        ind.extend(sv.x_ind)
        val.extend(sv.x_val)
        ptr.append(len(ind))
    return UcsrMatrix(tuple(nonempty), tuple(ptr), tuple(ind), tuple(val), m, n)


def encode_coo(dense: Sequence[Sequence[int]], seed: int = 0) -> CooMatrix:
    m = len(dense)
    n = len(dense[0]) if m else 0
    entries = [
        (i, j, dense[i][j]) for i in range(m) for j in range(n) if dense[i][j] != 0
    ]
    rng = random.Random(f"coo:{seed}")
    rng.shuffle(entries)
    row = tuple(e[0] for e in entries)
    col = tuple(e[1] for e in entries)
    val = tuple(e[2] for e in entries)
    return CooMatrix(row, col, val, m, n)


def encode_rle(dense: Sequence[int]) -> RleVector:
    ends = [0]
    out_val: List[int] = []
    for v in dense:
        if out_val and out_val[-1] == v:
            ends[-1] += 1
        else:
            out_val.append(v)
            ends.append(ends[-1] + 1)
    return RleVector(tuple(ends), tuple(out_val), len(dense))


# --- access functions, written in the object language ---

ACCESS_SRC = """
def index_range(arr, lo, hi, x) {
  let r := alloc(-1) in
  let _ := for k in range(lo, hi) {
    if (arr[k] = x) { r := k } else { 0 }
  } in
  let out := !r in
  free(r) ;
  return out
}

def index(arr, x) {
  let n := length(arr) in
  return index_range(arr, 0, n, x)
}

def sv_get_range(x_ind, x_val, lo, hi, i) {
  let ind := index_range(x_ind, lo, hi, i) in
  if (ind = -1) { return 0 } else { return x_val[ind] }
}

def sv_get(x_ind, x_val, i) {
  let n := length(x_ind) in
  return sv_get_range(x_ind, x_val, 0, n, i)
}

def ucsr_get(m_idx, m_ptr, m_ind, m_val, i, j) {
  let r := index(m_idx, i) in
  if (r = -1) { return 0 } else {
    let lo := m_ptr[r] in
    let hi := m_ptr[r + 1] in
    return sv_get_range(m_ind, m_val, lo, hi, j)
  }
}

def csr_get(m_ptr, m_ind, m_val, i, j) {
  let lo := m_ptr[i] in
  let hi := m_ptr[i + 1] in
  return sv_get_range(m_ind, m_val, lo, hi, j)
}

def coo_get(row, col, val, i, j) {
  let nnz := length(val) in
  let r := alloc(0) in
  let _ := for k in range(0, nnz) {
    if (row[k] = i && col[k] = j) { r := !r + val[k] } else { 0 }
  } in
  let out := !r in
  free(r) ;
  return out
}

def rle_get(pos, val, i) {
  let runs := length(val) in
  let r := alloc(0) in
  let _ := for k in range(0, runs) {
    if (pos[k] <= i && i < pos[k + 1]) { r := val[k] } else { 0 }
  } in
  let out := !r in
  free(r) ;
  return out
}
"""

_ACCESS_PROGRAM = None


def access_program() -> ast.Program:
    """All access-function definitions, parsed once."""
    global _ACCESS_PROGRAM
    if _ACCESS_PROGRAM is None:
        _ACCESS_PROGRAM = parse_program(ACCESS_SRC)
    return _ACCESS_PROGRAM


ACCESS_ENTRY = {
    "sv": "sv_get",
    "csr": "csr_get",
    "ucsr": "ucsr_get",
    "coo": "coo_get",
    "rle": "rle_get",
}


# --- dense oracles: direct loops over dense data ---


def dense_sum(x: Sequence[int]) -> int:
    total = 0
    for v in x:
        total += v
    return total


def dense_sum2(a: Sequence[Sequence[int]]) -> int:
    total = 0
    for row in a:
        for v in row:
            total += v
    return total


def dense_dot(x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise DimensionMismatch(f"dot: {len(x)} vs {len(y)}")
    total = 0
    for a, b in zip(x, y):
        total += a * b
    return total


def dense_matvec(a: Sequence[Sequence[int]], x: Sequence[int]) -> Dense:
    out = []
    for row in a:
        if len(row) != len(x):
            raise DimensionMismatch(f"matvec: {len(row)} vs {len(x)}")
        out.append(dense_dot(row, x))
    return tuple(out)


def dense_axpy_sum(alpha: int, x: Sequence[int], beta: int, y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise DimensionMismatch(f"axpy: {len(x)} vs {len(y)}")
    total = 0
    for a, b in zip(x, y):
        total += alpha * a + beta * b
    return total


# --- heap layout ---


def layout_arrays(payloads: Dict[str, Sequence[int]]) -> Tuple[Dict[str, Loc], Heap]:
    """Allocate one block per named array, in name order, on a fresh heap."""
    heap = Heap()
    locs: Dict[str, Loc] = {}
    for name in sorted(payloads):
        data = list(payloads[name])
        locs[name] = heap.alloc_block(len(data), data)
    return locs, heap


# --- JSON fixtures ---


def to_fixture(fmt: str, inst) -> dict:
    if fmt == "sv":
        return {"format": "sv", "dims": [inst.n], "payload": {"x_ind": list(inst.x_ind), "x_val": list(inst.x_val)}}
    if fmt == "csr":
        return {"format": "csr", "dims": [inst.m, inst.n],
                "payload": {"m_ptr": list(inst.m_ptr), "m_ind": list(inst.m_ind), "m_val": list(inst.m_val)}}
    if fmt == "ucsr":
        return {"format": "ucsr", "dims": [inst.m, inst.n],
                "payload": {"m_idx": list(inst.m_idx), "m_ptr": list(inst.m_ptr),
                            "m_ind": list(inst.m_ind), "m_val": list(inst.m_val)}}
    if fmt == "coo":
        return {"format": "coo", "dims": [inst.m, inst.n],
                "payload": {"row": list(inst.row), "col": list(inst.col), "val": list(inst.val)}}
    if fmt == "rle":
        return {"format": "rle", "dims": [inst.n], "payload": {"pos": list(inst.pos), "val": list(inst.val)}}
    raise FormatError(f"unknown format {fmt}")


def from_fixture(doc: dict):
    fmt = doc["format"]
    p = doc["payload"]
    dims = doc["dims"]
    if fmt == "sv":
        return SparseVector(tuple(p["x_ind"]), tuple(p["x_val"]), dims[0])
    if fmt == "csr":
        return CsrMatrix(tuple(p["m_ptr"]), tuple(p["m_ind"]), tuple(p["m_val"]), dims[0], dims[1])
    if fmt == "ucsr":
        return UcsrMatrix(tuple(p["m_idx"]), tuple(p["m_ptr"]), tuple(p["m_ind"]), tuple(p["m_val"]), dims[0], dims[1])
    if fmt == "coo":
        return CooMatrix(tuple(p["row"]), tuple(p["col"]), tuple(p["val"]), dims[0], dims[1])
    if fmt == "rle":
        return RleVector(tuple(p["pos"]), tuple(p["val"]), dims[0])
    raise FormatError(f"unknown format {fmt}")


def encode(fmt: str, dense, seed: int = 0):
    if fmt == "sv":
        return encode_sv(dense)
    if fmt == "csr":
        return encode_csr(dense)
    if fmt == "ucsr":
        return encode_ucsr(dense, seed)
    if fmt == "coo":
        return encode_coo(dense, seed)
    if fmt == "rle":
        return encode_rle(dense)
    raise FormatError(f"unknown format {fmt}")
