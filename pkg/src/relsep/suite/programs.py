"""Case-study kernels in the object language.

Kernels over compressed rows take explicit [lo, hi) slice bounds so the
composite matrix kernels can reuse them directly against the flat row
layout (one m_ptr boundary array, one flat payload pair).
"""
from __future__ import annotations

from typing import Dict, Tuple

from ..formats import ACCESS_SRC
from ..lang import ast, parse_program

SV_SUM = """
def sv_sum(x_ind, x_val, lo, hi) {
  let s := alloc(0) in
  let _ := for k in range(lo, hi) {
    s := !s + x_val[k]
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

SV_DOT_DENSE = """
def sv_dot_dense(x_ind, x_val, y, lo, hi) {
  let s := alloc(0) in
  let _ := for k in range(lo, hi) {
    s := !s + x_val[k] * y[x_ind[k]]
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

SPVSPV = """
def spvspv(y_ind, y_val, ylo, yhi, x_ind, x_val) {
  let s := alloc(0) in
  let iY := alloc(0) in
  let iX := alloc(0) in
  let nx := length(x_ind) in
  let _ := while ((!iY < yhi - ylo) && (!iX < nx)) {
    if (y_ind[ylo + !iY] = x_ind[!iX]) {
      s := !s + y_val[ylo + !iY] * x_val[!iX] ;
      iY := !iY + 1 ;
      iX := !iX + 1
    } else {
      if (y_ind[ylo + !iY] < x_ind[!iX]) { iY := !iY + 1 } else { iX := !iX + 1 }
    }
  } in
  let out := !s in
  free(s) ; free(iY) ; free(iX) ;
  return out
}
"""

COO_SUM = """
def coo_sum(row, col, val) {
  let s := alloc(0) in
  let nnz := length(val) in
  let _ := for k in range(0, nnz) {
    s := !s + val[k]
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

CSR_SUM = """
def csr_sum(m_ptr, m_ind, m_val, M) {
  let s := alloc(0) in
  let _ := for i in range(0, M) {
    let lo := m_ptr[i] in
    let hi := m_ptr[i + 1] in
    s := !s + sv_sum(m_ind, m_val, lo, hi)
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

CSR_MATVEC_DENSE = """
def csr_matvec_d(m_ptr, m_ind, m_val, y, M) {
  let ans := malloc(M) in
  let _ := for i in range(0, M) {
    let lo := m_ptr[i] in
    let hi := m_ptr[i + 1] in
    ans[i] := sv_dot_dense(m_ind, m_val, y, lo, hi)
  } in
  return ans
}
"""

CSR_MATVEC_SV = """
def csr_matvec_sv(m_ptr, m_ind, m_val, x_ind, x_val, M) {
  let ans := malloc(M) in
  let _ := for i in range(0, M) {
    let lo := m_ptr[i] in
    let hi := m_ptr[i + 1] in
    ans[i] := spvspv(m_ind, m_val, lo, hi, x_ind, x_val)
  } in
  return ans
}
"""

UCSR_SUM = """
def ucsr_sum(m_idx, m_ptr, m_ind, m_val) {
  let s := alloc(0) in
  let nr := length(m_idx) in
  let _ := for k in range(0, nr) {
    let lo := m_ptr[k] in
    let hi := m_ptr[k + 1] in
    s := !s + sv_sum(m_ind, m_val, lo, hi)
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

UCSR_MATVEC_DENSE = """
def ucsr_matvec_d(m_idx, m_ptr, m_ind, m_val, y, M) {
  let ans := malloc(M) in
  let nr := length(m_idx) in
  let _ := for k in range(0, nr) {
    let lo := m_ptr[k] in
    let hi := m_ptr[k + 1] in
    ans[m_idx[k]] := sv_dot_dense(m_ind, m_val, y, lo, hi)
  } in
  return ans
}
"""

SPMSPV = """
def spmspv(m_idx, m_ptr, m_ind, m_val, x_ind, x_val, M) {
  let ans := malloc(M) in
  let nr := length(m_idx) in
  let _ := for k in range(0, nr) {
    let lo := m_ptr[k] in
    let hi := m_ptr[k + 1] in
    ans[m_idx[k]] := spvspv(m_ind, m_val, lo, hi, x_ind, x_val)
  } in
  return ans
}
"""

RLE_SUM = """
def rle_sum(pos, val) {
  let s := alloc(0) in
  let runs := length(val) in
  let _ := for k in range(0, runs) {
    s := !s + val[k] * (pos[k + 1] - pos[k])
  } in
  let out := !s in
  free(s) ;
  return out
}
"""

RLE_AXPY_SUM = """
def rle_axpy_sum(alpha, xpos, xval, beta, ypos, yval, N) {
  let s := alloc(0) in
  let ix := alloc(0) in
  let iy := alloc(0) in
  let cur := alloc(0) in
  let _ := while (!cur < N) {
    let nx := xpos[!ix + 1] in
    let ny := ypos[!iy + 1] in
    let nxt := if (nx < ny) { return nx } else { return ny } in
    s := !s + (alpha * xval[!ix] + beta * yval[!iy]) * (nxt - !cur) ;
    if (nx = nxt) { ix := !ix + 1 } else { 0 } ;
    if (ny = nxt) { iy := !iy + 1 } else { 0 } ;
    cur := nxt
  } in
  let out := !s in
  free(s) ; free(ix) ; free(iy) ; free(cur) ;
  return out
}
"""

KERNELS: Dict[int, Tuple[str, str]] = {
    1: ("sv_sum", SV_SUM),
    2: ("sv_dot_dense", SV_DOT_DENSE),
    3: ("spvspv", SPVSPV),
    4: ("coo_sum", COO_SUM),
    5: ("csr_sum", CSR_SUM + SV_SUM),
    6: ("csr_matvec_d", CSR_MATVEC_DENSE + SV_DOT_DENSE),
    7: ("csr_matvec_sv", CSR_MATVEC_SV + SPVSPV),
    8: ("ucsr_sum", UCSR_SUM + SV_SUM),
    9: ("ucsr_matvec_d", UCSR_MATVEC_DENSE + SV_DOT_DENSE),
    10: ("spmspv", SPMSPV + SPVSPV),
    11: ("rle_sum", RLE_SUM),
    12: ("rle_axpy_sum", RLE_AXPY_SUM),
}

# Seeded kernel bugs for negative testing: (label, original, replacement).
MUTATIONS: Dict[int, Tuple[str, str, str]] = {
    1: ("dropped-accumulation", "s := !s + x_val[k]", "s := !s"),
    2: ("off-by-one-bound", "for k in range(lo, hi) {\n    s := !s + x_val[k] * y[x_ind[k]]",
        "for k in range(lo, hi - 1) {\n    s := !s + x_val[k] * y[x_ind[k]]"),
    3: ("wrong-branch",
        "if (y_ind[ylo + !iY] = x_ind[!iX]) {\n      s := !s + y_val[ylo + !iY] * x_val[!iX] ;\n      iY := !iY + 1 ;\n      iX := !iX + 1\n    } else {\n      if (y_ind[ylo + !iY] < x_ind[!iX]) { iY := !iY + 1 } else { iX := !iX + 1 }\n    }",
        "if (y_ind[ylo + !iY] = x_ind[!iX]) {\n      if (y_ind[ylo + !iY] < x_ind[!iX]) { iY := !iY + 1 } else { iX := !iX + 1 }\n    } else {\n      s := !s + y_val[ylo + !iY] * x_val[!iX] ;\n      iY := !iY + 1 ;\n      iX := !iX + 1\n    }"),
    4: ("off-by-one-bound", "for k in range(0, nnz)", "for k in range(0, nnz - 1)"),
    5: ("empty-row-slices", "let hi := m_ptr[i + 1] in", "let hi := m_ptr[i] in"),
    6: ("dropped-multiplier", "s := !s + x_val[k] * y[x_ind[k]]", "s := !s + x_val[k]"),
    7: ("sign-flip", "s := !s + y_val[ylo + !iY] * x_val[!iX]",
        "s := !s - y_val[ylo + !iY] * x_val[!iX]"),
    8: ("off-by-one-bound", "for k in range(0, nr)", "for k in range(1, nr)"),
    9: ("wrong-target-row", "ans[m_idx[k]] := sv_dot_dense", "ans[k] := sv_dot_dense"),
    10: ("wrong-target-row", "ans[m_idx[k]] := spvspv", "ans[k] := spvspv"),
    11: ("dropped-run-width", "s := !s + val[k] * (pos[k + 1] - pos[k])", "s := !s + val[k]"),
    12: ("dropped-beta-side", "s := !s + (alpha * xval[!ix] + beta * yval[!iy]) * (nxt - !cur)",
         "s := !s + (alpha * xval[!ix]) * (nxt - !cur)"),
}


def case_program(cid: int) -> ast.Program:
    name, src = KERNELS[cid]
    return parse_program(src + ACCESS_SRC)


def mutated_program(cid: int) -> Tuple[str, ast.Program]:
    name, src = KERNELS[cid]
    label, old, new = MUTATIONS[cid]
    if src.count(old) != 1:
        raise ValueError(f"mutation anchor for case {cid} matches {src.count(old)} times")
    return label, parse_program(src.replace(old, new) + ACCESS_SRC)
