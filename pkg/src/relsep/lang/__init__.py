from . import ast
from .eval import (
    DEFAULT_FUEL,
    DOUBLE_FREE,
    OUT_OF_BOUNDS,
    TYPE_ERROR,
    UNALLOCATED_READ,
    EvalBudget,
    Fault,
    OutOfFuel,
    UnboundVariable,
    eval_cmd,
    eval_expr,
    run_program,
)
from .heap import Heap, HeapError, heap_to_json, merge_heaps
from .parser import parse_command, parse_program

__all__ = [
    "ast",
    "DEFAULT_FUEL",
    "DOUBLE_FREE",
    "OUT_OF_BOUNDS",
    "TYPE_ERROR",
    "UNALLOCATED_READ",
    "EvalBudget",
    "Fault",
    "OutOfFuel",
    "UnboundVariable",
    "eval_cmd",
    "eval_expr",
    "run_program",
    "Heap",
    "HeapError",
    "heap_to_json",
    "merge_heaps",
    "parse_command",
    "parse_program",
]
