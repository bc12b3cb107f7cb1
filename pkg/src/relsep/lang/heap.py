"""Single-component heaps: cells plus a registry of live blocks."""
from __future__ import annotations

from typing import Dict, Iterable, Optional, Tuple

from ..values import Loc, Value


class HeapError(Exception):
    pass


class Heap:
    """A finite map from locations to values, with a block registry.

    Mutating methods are used internally by the evaluator on private
    copies; from the outside, evaluation is a pure function.
    """

    __slots__ = ("cells", "blocks")

    def __init__(self, cells: Optional[Dict[Loc, Value]] = None, blocks: Optional[Dict[int, int]] = None):
        self.cells: Dict[Loc, Value] = cells if cells is not None else {}
        self.blocks: Dict[int, int] = blocks if blocks is not None else {}

    def clone(self) -> "Heap":
        return Heap(dict(self.cells), dict(self.blocks))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Heap)
            and self.cells == other.cells
            and self.blocks == other.blocks
        )

    def __repr__(self) -> str:
        items = ", ".join(f"{loc!r}->{v!r}" for loc, v in sorted(self.cells.items()))
        return f"Heap({{{items}}}, blocks={dict(sorted(self.blocks.items()))})"

    def fresh_block(self) -> int:
        b = 0
        while b in self.blocks:
            b += 1
        return b

    def alloc_block(self, length: int, fill: Iterable[Value]) -> Loc:
        b = self.fresh_block()
        self.blocks[b] = length
        base = Loc(b, 0, length)
        for k, v in enumerate(fill):
            self.cells[Loc(b, k, length)] = v
        return base

    def free_block(self, base: Loc) -> None:
        if base.block not in self.blocks or base.off != 0:
            raise HeapError("no such block")
        n = self.blocks.pop(base.block)
        for k in range(n):
            self.cells.pop(Loc(base.block, k, n), None)

    def well_formed(self) -> bool:
        for loc in self.cells:
            n = self.blocks.get(loc.block)
            if n is None or loc.length != n or not (0 <= loc.off < n):
                return False
        for b, n in self.blocks.items():
            for k in range(n):
                if Loc(b, k, n) not in self.cells:
                    return False
        return True


def merge_heaps(a: Heap, b: Heap) -> Heap:
    """Disjoint union; blocks and cells of both must not collide."""
    if set(a.blocks) & set(b.blocks):
        raise HeapError("blocks overlap")
    cells = dict(a.cells)
    cells.update(b.cells)
    blocks = dict(a.blocks)
    blocks.update(b.blocks)
    return Heap(cells, blocks)


def heap_to_json(h: Heap):
    return {
        "cells": [
            [[loc.block, loc.off, loc.length], _val_json(v)]
            for loc, v in sorted(h.cells.items())
        ],
        "blocks": [[b, n] for b, n in sorted(h.blocks.items())],
    }


def _val_json(v: Value):
    from ..values import value_to_json

    return value_to_json(v)
