"""Report assembly: deterministic JSON bodies, timings kept out of them.

stdout carries one JSON object {"body": ..., "timing": ...}; identical
(argv, seed) must give byte-identical "body" values, so elapsed times and
anything else wall-clock-dependent live under "timing" only.
"""
from __future__ import annotations

import json
from typing import Optional

SCHEMA_VERSION = 1


def render(body: dict, timing: Optional[dict] = None, fmt: str = "json") -> str:
    if fmt == "text":
        return _render_text(body)
    doc = {"schema": SCHEMA_VERSION, "body": body, "timing": timing or {}}
    return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1)


def body_bytes(body: dict) -> bytes:
    """The canonical bytes the determinism guarantee covers."""
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


def _render_text(body: dict, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k in sorted(body):
        v = body[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_render_text(v, indent + 1))
        elif isinstance(v, list):
            lines.append(f"{pad}{k}: {json.dumps(v)}")
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)
