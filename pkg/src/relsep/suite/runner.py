"""Suite-level execution: per-case verdicts plus a Markdown summary."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..checker import Config, check_triple
from .cases import CaseStudy, list_cases


@dataclass
class SuiteOutcome:
    body: dict
    timings: Dict[str, int]
    markdown: str
    exit_code: int


def run_case(case: CaseStudy, config: Config, mode: str = "semantic") -> Tuple[dict, int]:
    """One case in semantic, derivation, or both modes."""
    report: dict = {"case": case.cid, "kernel": case.kernel_name, "mode": mode}
    code = 0
    if mode in ("semantic", "both"):
        verdict = check_triple(case.triple, case.scenario, config.trials, config)
        report["semantic"] = verdict.to_json()
        code = max(code, verdict.exit_code)
    if mode in ("derivation", "both"):
        if not case.derivation:
            report["derivation"] = {"status": "missing", "detail": "no derivation script for this case"}
            code = max(code, 2)
        else:
            from ..kernel.replay import replay_case

            outcome = replay_case(case, config)
            report["derivation"] = outcome.to_json()
            code = max(code, outcome.exit_code)
    return report, code


def run_suite(config: Config, only: Optional[Tuple[int, ...]] = None, mode: str = "semantic") -> SuiteOutcome:
    cases = [c for c in list_cases() if only is None or c.cid in only]
    reports: List[dict] = []
    timings: Dict[str, int] = {}
    code = 0
    for case in cases:
        started = time.monotonic()
        report, case_code = run_case(case, config, mode)
        timings[str(case.cid)] = int((time.monotonic() - started) * 1000)
        reports.append(report)
        code = max(code, case_code)
    body = {
        "command": "suite",
        "mode": mode,
        "config": config.to_json(),
        "cases": reports,
    }
    return SuiteOutcome(body, timings, _markdown(cases, reports, timings), code)


def _markdown(cases: List[CaseStudy], reports: List[dict], timings: Dict[str, int]) -> str:
    header = (
        "| # | Operation | Formats | Returns | Rules | Uses | Verdict | Trials | ms |\n"
        "|---|-----------|---------|---------|-------|------|---------|--------|----|"
    )
    lines = [header]
    for case, rep in zip(cases, reports):
        sem = rep.get("semantic", {})
        der = rep.get("derivation", {})
        verdict = sem.get("verdict", "")
        if der:
            verdict = (verdict + "+" if verdict else "") + der.get("status", "")
        lines.append(
            f"| {case.cid} | {case.title} | {case.formats} | {case.returns} "
            f"| {','.join(sorted(case.ticks))} | {','.join(str(u) for u in case.uses) or '-'} "
            f"| {verdict} | {sem.get('trials', '-')} | {timings.get(str(case.cid), '-')} |"
        )
    return "\n".join(lines)
