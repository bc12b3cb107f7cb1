"""Command-line front end.

Subcommands: run, check, replay, fuzz, suite, cases. Reports go to
stdout, diagnostics to stderr. Exit codes: 0 valid/checked, 1
invalid/failed, 2 inconclusive or error, 64 usage, 66 file I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from .checker import Config, HyperTriple, Scenario, check_triple
from .hyper import TaggedProduct
from .lang import EvalBudget, Fault, OutOfFuel, parse_program, run_program
from .lang.heap import Heap, heap_to_json
from .lexing import ParseError
from .reports import render
from .values import value_to_json

EXIT_VALID = 0
EXIT_INVALID = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_IO = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-dim", type=int, default=8)
    p.add_argument("--value-range", default="-5:5", help="LO:HI inclusive")
    p.add_argument("--density", default="0.3,0.5,0.7")
    p.add_argument("--fuel", type=int, default=10**7)
    p.add_argument("--format", choices=("json", "text"), default="json")


def _config_of(args) -> Config:
    lo, hi = (int(x) for x in args.value_range.split(":"))
    densities = tuple(float(x) for x in args.density.split(","))
    return Config(
        seed=args.seed,
        trials=args.trials,
        max_dim=args.max_dim,
        value_lo=lo,
        value_hi=hi,
        densities=densities,
        fuel=args.fuel,
    )


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="relsep", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a program file")
    p_run.add_argument("file")
    p_run.add_argument("--arg", action="append", default=[], metavar="k=v")
    p_run.add_argument("--fuel", type=int, default=10**7)
    p_run.add_argument("--format", choices=("json", "text"), default="json")

    p_check = sub.add_parser("check", help="check a case or a triple file")
    p_check.add_argument("target", help="case id or a triple JSON file")
    _add_config_flags(p_check)

    p_replay = sub.add_parser("replay", help="replay a derivation script")
    p_replay.add_argument("file")
    p_replay.add_argument("--format", choices=("json", "text"), default="json")
    p_replay.add_argument("--seed", type=int, default=0)

    p_fuzz = sub.add_parser("fuzz", help="fuzz one proof rule for soundness")
    p_fuzz.add_argument("--rule", required=True)
    p_fuzz.add_argument("--trials", type=int, default=500)
    p_fuzz.add_argument("--seed", type=int, default=0)
    p_fuzz.add_argument("--format", choices=("json", "text"), default="json")

    p_suite = sub.add_parser("suite", help="run the case-study suite")
    p_suite.add_argument("--only", default="", help="comma-separated case ids")
    p_suite.add_argument("--mode", choices=("semantic", "derivation", "both"), default="semantic")
    _add_config_flags(p_suite)

    p_cases = sub.add_parser("cases", help="list the case catalog")
    p_cases.add_argument("--format", choices=("json", "text"), default="json")

    return top


def _cmd_run(args) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        program = parse_program(source)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_INVALID
    env = {}
    for item in args.arg:
        if "=" not in item:
            print(f"error: bad --arg {item!r}", file=sys.stderr)
            return EXIT_USAGE
        k, v = item.split("=", 1)
        env[k] = int(v)
    started = time.monotonic()
    try:
        value, heap = run_program(program, env, Heap(), EvalBudget(args.fuel))
    except Fault as f:
        body = {"command": "run", "outcome": "fault", "fault": str(f)}
        print(render(body, {"elapsed_ms": _ms(started)}, args.format))
        return EXIT_INVALID
    except OutOfFuel:
        body = {"command": "run", "outcome": "out-of-fuel", "fuel": args.fuel}
        print(render(body, {"elapsed_ms": _ms(started)}, args.format))
        return EXIT_INCONCLUSIVE
    body = {
        "command": "run",
        "outcome": "ok",
        "value": value_to_json(value),
        "heap": heap_to_json(heap),
    }
    print(render(body, {"elapsed_ms": _ms(started)}, args.format))
    return EXIT_VALID


def _ms(started: float) -> int:
    return int((time.monotonic() - started) * 1000)


def _triple_from_file(path: str):
    """Standalone triple files: program + assertions + explicit instances."""
    from .logic_text import parse_assertion, parse_index_set
    from .lang import parse_command
    from .suite.cases import _layout, replicate

    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    program = parse_program(doc["program"]) if doc.get("program") else None
    parts = {}
    for tag, (params, text) in doc["parts"].items():
        split = tuple(p for p in params.split(",") if p)
        parts[int(tag)] = (split, parse_command(text))
    triple = HyperTriple(
        parse_assertion(doc["pre"]),
        parse_index_set(doc["indices"]),
        TaggedProduct(parts, program),
        parse_assertion(doc["post"]),
        doc.get("name", path),
    )
    instances = doc["instances"]

    def build(params):
        inst = instances[params["k"] % len(instances)]
        env, base = _layout({k: tuple(v) for k, v in inst.get("arrays", {}).items()})
        env.update(inst.get("ints", {}))
        return env, replicate(base, triple.indices.materialize(env))

    scenario = Scenario(
        build=build,
        sample=lambda rng, cfg: {"k": rng.randrange(len(instances))},
        salt=f"file:{doc.get('name', '')}",
    )
    return triple, scenario


def _cmd_check(args) -> int:
    from .suite.cases import UnknownCase, get_case

    config = _config_of(args)
    started = time.monotonic()
    if args.target.isdigit():
        try:
            case = get_case(int(args.target))
        except UnknownCase as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        triple, scenario = case.triple, case.scenario
        label = f"case {case.cid}"
    else:
        try:
            triple, scenario = _triple_from_file(args.target)
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
        label = args.target
    verdict = check_triple(triple, scenario, config.trials, config)
    body = {
        "command": "check",
        "case": label,
        "config": config.to_json(),
        "report": verdict.to_json(),
    }
    print(render(body, {"elapsed_ms": _ms(started)}, args.format))
    return verdict.exit_code


def _cmd_replay(args) -> int:
    from .kernel.replay import replay_file

    started = time.monotonic()
    try:
        outcome = replay_file(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    body = {"command": "replay", "file": args.file, "report": outcome.to_json()}
    print(render(body, {"elapsed_ms": _ms(started)}, args.format))
    print(outcome.summary(), file=sys.stderr)
    return outcome.exit_code


def _cmd_fuzz(args) -> int:
    from .kernel.fuzz import fuzz_rule

    started = time.monotonic()
    try:
        report = fuzz_rule(args.rule, args.trials, args.seed)
    except KeyError:
        print(f"error: unknown rule {args.rule!r}", file=sys.stderr)
        return EXIT_USAGE
    body = {"command": "fuzz", "config": {"rule": args.rule, "trials": args.trials, "seed": args.seed},
            "report": report.to_json()}
    print(render(body, {"elapsed_ms": _ms(started)}, args.format))
    return EXIT_VALID if report.violations == 0 else EXIT_INVALID


def _cmd_suite(args) -> int:
    from .suite.runner import run_suite

    config = _config_of(args)
    only = tuple(int(x) for x in args.only.split(",") if x) or None
    started = time.monotonic()
    outcome = run_suite(config, only=only, mode=args.mode)
    print(render(outcome.body, {"elapsed_ms": _ms(started), "per_case_ms": outcome.timings}, args.format))
    print(outcome.markdown, file=sys.stderr)
    return outcome.exit_code


def _cmd_cases(args) -> int:
    from .suite.cases import list_cases

    rows = [c.table_row() for c in list_cases()]
    print(render({"command": "cases", "cases": rows}, {}, args.format))
    return EXIT_VALID


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    handlers = {
        "run": _cmd_run,
        "check": _cmd_check,
        "replay": _cmd_replay,
        "fuzz": _cmd_fuzz,
        "suite": _cmd_suite,
        "cases": _cmd_cases,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
