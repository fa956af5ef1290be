"""``fastalg`` command line.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid proof
script, 4 step ceiling exceeded, 5 Levin search exhausted, 6 time bound
violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .asm import assemble, disassemble
from .complexity import doubling_budgets, k2_trajectory
from .errors import (
    AssemblyError,
    BoundViolated,
    CeilingExceeded,
    DecodeError,
    ScenarioError,
    ScriptInvalid,
    SearchExhausted,
)
from .levin import InversionProblem, search_phases, simple_search
from .mpstar import Shares, run_mpstar, verify_theorem1_bound, write_trace
from .scenario import load_scenario
from .vm import decode_program

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCRIPT = 3
EXIT_CEILING = 4
EXIT_EXHAUSTED = 5
EXIT_BOUND = 6

TRACE_DIR_ENV = "FASTALG_TRACE_DIR"


def _scenario_arg(p):
    p.add_argument("scenario_pos", nargs="?", metavar="SCENARIO")
    p.add_argument("--scenario", help="scenario YAML file")


def _shares(text):
    try:
        return Shares.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastalg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its trace")
    _scenario_arg(run)
    run.add_argument("--trace", help="trace output path (default: $%s or the current directory)" % TRACE_DIR_ENV)
    run.add_argument("--no-trace", action="store_true", help="do not write a trace file")
    run.add_argument("--format", choices=("csv", "ndjson"), default="csv")
    run.add_argument("--shares", type=_shares, help="A,B,C percentages (default 10,10,80)")
    run.add_argument("--ceiling", type=int, help="global step ceiling")
    run.add_argument("--max-cycles", type=int, help="stop after this many macro-cycles")

    lev = sub.add_parser("levin", help="invert a verifier program by Levin search")
    lev.add_argument("g", help="verifier assembly file")
    lev.add_argument("x", type=int, help="target value")
    lev.add_argument("--mode", choices=("simple", "search"), default="simple")
    lev.add_argument("--ceiling", type=int, default=1 << 20)
    lev.add_argument("--format", choices=("json", "csv"), default="json")

    vb = sub.add_parser("verify-bound", help="check a run against the time bound")
    _scenario_arg(vb)
    vb.add_argument("--pair", help="script entry id to check (default: the scenario's designated pair)")
    vb.add_argument("--shares", type=_shares)

    k2 = sub.add_parser("k2", help="upper-bound trajectory for certified program length")
    k2.add_argument("program", help="assembly file")
    k2.add_argument("--budget", type=int, default=100_000)
    k2.add_argument("--max-bits", type=int)

    asm = sub.add_parser("assemble", help="assemble to bits, or disassemble bits")
    asm.add_argument("source", help="assembly file, or a bit string with --disassemble")
    asm.add_argument("--disassemble", action="store_true")
    return parser


def _resolve_scenario(args):
    path = args.scenario or args.scenario_pos
    if not path:
        raise ScenarioError("no scenario given (use --scenario PATH)")
    sc = load_scenario(path)
    sc.sanity_check()
    return sc


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None


def cmd_run(args) -> int:
    sc = _resolve_scenario(args)
    result = run_mpstar(sc, shares=args.shares, ceiling=args.ceiling, max_cycles=args.max_cycles)
    if not args.no_trace:
        ext = "csv" if args.format == "csv" else "ndjson"
        if args.trace:
            path = Path(args.trace)
        else:
            path = Path(os.environ.get(TRACE_DIR_ENV, ".")) / f"{sc.name}.trace.{ext}"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            write_trace(result.trace, fh, args.format)
    if result.halted:
        print(f"output={result.output} steps={result.total_steps}")
    else:
        print(f"output=- steps={result.total_steps}")
    print(f"cycles={result.cycles} a_steps={result.a_steps} b_steps={result.b_steps} "
          f"c_steps={result.c_steps}")
    return EXIT_OK


def cmd_levin(args) -> int:
    g = assemble(_read(args.g))
    problem = InversionProblem(g, args.x)
    search = simple_search if args.mode == "simple" else search_phases
    report = search(problem, ceiling=args.ceiling)
    row = report.as_dict()
    if args.format == "json":
        print(json.dumps(row))
    else:
        print(",".join(row))
        print(",".join(str(v) for v in row.values()))
    return EXIT_OK


def cmd_verify_bound(args) -> int:
    sc = _resolve_scenario(args)
    try:
        report = verify_theorem1_bound(sc, designated=args.pair, shares=args.shares)
    except BoundViolated as exc:
        for line in exc.report.lines():
            print(line)
        raise
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_k2(args) -> int:
    pstar = assemble(_read(args.program))
    print("budget,best_len")
    for est in k2_trajectory(pstar, doubling_budgets(args.budget, 64), args.max_bits):
        print(f"{est.budget_spent},{est.best_len_bits}")
    return EXIT_OK


def cmd_assemble(args) -> int:
    if args.disassemble:
        print(disassemble(decode_program(args.source.strip())), end="")
    else:
        print(assemble(_read(args.source)).bits)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "levin": cmd_levin,
    "verify-bound": cmd_verify_bound,
    "k2": cmd_k2,
    "assemble": cmd_assemble,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, AssemblyError, DecodeError) as exc:
        print(f"fastalg: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScriptInvalid as exc:
        print(f"fastalg: invalid proof script: {exc}", file=sys.stderr)
        return EXIT_SCRIPT
    except CeilingExceeded as exc:
        print(f"fastalg: {exc}", file=sys.stderr)
        return EXIT_CEILING
    except SearchExhausted as exc:
        print(f"fastalg: search exhausted after {exc.steps} steps: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except BoundViolated as exc:
        print(f"fastalg: {exc}", file=sys.stderr)
        return EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())
