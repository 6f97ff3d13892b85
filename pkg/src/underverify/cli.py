"""Command-line driver: extract, verify, deadlock, explore, all.

Exit codes: 0 success, 1 verification failure (or unresolved deadlock
candidates / monitor violations), 2 input or subset error, 3 solver or
environment error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

from .absir import normalize, parse_model, print_model, typecheck
from .cfront.parser import parse_translation_unit
from .deadlock import analyze
from .errors import (
    ContractTranslationError,
    InvariantError,
    MalformedSolverOutput,
    ParseError,
    SolverUnavailable,
    SubsetViolation,
    UnencodableTerm,
    UnknownStatementForm,
    UVError,
)
from .extractor import extract_model
from .interpreter import EntryError, explore, format_trace, parse_entry, run_random, sample
from .prover import VALID, verify_model
from .smt import SolverConfig, find_solver

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ENV = 0, 1, 2, 3


@dataclass
class RunReport:
    input: str
    stages: dict = field(default_factory=dict)  # stage -> "ok" | "failed" | "error: ..."
    timings_ms: dict = field(default_factory=dict)
    obligations: list = field(default_factory=list)
    deadlock: dict = field(default_factory=dict)
    exploration: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    model: str = ""

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True, default=str)


class _InputError(Exception):
    pass


def load_model(path: str, report: RunReport):
    """Parse a C file (and extract it) or an ABS model file; returns the raw model."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise _InputError(f"cannot read {path}: {e}") from e
    t0 = time.perf_counter()
    try:
        if path.endswith(".c"):
            program = parse_translation_unit(text)
            report.warnings += [d.format(path) for d in program.warnings]
            model = extract_model(program, module="TestModule")
            report.stages["extract"] = "ok"
        else:
            model = parse_model(text)
            report.stages["parse"] = "ok"
    except SubsetViolation as e:
        raise _InputError("\n".join(d.format(path) for d in e.diagnostics)) from e
    except ParseError as e:
        raise _InputError(f"{path}:{e.line}:{e.col}: error: {e.message}") from e
    except (ContractTranslationError, InvariantError, UnknownStatementForm) as e:
        raise _InputError(f"{path}: error: {e}") from e
    report.timings_ms["load"] = round((time.perf_counter() - t0) * 1000, 1)
    diags = [d for d in typecheck(model) if d.severity == "error"]
    if diags:
        raise _InputError("\n".join(d.format(path) for d in diags))
    return model


def _solver_config(args) -> SolverConfig:
    timeout = args.timeout
    if timeout is None:
        timeout = float(os.environ.get("UV_TIMEOUT", "20"))
    path = args.solver or os.environ.get("UV_SOLVER")
    return SolverConfig(path=path, timeout=timeout, dump_dir=args.dump_smt, jobs=args.jobs,
                        recursive_defs=not args.no_recursive_defs)


def _verify(model, args, report: RunReport, out) -> bool:
    config = _solver_config(args)
    if config.path and find_solver(config.path) is None:
        raise SolverUnavailable(f"solver not found: {config.path}")
    t0 = time.perf_counter()
    results = verify_model(normalize(model), config)
    report.timings_ms["verify"] = round((time.perf_counter() - t0) * 1000, 1)
    ok = True
    for r in results:
        if not args.json:
            print(r.line(), file=out)
        entry = {"po": r.po.name, "kind": r.po.kind, "verdict": r.verdict, "goals": len(r.goals),
                 "ms": round(r.millis, 1)}
        if r.verdict != VALID:
            ok = False
            entry["failing_goals"] = [g.sequent.label for g in r.goals if g.status != "unsat"]
            if args.verbose and not args.json:
                from .prover import describe_goal

                for g in r.goals:
                    if g.status != "unsat":
                        print("  " + describe_goal(g).replace("\n", "\n  "), file=out)
        report.obligations.append(entry)
    n_valid = sum(r.verdict == VALID for r in results)
    if not args.json:
        print(f"{n_valid}/{len(results)} obligations valid", file=out)
    report.stages["verify"] = "ok" if ok else "failed"
    return ok


def _deadlock(model, args, report: RunReport, out) -> bool:
    t0 = time.perf_counter()
    rep = analyze(normalize(model))
    report.timings_ms["deadlock"] = round((time.perf_counter() - t0) * 1000, 1)
    report.deadlock = {"free": sorted(rep.free_methods), "unresolved": dict(sorted(rep.unresolved_methods.items()))}
    if not args.json:
        for line in rep.lines():
            print(line, file=out)
        print(f"{len(rep.free_methods)} free, {len(rep.unresolved_methods)} unresolved", file=out)
    report.stages["deadlock"] = "ok" if not rep.unresolved_methods else "unresolved"
    return not rep.unresolved_methods


def _explore(model, args, report: RunReport, out) -> bool:
    m = normalize(model)
    entry = parse_entry(args.entry, m)
    t0 = time.perf_counter()
    if args.random is not None:
        if args.runs > 1:
            results = sample(m, entry, args.runs, args.random)
            summary = {"mode": "random", "runs": args.runs, "results": sorted(results, key=str)}
        else:
            result, trace = run_random(m, entry, args.random)
            summary = {"mode": "random", "runs": 1, "results": [result]}
            if args.emit_traces:
                os.makedirs(args.emit_traces, exist_ok=True)
                with open(os.path.join(args.emit_traces, "trace_0.txt"), "w") as fh:
                    fh.write(format_trace(trace))
        report.exploration = summary
        if not args.json:
            print("results: {" + ", ".join(str(r) for r in summary["results"]) + "}", file=out)
        report.timings_ms["explore"] = round((time.perf_counter() - t0) * 1000, 1)
        report.stages["explore"] = "ok"
        return True
    ex = explore(m, entry, max_depth=args.max_depth, traces=bool(args.emit_traces))
    report.timings_ms["explore"] = round((time.perf_counter() - t0) * 1000, 1)
    if args.emit_traces:
        os.makedirs(args.emit_traces, exist_ok=True)
        for i, (_, trace) in enumerate(ex.traces):
            with open(os.path.join(args.emit_traces, f"trace_{i}.txt"), "w") as fh:
                fh.write(format_trace(trace))
    report.exploration = {
        "entry": entry.describe(),
        "results": sorted(ex.results, key=str),
        "configurations": ex.configurations,
        "exhausted": ex.exhausted,
        "deadlocked": ex.deadlocked,
        "stuck": ex.stuck,
        "violations": [v.__dict__ for v in ex.violations],
    }
    if not args.json:
        print(ex.summary(), file=out)
        for v in ex.violations:
            print(f"violation: {v.annotation} of {v.where} at {v.event}", file=out)
    ok = not ex.violations
    report.stages["explore"] = "ok" if ok else "failed"
    return ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="underverify", description="Extract, verify and explore active-object models of C programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="C source (.c) or model file (.abs)")
        sp.add_argument("--json", action="store_true", help="emit one structured report")

    def solver_flags(sp):
        sp.add_argument("--solver", help="solver executable (default: $UV_SOLVER or z3 on PATH)")
        sp.add_argument("--timeout", type=float, help="per-goal timeout in seconds (default: $UV_TIMEOUT or 20)")
        sp.add_argument("--dump-smt", metavar="DIR", help="write one SMT-LIB script per goal")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="concurrent solver processes")
        sp.add_argument("--no-recursive-defs", action="store_true",
                        help="encode model functions as quantified axioms instead of recursive definitions")
        sp.add_argument("-v", "--verbose", action="store_true", help="print failing goals")

    sp = sub.add_parser("extract", help="print the extracted model")
    common(sp)
    sp.add_argument("-o", "--output", help="write the model to a file")
    sp.add_argument("--normalized", action="store_true", help="print the normalized model")

    sp = sub.add_parser("verify", help="verify all proof obligations")
    common(sp)
    solver_flags(sp)

    sp = sub.add_parser("deadlock", help="structural deadlock analysis")
    common(sp)

    sp = sub.add_parser("explore", help="enumerate schedules from an entry point")
    common(sp)
    sp.add_argument("--entry", default="main", help="main | CLASS.METHOD(ARGS) | cfunction(ARGS)")
    sp.add_argument("--max-depth", type=int, default=100_000)
    sp.add_argument("--emit-traces", metavar="DIR", help="write one event list per distinct final configuration")
    sp.add_argument("--random", type=int, metavar="SEED", help="run random schedules instead of exhaustive search")
    sp.add_argument("--runs", type=int, default=1, help="number of random schedules")

    sp = sub.add_parser("all", help="verify and run the deadlock analysis")
    common(sp)
    solver_flags(sp)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    report = RunReport(input=args.file)
    code = EXIT_OK
    try:
        model = load_model(args.file, report)
        for w in report.warnings:
            print(w, file=sys.stderr)
        if args.command == "extract":
            text = print_model(normalize(model) if args.normalized else model)
            if args.output:
                with open(args.output, "w") as fh:
                    fh.write(text)
            elif not args.json:
                out.write(text)
            report.stages["emit"] = "ok"
            if args.json:
                report.model = text
        elif args.command == "verify":
            code = EXIT_OK if _verify(model, args, report, out) else EXIT_FAIL
        elif args.command == "deadlock":
            code = EXIT_OK if _deadlock(model, args, report, out) else EXIT_FAIL
        elif args.command == "explore":
            code = EXIT_OK if _explore(model, args, report, out) else EXIT_FAIL
        elif args.command == "all":
            ok = _verify(model, args, report, out)
            _deadlock(model, args, report, out)
            code = EXIT_OK if ok else EXIT_FAIL
    except _InputError as e:
        report.stages["input"] = f"error: {e}"
        print(str(e), file=sys.stderr)
        code = EXIT_INPUT
    except EntryError as e:
        report.stages["input"] = f"error: {e}"
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_INPUT
    except (SolverUnavailable, MalformedSolverOutput, UnencodableTerm) as e:
        report.stages["solver"] = f"error: {e}"
        print(f"solver error: {e}", file=sys.stderr)
        code = EXIT_ENV
    except UVError as e:
        report.stages["internal"] = f"error: {e}"
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_INPUT
    if args.json:
        out.write(report.to_json() + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())


def main_entry() -> None:
    sys.exit(main())
