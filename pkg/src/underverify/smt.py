"""SMT-LIB encoding of sequents and a solver driver.

Integers map to ``Int``; each heap is an ``(Array Field S)``; references,
units, field identifiers and futures are uninterpreted sorts.  Model
functions become recursive definitions (or, with ``recursive_defs=False``,
uninterpreted functions with a quantified defining axiom).  The asserted
formula is the negation of the sequent, so ``unsat`` means valid.
"""

from __future__ import annotations

import os
import shutil
import subprocess
from dataclasses import dataclass, field
from typing import Optional

from .errors import MalformedSolverOutput, SolverUnavailable, UnencodableTerm
from .logic import (
    BOOL,
    FIELD,
    INT,
    App,
    Const,
    Exists,
    Sequent,
    Sym,
    Term,
    UpdApp,
)

BUILTIN_OPS = {
    "+", "-", "*", "<", ">", "<=", ">=", "=", "and", "or", "not", "=>",
    "ite", "select", "store", "distinct",
}

PRELUDE_FUNS = {
    "cdiv": "(define-fun cdiv ((a Int) (b Int)) Int"
            " (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))",
    "cmod": "(define-fun cmod ((a Int) (b Int)) Int (- a (* b (cdiv a b))))",
}


@dataclass
class FunDef:
    """A model function ready for encoding."""

    name: str
    params: list  # of Sym
    sort: str
    body: Term


@dataclass
class SmtScript:
    declarations: list[str]
    axioms: list[str]
    assertion: str
    label: str = ""

    def text(self) -> str:
        lines = ["(set-logic ALL)"]
        if self.label:
            lines.insert(0, f"; {self.label}")
        lines += self.declarations
        lines += self.axioms
        lines.append(f"(assert {self.assertion})")
        lines.append("(check-sat)")
        return "\n".join(lines) + "\n"


def smt_sort(sort: str) -> str:
    if sort in (INT, BOOL):
        return sort
    if sort.startswith("Heap_"):
        return f"(Array Field {smt_sort(sort[5:])})"
    return sort


def _q(name: str) -> str:
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def term_to_smt(t: Term) -> str:
    if isinstance(t, Sym):
        return _q(t.name)
    if isinstance(t, Const):
        if t.sort == BOOL:
            return "true" if t.value else "false"
        if t.sort == INT:
            v = int(t.value)
            return str(v) if v >= 0 else f"(- {-v})"
        if t.value in ("null", "unit"):
            return _q(t.value)
        raise UnencodableTerm(f"constant {t!r}")
    if isinstance(t, App):
        if not t.args:
            return _q(t.op)
        op = t.op if t.op in BUILTIN_OPS else _q(t.op) if not _plain(t.op) else t.op
        return f"({op} " + " ".join(term_to_smt(a) for a in t.args) + ")"
    if isinstance(t, Exists):
        return f"(exists (({_q(t.var.name)} {smt_sort(t.var.sort)})) {term_to_smt(t.body)})"
    if isinstance(t, UpdApp):
        raise UnencodableTerm("update application left in a goal")
    raise UnencodableTerm(repr(t))


def _plain(op: str) -> bool:
    return op in PRELUDE_FUNS or op.startswith(("val_", "fn_"))


def _collect(t: Term, syms: set, apps: set, sorts: set, bound=frozenset()):
    sorts.add(t.sort)
    if isinstance(t, Sym):
        if t not in bound:
            syms.add(t)
    elif isinstance(t, Const):
        if t.value in ("null", "unit"):
            syms.add(Sym(t.value, t.sort, "const"))
    elif isinstance(t, App):
        apps.add((t.op, tuple(a.sort for a in t.args), t.sort))
        for a in t.args:
            _collect(a, syms, apps, sorts, bound)
    elif isinstance(t, Exists):
        sorts.add(t.var.sort)
        _collect(t.body, syms, apps, sorts, bound | {t.var})
    else:
        raise UnencodableTerm(repr(t))


def _base_sorts(sort: str) -> set:
    if sort in (INT, BOOL):
        return set()
    if sort.startswith("Heap_"):
        return {FIELD} | _base_sorts(sort[5:])
    return {sort}


def encode(seq: Sequent, defs: Optional[dict] = None, recursive_defs: bool = True) -> SmtScript:
    """Encode ``seq`` so that ``unsat`` of the script means the sequent is valid."""
    defs = defs or {}
    goal = seq.formula()
    syms: set = set()
    apps: set = set()
    sorts: set = set()
    _collect(goal, syms, apps, sorts)

    # model functions used, closed under their bodies
    used = sorted({op[3:] for op, _, _ in apps if op.startswith("fn_")})
    todo, fns = list(used), []
    while todo:
        n = todo.pop()
        if n in fns:
            continue
        if n not in defs:
            raise UnencodableTerm(f"unknown model function {n}")
        fns.append(n)
        s2: set = set()
        a2: set = set()
        _collect(defs[n].body, s2, a2, sorts, frozenset(defs[n].params))
        apps |= a2
        todo += [op[3:] for op, _, _ in a2 if op.startswith("fn_")]
        for p in defs[n].params:
            sorts.add(p.sort)
    fns.sort()

    base: set = set()
    for s in sorts:
        base |= _base_sorts(s)
    for s in syms:
        base |= _base_sorts(s.sort)
    for op, args, res in apps:
        for s in args + (res,):
            base |= _base_sorts(s)

    decls = [f"(declare-sort {s} 0)" for s in sorted(base)]
    vals = sorted({(op, args, res) for op, args, res in apps if op.startswith("val_")})
    for op, args, res in vals:
        decls.append(f"(declare-fun {op} ({' '.join(smt_sort(a) for a in args)}) {smt_sort(res)})")
    need = {op for op, _, _ in apps}
    if "cmod" in need:
        need.add("cdiv")
    for name in ("cdiv", "cmod"):
        if name in need:
            decls.append(PRELUDE_FUNS[name])

    axioms = []
    if fns:
        if recursive_defs:
            heads = []
            bodies = []
            for n in fns:
                d = defs[n]
                ps = " ".join(f"({_q(p.name)} {smt_sort(p.sort)})" for p in d.params)
                heads.append(f"(fn_{n} ({ps}) {smt_sort(d.sort)})")
                bodies.append(term_to_smt(d.body))
            decls.append(f"(define-funs-rec ({' '.join(heads)}) ({' '.join(bodies)}))")
        else:
            for n in fns:
                d = defs[n]
                decls.append(
                    f"(declare-fun fn_{n} ({' '.join(smt_sort(p.sort) for p in d.params)}) {smt_sort(d.sort)})"
                )
                ps = " ".join(f"({_q(p.name)} {smt_sort(p.sort)})" for p in d.params)
                call = f"(fn_{n} {' '.join(_q(p.name) for p in d.params)})"
                axioms.append(f"(assert (forall ({ps}) (= {call} {term_to_smt(d.body)})))")

    for s in sorted(syms, key=lambda s: (s.name, s.sort)):
        decls.append(f"(declare-const {_q(s.name)} {smt_sort(s.sort)})")

    fields = sorted(s.name for s in syms if s.kind == "field")
    if len(fields) >= 2:
        axioms.append("(assert (distinct " + " ".join(_q(f) for f in fields) + "))")
    return SmtScript(decls, axioms, f"(not {term_to_smt(goal)})", seq.label)


# -- solver driver -------------------------------------------------------------


@dataclass(frozen=True)
class SolverResult:
    status: str  # "unsat" | "sat" | "unknown"
    model: str = ""


@dataclass
class SolverConfig:
    path: Optional[str] = None
    timeout: float = 20.0  # seconds
    dump_dir: Optional[str] = None
    jobs: int = 1
    recursive_defs: bool = True
    extra: dict = field(default_factory=dict)


def find_solver(path: Optional[str] = None) -> Optional[str]:
    """Resolve the solver executable: explicit path, ``UV_SOLVER``, then ``z3`` on PATH."""
    cand = path or os.environ.get("UV_SOLVER") or "z3"
    if os.path.sep in cand:
        return cand if os.access(cand, os.X_OK) else None
    return shutil.which(cand)


def run_solver(script: SmtScript | str, timeout: float = 20.0, path: Optional[str] = None) -> SolverResult:
    """Run one script through the solver and map its status line."""
    text = script.text() if isinstance(script, SmtScript) else script
    exe = find_solver(path)
    if exe is None:
        if path or os.environ.get("UV_SOLVER"):
            raise SolverUnavailable(f"solver not found: {path or os.environ.get('UV_SOLVER')}")
        return _run_inprocess(text, timeout)
    ms = max(1, int(timeout * 1000))
    try:
        proc = subprocess.run(
            [exe, "-in", "-smt2", f"-t:{ms}"],
            input=text + "(get-model)\n",
            capture_output=True,
            text=True,
            timeout=timeout + 10,
        )
    except subprocess.TimeoutExpired:
        return SolverResult("unknown", "wall-clock timeout")
    except OSError as e:
        raise SolverUnavailable(f"cannot run solver {exe}: {e}") from e
    return parse_output(proc.stdout, proc.stderr)


def parse_output(stdout: str, stderr: str = "") -> SolverResult:
    lines = stdout.strip().splitlines()
    if not lines:
        raise MalformedSolverOutput(f"no solver output; stderr: {stderr.strip()[:200]}")
    head = lines[0].strip()
    if head in ("unsat", "sat", "unknown"):
        return SolverResult(head, "\n".join(lines[1:]) if head == "sat" else "")
    if head == "timeout":
        return SolverResult("unknown", "timeout")
    raise MalformedSolverOutput(f"unexpected solver output: {head[:200]}")


def _run_inprocess(text: str, timeout: float) -> SolverResult:
    try:
        import z3
    except ImportError as e:
        raise SolverUnavailable("no z3 executable on PATH and the z3 Python package is missing") from e
    s = z3.Solver()
    s.set("timeout", max(1, int(timeout * 1000)))
    body = "\n".join(l for l in text.splitlines() if l.strip() not in ("(check-sat)", "(set-logic ALL)"))
    try:
        s.from_string(body)
    except z3.Z3Exception as e:
        raise MalformedSolverOutput(str(e)) from e
    r = s.check()
    if r == z3.unsat:
        return SolverResult("unsat")
    if r == z3.sat:
        return SolverResult("sat", str(s.model()))
    return SolverResult("unknown", s.reason_unknown())
