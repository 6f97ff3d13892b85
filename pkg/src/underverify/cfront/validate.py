"""Subset validation: the set of programs accepted here is exactly the set the
extractor is defined on."""

from __future__ import annotations

from ..errors import Diagnostic
from .ast import (
    Assign,
    BinOp,
    Call,
    CFunction,
    CProgram,
    Expr,
    LocalDecl,
    Name,
    ResultRef,
    Return,
    Stmt,
    Unary,
    While,
    If,
    Compound,
    ExprStmt,
    walk_expr,
)
from .parser import model_function_name

# names the extracted model uses for its own purposes, plus model-language keywords
RESERVED = {
    "returnFlag", "funcResult", "result", "global", "this", "null", "unit", "new", "await",
    "skip", "then", "module", "interface", "class", "implements", "data", "def", "valueOf",
    "True", "False", "Global", "heap",
}

ALLOWED_BINOPS = {"+", "-", "*", "/", "<", ">", "<=", ">=", "==", "!=", "&&", "||"}


class _Validator:
    def __init__(self, program: CProgram):
        self.program = program
        self.diags: list[Diagnostic] = list(program.warnings)
        self.globals = {g.name for g in program.globals}
        self.functions = {f.name: f for f in program.functions}
        self.model_fns: set[str] = set()
        self._stmt_assign = None

    def report(self, node, message: str, construct: str, severity: str = "error") -> None:
        line, col = getattr(node, "loc", None) or (0, 0)
        self.diags.append(Diagnostic(line, col, severity, message, construct))

    def run(self) -> list[Diagnostic]:
        p = self.program
        for d in p.model_fn_defs:
            try:
                self.model_fns.add(model_function_name(d))
            except Exception as exc:  # malformed def
                self.diags.append(Diagnostic(0, 0, "error", str(exc), "ABS def"))
        seen: set[str] = set()
        for g in p.globals:
            if g.name in seen:
                self.report(g, f"duplicate global '{g.name}'", "global")
            seen.add(g.name)
            self._reserved(g, g.name)
            if g.ctype != "int":
                self.report(g, f"global '{g.name}' has type '{g.ctype}'; only 'int' is supported "
                            "(no pointers, arrays or floating types)", _type_construct(g.ctype))
            if g.const:
                self.report(g, f"const global '{g.name}' is not supported", "const global")
            if g.strong_invariant is not None:
                names = {s.name for s in walk_expr(g.strong_invariant) if isinstance(s, Name)}
                others = sorted(names - {g.name})
                if others:
                    self.report(g, f"strong invariant of '{g.name}' also mentions {', '.join(others)}; "
                                "relational invariants are excluded", "relational invariant")
                self._spec_calls(g, g.strong_invariant)
                if any(isinstance(s, ResultRef) for s in walk_expr(g.strong_invariant)):
                    self.report(g, "\\result in a global invariant", "invariant")
        fseen: set[str] = set()
        for fn in p.functions:
            if fn.name in fseen or fn.name in self.globals:
                self.report(fn, f"duplicate name '{fn.name}'", "function")
            fseen.add(fn.name)
            self._reserved(fn, fn.name)
            self.function(fn)
        return self.diags

    def _reserved(self, node, name: str) -> None:
        if name in RESERVED or name.startswith(("tmp_", "local_", "fut_", "arg")):
            self.report(node, f"identifier '{name}' is reserved by the model extraction", "reserved name")

    def _spec_calls(self, node, e: Expr) -> None:
        for s in walk_expr(e):
            if isinstance(s, Call) and s.func not in self.model_fns:
                self.report(node, f"unknown model function '{s.func}' in specification", "spec")

    def function(self, fn: CFunction) -> None:
        if fn.return_kind not in ("int", "void"):
            self.report(fn, f"return type '{fn.return_kind}' is not supported", _type_construct(fn.return_kind))
        params = {}
        for prm in fn.params:
            if prm.ctype != "int":
                self.report(prm, f"parameter '{prm.name}' has type '{prm.ctype}'; only 'int' is supported",
                            _type_construct(prm.ctype))
            if prm.name in params:
                self.report(prm, f"duplicate parameter '{prm.name}'", "parameter")
            params[prm.name] = prm
            self._reserved(prm, prm.name)
        if fn.contract is not None:
            c = fn.contract
            allowed = set(params) | self.globals
            for clause, e in (("requires", c.requires), ("ensures", c.ensures)):
                if e is None:
                    continue
                self._spec_calls(fn, e)
                for s in walk_expr(e):
                    if isinstance(s, Name):
                        if s.name not in allowed:
                            self.report(s, f"unknown identifier '{s.name}' in {clause} clause", "spec")
                        elif s.name in self.globals and s.name not in params:
                            self.report(s, f"{clause} clause of '{fn.name}' mentions global '{s.name}'; "
                                        "contracts over globals are not supported", "contract over global")
                    if isinstance(s, ResultRef):
                        if clause == "requires":
                            self.report(s, "\\result in a requires clause", "spec")
                        elif fn.return_kind != "int":
                            self.report(s, f"\\result used but '{fn.name}' returns void", "spec")
        scope = {p: ("const" if params[p].const else "var") for p in params}
        self.block(fn, fn.body.items, dict(scope))

    def block(self, fn: CFunction, items: list[Stmt], scope: dict) -> None:
        for s in items:
            self.stmt(fn, s, scope)

    def stmt(self, fn: CFunction, s: Stmt, scope: dict) -> None:
        if isinstance(s, Compound):
            self.block(fn, s.items, dict(scope))
            return
        if isinstance(s, LocalDecl):
            if s.ctype != "int":
                self.report(s, f"local '{s.name}' has type '{s.ctype}'; only 'int' is supported",
                            _type_construct(s.ctype))
            if s.init is None:
                self.report(s, f"local '{s.name}' must be initialized", "uninitialized local")
            else:
                self.full_expr(fn, s.init, scope, allow_short_circuit=True)
            if s.name in self.globals or s.name in self.functions or s.name in scope:
                self.report(s, f"local '{s.name}' shadows another name", "shadowing")
            self._reserved(s, s.name)
            scope[s.name] = "const" if s.const else "var"
            return
        if isinstance(s, ExprStmt):
            self.full_expr(fn, s.expr, scope, statement=True, allow_short_circuit=True)
            return
        if isinstance(s, Return):
            if s.value is None and fn.return_kind == "int":
                self.report(s, f"'{fn.name}' must return a value", "return")
            if s.value is not None:
                if fn.return_kind == "void":
                    self.report(s, f"void function '{fn.name}' returns a value", "return")
                self.full_expr(fn, s.value, scope, allow_short_circuit=True)
            return
        if isinstance(s, If):
            self.full_expr(fn, s.cond, scope, allow_short_circuit=True)
            self.stmt(fn, s.then, dict(scope))
            if s.else_ is not None:
                self.stmt(fn, s.else_, dict(scope))
            return
        if isinstance(s, While):
            self.full_expr(fn, s.cond, scope, allow_short_circuit=True)
            if s.invariant is not None:
                self._spec_calls(s, s.invariant)
                for n in walk_expr(s.invariant):
                    if isinstance(n, Name):
                        if n.name in self.globals and n.name not in scope:
                            self.report(n, f"loop invariant mentions global '{n.name}'; "
                                        "only locals and parameters are supported", "loop invariant over global")
                        elif n.name not in scope:
                            self.report(n, f"unknown identifier '{n.name}' in loop invariant", "spec")
            self.stmt(fn, s.body, dict(scope))
            return
        self.report(s, "unsupported statement", type(s).__name__)

    def full_expr(self, fn, e: Expr, scope: dict, statement: bool = False, allow_short_circuit: bool = False):
        # short-circuit operators are accepted only as the whole full expression
        # (or the right-hand side of a top-level assignment to a local)
        top = e
        self._stmt_assign = e if statement and isinstance(e, Assign) else None
        if isinstance(e, Assign) and e.target in scope:
            top = e.value
        self.expr(fn, e, scope, top=top, value_needed=not statement,
                  sc_ok=allow_short_circuit, statement=statement)

    def expr(self, fn, e: Expr, scope: dict, top, value_needed: bool, sc_ok: bool, statement: bool,
             nested_in_sc: bool = False):
        if isinstance(e, Name):
            if e.name not in scope and e.name not in self.globals:
                self.report(e, f"undeclared identifier '{e.name}'", "identifier")
            return
        if isinstance(e, Unary):
            self.report(e, f"unary operator '{e.op}' is outside the supported fragment (write 0 - e)",
                        "unary operator")
            self.expr(fn, e.operand, scope, top, True, sc_ok, False)
            return
        if isinstance(e, Assign):
            if e.op != "=":
                self.report(e, f"compound assignment '{e.op}' is outside the supported fragment",
                            "compound assignment")
            if e.target in scope:
                if scope[e.target] == "const":
                    self.report(e, f"assignment to const '{e.target}'", "const assignment")
                if e is not self._stmt_assign:
                    self.report(e, f"assignment to local '{e.target}' must be a full expression statement",
                                "nested local assignment")
            elif e.target not in self.globals:
                self.report(e, f"assignment to undeclared '{e.target}'", "identifier")
            self.expr(fn, e.value, scope, top, True, sc_ok, False)
            return
        if isinstance(e, BinOp):
            if e.op not in ALLOWED_BINOPS:
                self.report(e, f"operator '{e.op}' is outside the supported fragment", "operator")
            if e.op in ("&&", "||"):
                if not sc_ok or not (e is top or nested_in_sc):
                    self.report(e, f"'{e.op}' is supported only as a whole condition, return value, "
                                "initializer or statement", "nested short-circuit")
                self.expr(fn, e.left, scope, top, True, sc_ok, False, nested_in_sc=True)
                self.expr(fn, e.right, scope, top, True, sc_ok, False, nested_in_sc=True)
                return
            self.expr(fn, e.left, scope, top, True, sc_ok, False)
            self.expr(fn, e.right, scope, top, True, sc_ok, False)
            return
        if isinstance(e, Call):
            callee = self.functions.get(e.func)
            if callee is None:
                self.report(e, f"call to undeclared function '{e.func}'", "call")
            else:
                if len(callee.params) != len(e.args):
                    self.report(e, f"'{e.func}' expects {len(callee.params)} arguments, got {len(e.args)}", "call")
                if callee.return_kind == "void" and value_needed:
                    self.report(e, f"value of void function '{e.func}' is used", "void value")
            for a in e.args:
                self.expr(fn, a, scope, top, True, sc_ok, False)
            return


def _type_construct(ctype: str) -> str:
    if "*" in ctype:
        return "pointer declaration"
    if "[" in ctype:
        return "array declaration"
    if ctype in ("float", "double"):
        return "floating type"
    return "type"


def validate_subset(program: CProgram) -> list[Diagnostic]:
    return _Validator(program).run()
