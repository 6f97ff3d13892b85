"""Type checking over the supported vocabulary of types."""

from __future__ import annotations

from typing import Optional

from ..errors import Diagnostic
from .ir import (
    AbsModel,
    Assign,
    AsyncCall,
    Await,
    Bin,
    Block,
    BoolC,
    ClassDecl,
    ExprStmt,
    FieldRef,
    FnApp,
    Get,
    If,
    IfE,
    IntC,
    Method,
    New,
    NullC,
    Return,
    Skip,
    SyncCall,
    This,
    Un,
    UnitC,
    Var,
    VarDecl,
    While,
    future_payload,
    is_future_type,
)
from .printer import print_expr

ARITH = ("+", "-", "*", "/", "%")
ORDER = ("<", ">", "<=", ">=")
EQUALITY = ("==", "!=")
LOGIC = ("&&", "||")
NULL = "<null>"


class _TypeError(Exception):
    pass


class TypeEnv:
    """Shared type-level queries over a model."""

    def __init__(self, model: AbsModel):
        self.model = model
        self.ifaces = {i.name: i for i in model.interfaces}
        self.classes = {c.name: c for c in model.classes}

    def is_ref(self, t: str) -> bool:
        return t in self.ifaces or t in self.classes

    def known(self, t: str) -> bool:
        if t in ("Int", "Bool", "Unit"):
            return True
        if is_future_type(t):
            return future_payload(t) in ("Int", "Unit", "Bool") or self.is_ref(future_payload(t))
        return self.is_ref(t)

    def assignable(self, src: str, dst: str) -> bool:
        if src == dst:
            return True
        if src == NULL:
            return self.is_ref(dst)
        c = self.classes.get(src)
        if c is not None and dst in c.implements:
            return True
        # an interface sharing its name with a class stands for that class
        if src in self.ifaces and dst in self.classes and src in self.classes[dst].implements:
            return True
        return False

    def lookup_method(self, t: str, name: str):
        """(return type, parameter types) of method ``name`` on static type ``t``."""
        i = self.ifaces.get(t)
        if i is not None and i.method(name) is not None:
            sig = i.method(name)
            return sig.ret, [p.type for p in sig.params]
        c = self.classes.get(t)
        if c is not None and c.method(name) is not None:
            m = c.method(name)
            return m.ret, [p.type for p in m.params]
        return None


class _Checker:
    def __init__(self, model: AbsModel):
        self.m = model
        self.env = TypeEnv(model)
        self.diags: list[Diagnostic] = []
        self.loc = (0, 0)
        self.where = ""

    def report(self, msg: str, construct: str = "type") -> None:
        line, col = self.loc
        prefix = f"{self.where}: " if self.where else ""
        self.diags.append(Diagnostic(line, col, "error", prefix + msg, construct))

    # -- expressions --
    def pure(self, e, scope: dict, spec: bool = False) -> Optional[str]:
        try:
            return self._pure(e, scope, spec)
        except _TypeError as exc:
            self.report(str(exc))
            return None

    def _pure(self, e, scope: dict, spec: bool) -> str:
        if isinstance(e, IntC):
            return "Int"
        if isinstance(e, BoolC):
            return "Bool"
        if isinstance(e, NullC):
            return NULL
        if isinstance(e, UnitC):
            return "Unit"
        if isinstance(e, This):
            if "this" not in scope:
                raise _TypeError("'this' used outside a class")
            return scope["this"]
        if isinstance(e, Var):
            if e.name not in scope:
                raise _TypeError(f"unknown identifier '{e.name}'")
            return scope[e.name]
        if isinstance(e, FieldRef):
            key = "this." + e.name
            if key not in scope:
                raise _TypeError(f"unknown field 'this.{e.name}'")
            return scope[key]
        if isinstance(e, Bin):
            lt = self._pure(e.left, scope, spec)
            rt = self._pure(e.right, scope, spec)
            if e.op in ARITH or e.op in ORDER:
                if lt != "Int" or rt != "Int":
                    raise _TypeError(f"operator '{e.op}' needs Int operands in {print_expr(e)}")
                return "Int" if e.op in ARITH else "Bool"
            if e.op in EQUALITY:
                if not (self.env.assignable(lt, rt) or self.env.assignable(rt, lt)
                        or (self.env.is_ref(lt) and self.env.is_ref(rt))):
                    raise _TypeError(f"cannot compare {lt} with {rt} in {print_expr(e)}")
                return "Bool"
            if e.op in LOGIC:
                if lt != "Bool" or rt != "Bool":
                    raise _TypeError(f"operator '{e.op}' needs Bool operands in {print_expr(e)}")
                return "Bool"
            raise _TypeError(f"unknown operator '{e.op}'")
        if isinstance(e, Un):
            t = self._pure(e.operand, scope, spec)
            want = "Bool" if e.op == "!" else "Int"
            if t != want:
                raise _TypeError(f"operator '{e.op}' needs a {want} operand")
            return want
        if isinstance(e, IfE):
            if self._pure(e.cond, scope, spec) != "Bool":
                raise _TypeError("condition of if-expression must be Bool")
            a = self._pure(e.then, scope, spec)
            b = self._pure(e.else_, scope, spec)
            if a != b:
                raise _TypeError(f"branches of if-expression have types {a} and {b}")
            return a
        if isinstance(e, FnApp):
            if e.name == "valueOf":
                if not spec:
                    raise _TypeError("valueOf is only allowed in specifications")
                if len(e.args) != 1 or not isinstance(e.args[0], (Var, FieldRef)):
                    raise _TypeError("valueOf applies to a single future-typed name")
                t = self._pure(e.args[0], scope, spec)
                if not is_future_type(t):
                    raise _TypeError(f"valueOf applied to non-future of type {t}")
                return future_payload(t)
            fn = self.m.function(e.name)
            if fn is None:
                raise _TypeError(f"unknown function '{e.name}'")
            if len(fn.params) != len(e.args):
                raise _TypeError(f"'{e.name}' expects {len(fn.params)} arguments")
            for p, a in zip(fn.params, e.args):
                at = self._pure(a, scope, spec)
                if not self.env.assignable(at, p.type):
                    raise _TypeError(f"argument of type {at} passed for {p.type} parameter of '{e.name}'")
            return fn.ret
        if isinstance(e, (AsyncCall, SyncCall, Get, New)):
            raise _TypeError(f"side-effecting expression {print_expr(e)} in nested position")
        raise _TypeError(f"unsupported expression {e!r}")

    def rhs(self, e, scope: dict) -> Optional[str]:
        try:
            return self._rhs(e, scope)
        except _TypeError as exc:
            self.report(str(exc))
            return None

    def _rhs(self, e, scope: dict) -> str:
        if isinstance(e, (AsyncCall, SyncCall)):
            tt = self._pure(e.target, scope, False)
            sig = self.env.lookup_method(tt, e.method)
            if sig is None:
                raise _TypeError(f"type {tt} has no method '{e.method}'")
            ret, ptypes = sig
            if len(ptypes) != len(e.args):
                raise _TypeError(f"'{e.method}' expects {len(ptypes)} arguments, got {len(e.args)}")
            for pt, a in zip(ptypes, e.args):
                at = self._pure(a, scope, False)
                if not self.env.assignable(at, pt):
                    raise _TypeError(f"argument of type {at} passed for {pt} parameter of '{e.method}'")
            return f"Fut<{ret}>" if isinstance(e, AsyncCall) else ret
        if isinstance(e, Get):
            t = self._pure(e.future, scope, False)
            if not is_future_type(t):
                raise _TypeError(f"get on non-future of type {t}")
            return future_payload(t)
        if isinstance(e, New):
            c = self.env.classes.get(e.cls)
            if c is None:
                raise _TypeError(f"unknown class '{e.cls}'")
            if len(c.params) != len(e.args):
                raise _TypeError(f"class '{e.cls}' expects {len(c.params)} arguments")
            for p, a in zip(c.params, e.args):
                at = self._pure(a, scope, False)
                if not self.env.assignable(at, p.type):
                    raise _TypeError(f"argument of type {at} passed for {p.type} parameter of '{e.cls}'")
            return c.name
        return self._pure(e, scope, False)

    # -- statements --
    def stmts(self, body: list, scope: dict, ret: Optional[str]) -> None:
        scope = dict(scope)
        for s in body:
            self.stmt(s, scope, ret)

    def stmt(self, s, scope: dict, ret: Optional[str]) -> None:
        if getattr(s, "loc", None):
            self.loc = s.loc
        if isinstance(s, VarDecl):
            if not self.env.known(s.type):
                self.report(f"unknown type '{s.type}'")
            if s.name in scope and not s.name.startswith("this."):
                self.report(f"variable '{s.name}' is already declared")
            if s.init is not None:
                t = self.rhs(s.init, scope)
                if t is not None and not self.env.assignable(t, s.type):
                    self.report(f"cannot initialize {s.type} '{s.name}' with {t}")
            scope[s.name] = s.type
        elif isinstance(s, Assign):
            dst = self.pure(s.target, scope)
            t = self.rhs(s.value, scope)
            if dst is not None and t is not None and not self.env.assignable(t, dst):
                self.report(f"cannot assign {t} to {print_expr(s.target)} of type {dst}")
        elif isinstance(s, ExprStmt):
            self.rhs(s.value, scope)
        elif isinstance(s, Await):
            if not s.polls:
                self.report("empty await guard", "guard")
            for p in s.polls:
                t = self.pure(p, scope)
                if t is not None and not is_future_type(t):
                    self.report(f"await guard polls {print_expr(p)} of non-future type {t}", "guard")
        elif isinstance(s, If):
            if self.pure(s.cond, scope) not in ("Bool", None):
                self.report("if condition must be Bool")
            self.stmts(s.then, scope, ret)
            if s.else_ is not None:
                self.stmts(s.else_, scope, ret)
        elif isinstance(s, While):
            if self.pure(s.cond, scope) not in ("Bool", None):
                self.report("while condition must be Bool")
            if s.invariant is not None and self.pure(s.invariant, scope, spec=True) not in ("Bool", None):
                self.report("loop invariant must be Bool", "spec")
            self.stmts(s.body, scope, ret)
        elif isinstance(s, Return):
            t = self.rhs(s.value, scope)
            if ret is None:
                self.report("return outside a method")
            elif t is not None and not self.env.assignable(t, ret):
                self.report(f"returning {t} from a method of type {ret}")
        elif isinstance(s, Block):
            self.stmts(s.body, scope, ret)
        elif isinstance(s, Skip):
            pass
        else:
            self.report(f"unknown statement {s!r}")

    # -- declarations --
    def spec(self, e, scope: dict, what: str) -> None:
        t = self.pure(e, scope, spec=True)
        if t is not None and t != "Bool":
            self.report(f"{what} has type {t}, expected Bool", "spec")

    def class_scope(self, c: ClassDecl) -> dict:
        scope = {"this": c.name}
        for p in c.params:
            scope["this." + p.name] = p.type
        for f in c.fields:
            scope["this." + f.name] = f.type
        return scope

    def method(self, c: ClassDecl, m: Method) -> None:
        self.where = f"{c.name}.{m.name}"
        scope = self.class_scope(c)
        for p in m.params:
            if not self.env.known(p.type):
                self.report(f"unknown type '{p.type}'")
            scope[p.name] = p.type
        for s in m.specs:
            sc = dict(scope)
            if s.kind == "Ensures":
                sc["result"] = m.ret
            self.spec(s.expr, sc, s.kind)
        self.stmts(m.body, scope, m.ret)

    def run(self) -> list[Diagnostic]:
        m = self.m
        seen = set()
        for fn in m.functions:
            self.where = f"function {fn.name}"
            scope = {p.name: p.type for p in fn.params}
            t = self.pure(fn.body, scope, spec=True)
            if t is not None and t != fn.ret:
                self.report(f"body has type {t}, declared {fn.ret}")
        for i in m.interfaces:
            if i.name in seen:
                self.report(f"duplicate interface '{i.name}'")
            seen.add(i.name)
            for sig in i.methods:
                self.where = f"{i.name}.{sig.name}"
                scope = {p.name: p.type for p in sig.params}
                for p in sig.params:
                    if not self.env.known(p.type):
                        self.report(f"unknown type '{p.type}'")
                for s in sig.specs:
                    sc = dict(scope)
                    if s.kind == "Ensures":
                        sc["result"] = sig.ret
                    elif s.kind != "Requires":
                        self.report(f"{s.kind} is not allowed on a method signature", "spec")
                    self.spec(s.expr, sc, s.kind)
        cseen = set()
        for c in m.classes:
            self.where = c.name
            self.loc = (0, 0)
            if c.name in cseen:
                self.report(f"duplicate class '{c.name}'")
            cseen.add(c.name)
            for iname in c.implements:
                i = self.env.ifaces.get(iname)
                if i is None:
                    self.report(f"class implements unknown interface '{iname}'")
                    continue
                for sig in i.methods:
                    impl = c.method(sig.name)
                    if impl is None:
                        self.report(f"missing implementation of {iname}.{sig.name}")
                    elif impl.ret != sig.ret or [p.type for p in impl.params] != [p.type for p in sig.params]:
                        self.report(f"{sig.name} does not match its signature in {iname}")
            cs = self.class_scope(c)
            fs = {k: v for k, v in cs.items() if k != "this"}
            for s in c.specs:
                if s.kind not in ("ObjInv", "Requires"):
                    self.report(f"{s.kind} is not allowed on a class", "spec")
                self.spec(s.expr, fs, s.kind)
            for f in c.fields:
                if f.init is not None:
                    t = self.pure(f.init, fs)
                    if t is not None and not self.env.assignable(t, f.type):
                        self.report(f"field '{f.name}' of type {f.type} initialized with {t}")
            for meth in c.methods:
                self.method(c, meth)
        self.where = "main block"
        self.stmts(m.main, {}, None)
        return self.diags


def typecheck(model: AbsModel) -> list[Diagnostic]:
    return _Checker(model).run()
