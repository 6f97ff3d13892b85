"""Active-object model IR.

Types are plain strings: ``Int``, ``Bool``, ``Unit``, ``Fut<Int>``,
``Fut<Unit>`` or an interface/class name.  Source positions are kept out of
equality so that parse(print(m)) == m holds structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Loc = Optional[tuple[int, int]]


def _loc():
    return field(default=None, compare=False, repr=False)


# -- pure expressions --------------------------------------------------------


@dataclass(frozen=True)
class IntC:
    value: int


@dataclass(frozen=True)
class BoolC:
    value: bool


@dataclass(frozen=True)
class NullC:
    pass


@dataclass(frozen=True)
class UnitC:
    pass


@dataclass(frozen=True)
class This:
    pass


@dataclass(frozen=True)
class Var:
    """A local variable, parameter, or (in specs) ``result``."""

    name: str


@dataclass(frozen=True)
class FieldRef:
    """``this.name``."""

    name: str


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Un:
    op: str  # "!" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class IfE:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"


@dataclass(frozen=True)
class FnApp:
    """Application of a model function (``fib``) or ``valueOf`` in specs."""

    name: str
    args: tuple["Expr", ...]


Expr = Union[IntC, BoolC, NullC, UnitC, This, Var, FieldRef, Bin, Un, IfE, FnApp]

# -- effectful right-hand sides ---------------------------------------------


@dataclass(frozen=True)
class AsyncCall:
    target: Expr
    method: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class SyncCall:
    """``e.m(args)``: sugar for an async call followed by a get."""

    target: Expr
    method: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Get:
    future: Expr


@dataclass(frozen=True)
class New:
    cls: str
    args: tuple[Expr, ...]


Rhs = Union[Expr, AsyncCall, SyncCall, Get, New]

# -- statements -------------------------------------------------------------


@dataclass
class VarDecl:
    type: str
    name: str
    init: Optional[Rhs]
    loc: Loc = _loc()


@dataclass
class Assign:
    target: Union[Var, FieldRef]
    value: Rhs
    loc: Loc = _loc()


@dataclass
class ExprStmt:
    """A right-hand side evaluated for its effect (bare get, call)."""

    value: Rhs
    loc: Loc = _loc()


@dataclass
class Await:
    polls: list[Expr]  # each polled with `?`
    loc: Loc = _loc()


@dataclass
class If:
    cond: Expr
    then: list["Stmt"]
    else_: Optional[list["Stmt"]] = None
    loc: Loc = _loc()


@dataclass
class While:
    cond: Expr
    body: list["Stmt"]
    invariant: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass
class Return:
    value: Expr
    loc: Loc = _loc()


@dataclass
class Skip:
    loc: Loc = _loc()


@dataclass
class Block:
    body: list["Stmt"]
    loc: Loc = _loc()


Stmt = Union[VarDecl, Assign, ExprStmt, Await, If, While, Return, Skip, Block]

# -- declarations ------------------------------------------------------------


@dataclass
class Spec:
    kind: str  # ObjInv | Ensures | Requires | WhileInv
    expr: Expr


@dataclass
class Param:
    type: str
    name: str


@dataclass
class MethodSig:
    ret: str
    name: str
    params: list[Param]
    specs: list[Spec] = field(default_factory=list)

    def requires(self) -> list[Expr]:
        return [s.expr for s in self.specs if s.kind == "Requires"]

    def ensures(self) -> list[Expr]:
        return [s.expr for s in self.specs if s.kind == "Ensures"]


@dataclass
class Method:
    ret: str
    name: str
    params: list[Param]
    body: list[Stmt]
    specs: list[Spec] = field(default_factory=list)

    def signature(self) -> MethodSig:
        return MethodSig(self.ret, self.name, list(self.params), [])


@dataclass
class Interface:
    name: str
    methods: list[MethodSig] = field(default_factory=list)

    def method(self, name: str) -> Optional[MethodSig]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass
class FieldDecl:
    type: str
    name: str
    init: Optional[Expr] = None


@dataclass
class ClassDecl:
    name: str
    params: list[Param]
    implements: list[str]
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[Method] = field(default_factory=list)
    specs: list[Spec] = field(default_factory=list)

    def method(self, name: str) -> Optional[Method]:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def field_names(self) -> list[str]:
        return [p.name for p in self.params] + [f.name for f in self.fields]

    def field_type(self, name: str) -> Optional[str]:
        for p in self.params:
            if p.name == name:
                return p.type
        for f in self.fields:
            if f.name == name:
                return f.type
        return None

    def creation_requires(self) -> list[Expr]:
        return [s.expr for s in self.specs if s.kind == "Requires"]

    def invariants(self) -> list[Expr]:
        return [s.expr for s in self.specs if s.kind == "ObjInv"]


@dataclass
class FunctionDef:
    ret: str
    name: str
    params: list[Param]
    body: Expr


SPEC_DATA = "data Spec = ObjInv(Bool) | Ensures(Bool) | Requires(Bool) | WhileInv(Bool);"


@dataclass
class AbsModel:
    module: str = "M"
    data_decls: list[str] = field(default_factory=lambda: [SPEC_DATA])
    functions: list[FunctionDef] = field(default_factory=list)
    interfaces: list[Interface] = field(default_factory=list)
    classes: list[ClassDecl] = field(default_factory=list)
    main: list[Stmt] = field(default_factory=list)

    def interface(self, name: str) -> Optional[Interface]:
        for i in self.interfaces:
            if i.name == name:
                return i
        return None

    def class_(self, name: str) -> Optional[ClassDecl]:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def function(self, name: str) -> Optional[FunctionDef]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def implementers(self, iface: str) -> list[ClassDecl]:
        return [c for c in self.classes if iface in c.implements or c.name == iface]

    def signature(self, cls: ClassDecl, method: str) -> Optional[MethodSig]:
        """Interface signature that class method ``method`` implements."""
        for iname in cls.implements:
            i = self.interface(iname)
            if i is not None and i.method(method) is not None:
                return i.method(method)
        return None


# -- traversal helpers -------------------------------------------------------


def sub_exprs(e):
    """Pre-order walk over an expression or right-hand side."""
    yield e
    if isinstance(e, Bin):
        yield from sub_exprs(e.left)
        yield from sub_exprs(e.right)
    elif isinstance(e, Un):
        yield from sub_exprs(e.operand)
    elif isinstance(e, IfE):
        yield from sub_exprs(e.cond)
        yield from sub_exprs(e.then)
        yield from sub_exprs(e.else_)
    elif isinstance(e, FnApp):
        for a in e.args:
            yield from sub_exprs(a)
    elif isinstance(e, (AsyncCall, SyncCall)):
        yield from sub_exprs(e.target)
        for a in e.args:
            yield from sub_exprs(a)
    elif isinstance(e, Get):
        yield from sub_exprs(e.future)
    elif isinstance(e, New):
        for a in e.args:
            yield from sub_exprs(a)


def walk_stmts(stmts):
    """Pre-order walk over a statement list, descending into nested bodies."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            if s.else_ is not None:
                yield from walk_stmts(s.else_)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)
        elif isinstance(s, Block):
            yield from walk_stmts(s.body)


def stmt_rhs(s) -> list:
    """Expressions owned directly by a statement."""
    if isinstance(s, VarDecl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        return [s.target, s.value]
    if isinstance(s, ExprStmt):
        return [s.value]
    if isinstance(s, Await):
        return list(s.polls)
    if isinstance(s, (If, While)):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value]
    return []


def is_future_type(t: str) -> bool:
    return t.startswith("Fut<") and t.endswith(">")


def future_payload(t: str) -> str:
    return t[4:-1]


def conj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolC(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = Bin("&&", out, e)
    return out
