"""AST for the supported C fragment and its ACSL-style annotations.

Source positions are carried in ``loc`` but excluded from equality, so two
parses of equivalent text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Loc = Optional[tuple[int, int]]


def _loc():
    return field(default=None, compare=False, repr=False)


# -- expressions (shared by C code and spec expressions) --------------------


@dataclass
class IntLit:
    value: int
    loc: Loc = _loc()


@dataclass
class Name:
    name: str
    loc: Loc = _loc()


@dataclass
class ResultRef:
    """``\\result`` inside an ensures clause."""

    loc: Loc = _loc()


@dataclass
class Assign:
    target: str
    value: "Expr"
    op: str = "="  # compound forms are parsed only to be rejected
    loc: Loc = _loc()


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = _loc()


@dataclass
class Unary:
    op: str
    operand: "Expr"
    loc: Loc = _loc()


@dataclass
class Call:
    func: str
    args: list["Expr"]
    loc: Loc = _loc()


Expr = Union[IntLit, Name, ResultRef, Assign, BinOp, Unary, Call]

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("<", ">", "<=", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


# -- statements --------------------------------------------------------------


@dataclass
class ExprStmt:
    expr: Expr
    loc: Loc = _loc()


@dataclass
class LocalDecl:
    name: str
    const: bool
    init: Optional[Expr]
    ctype: str = "int"
    loc: Loc = _loc()


@dataclass
class Return:
    value: Optional[Expr]
    loc: Loc = _loc()


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    else_: Optional["Stmt"] = None
    loc: Loc = _loc()


@dataclass
class While:
    cond: Expr
    body: "Stmt"
    invariant: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass
class Compound:
    items: list["Stmt"]
    loc: Loc = _loc()


Stmt = Union[ExprStmt, LocalDecl, Return, If, While, Compound]


# -- top level ---------------------------------------------------------------


@dataclass
class Contract:
    requires: Optional[Expr] = None
    ensures: Optional[Expr] = None
    assigns: list[str] = field(default_factory=list)


@dataclass
class Param:
    name: str
    const: bool = False
    ctype: str = "int"
    loc: Loc = _loc()


@dataclass
class GlobalDecl:
    name: str
    initial: int = 0
    strong_invariant: Optional[Expr] = None
    ctype: str = "int"
    const: bool = False
    loc: Loc = _loc()


@dataclass
class CFunction:
    name: str
    params: list[Param]
    return_kind: str  # "int" | "void" (anything else is flagged by the validator)
    contract: Optional[Contract]
    body: Compound
    loc: Loc = _loc()


@dataclass
class CProgram:
    globals: list[GlobalDecl] = field(default_factory=list)
    functions: list[CFunction] = field(default_factory=list)
    model_fn_defs: list[str] = field(default_factory=list)
    warnings: list = field(default_factory=list, compare=False, repr=False)

    def function(self, name: str) -> Optional[CFunction]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def global_(self, name: str) -> Optional[GlobalDecl]:
        for g in self.globals:
            if g.name == name:
                return g
        return None


def walk_expr(e: Expr):
    """Yield ``e`` and all of its subexpressions, pre-order."""
    yield e
    if isinstance(e, Assign):
        yield from walk_expr(e.value)
    elif isinstance(e, BinOp):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)


def walk_stmt(s: Stmt):
    yield s
    if isinstance(s, If):
        yield from walk_stmt(s.then)
        if s.else_ is not None:
            yield from walk_stmt(s.else_)
    elif isinstance(s, While):
        yield from walk_stmt(s.body)
    elif isinstance(s, Compound):
        for item in s.items:
            yield from walk_stmt(item)


def stmt_exprs(s: Stmt):
    """Top-level expressions owned directly by ``s`` (not nested statements)."""
    if isinstance(s, ExprStmt):
        return [s.expr]
    if isinstance(s, LocalDecl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, (If, While)):
        return [s.cond]
    return []
