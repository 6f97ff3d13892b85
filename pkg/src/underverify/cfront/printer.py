"""Pretty-printer for the C AST; output re-parses to a structurally equal AST."""

from __future__ import annotations

from .ast import (
    Assign,
    BinOp,
    Call,
    CFunction,
    Compound,
    CProgram,
    Expr,
    ExprStmt,
    If,
    IntLit,
    LocalDecl,
    Name,
    ResultRef,
    Return,
    Stmt,
    Unary,
    While,
)


def print_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Name):
        return e.name
    if isinstance(e, ResultRef):
        return "\\result"
    if isinstance(e, Assign):
        return f"({e.target} {e.op} {print_expr(e.value)})"
    if isinstance(e, BinOp):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    if isinstance(e, Unary):
        return f"({e.op}{print_expr(e.operand)})"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(print_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def _top(e: Expr) -> str:
    # drop the outermost parentheses where the grammar allows it
    s = print_expr(e)
    if isinstance(e, (BinOp, Assign)):
        return s[1:-1]
    return s


def print_stmt(s: Stmt, indent: int = 1) -> list[str]:
    pad = "    " * indent
    if isinstance(s, ExprStmt):
        return [f"{pad}{_top(s.expr)};"]
    if isinstance(s, LocalDecl):
        head = ("const " if s.const else "") + s.ctype + " " + s.name
        if s.init is not None:
            head += " = " + _top(s.init)
        return [pad + head + ";"]
    if isinstance(s, Return):
        return [pad + ("return;" if s.value is None else f"return {_top(s.value)};")]
    if isinstance(s, If):
        out = [f"{pad}if ({_top(s.cond)})"] + _child(s.then, indent)
        if s.else_ is not None:
            out += [f"{pad}else"] + _child(s.else_, indent)
        return out
    if isinstance(s, While):
        out = []
        if s.invariant is not None:
            out.append(f"{pad}//@ loop invariant {_top(s.invariant)};")
        out.append(f"{pad}while ({_top(s.cond)})")
        return out + _child(s.body, indent)
    if isinstance(s, Compound):
        out = [pad + "{"]
        for item in s.items:
            out += print_stmt(item, indent + 1)
        return out + [pad + "}"]
    raise TypeError(f"not a statement: {s!r}")


def _child(s: Stmt, indent: int) -> list[str]:
    return print_stmt(s, indent if isinstance(s, Compound) else indent + 1)


def print_function(fn: CFunction) -> list[str]:
    out = []
    if fn.contract is not None:
        clauses = []
        if fn.contract.requires is not None:
            clauses.append(f"requires {_top(fn.contract.requires)};")
        if fn.contract.ensures is not None:
            clauses.append(f"ensures {_top(fn.contract.ensures)};")
        clauses += [f"assigns {a};" for a in fn.contract.assigns]
        if clauses:
            out.append("/*@ " + " ".join(clauses) + " @*/")
    params = ", ".join(("const " if p.const else "") + f"{p.ctype} {p.name}" for p in fn.params) or "void"
    out.append(f"{fn.return_kind} {fn.name}({params})")
    return out + print_stmt(fn.body, 0)


def print_program(program: CProgram) -> str:
    out = []
    for d in program.model_fn_defs:
        out.append("//@ ABS " + d)
    for g in program.globals:
        decl = ("const " if g.const else "") + f"{g.ctype} {g.name}"
        if g.initial:
            decl += f" = {g.initial}"
        out.append(decl + ";")
        if g.strong_invariant is not None:
            out.append(f"//@ strong global invariant {_top(g.strong_invariant)};")
            out.append("")
    for fn in program.functions:
        out += print_function(fn)
        out.append("")
    return "\n".join(out) + "\n"
