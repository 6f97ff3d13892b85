"""Textual form of models, in the surface syntax the parser accepts.

Binary operators are always parenthesized, ``( a + b )``, so printing is
unambiguous and parse(print(m)) == m.
"""

from __future__ import annotations

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
    Interface,
    Method,
    MethodSig,
    New,
    NullC,
    Return,
    Skip,
    Spec,
    SyncCall,
    This,
    Un,
    UnitC,
    Var,
    VarDecl,
    While,
)

IND = "  "


def print_expr(e, nested: bool = False) -> str:
    if isinstance(e, IntC):
        return str(e.value)
    if isinstance(e, BoolC):
        return "True" if e.value else "False"
    if isinstance(e, NullC):
        return "null"
    if isinstance(e, UnitC):
        return "unit"
    if isinstance(e, This):
        return "this"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldRef):
        return f"this.{e.name}"
    if isinstance(e, Bin):
        return f"( {print_expr(e.left, True)} {e.op} {print_expr(e.right, True)} )"
    if isinstance(e, Un):
        return f"{e.op}{print_expr(e.operand, True)}"
    if isinstance(e, IfE):
        s = f"if {print_expr(e.cond, True)} then {print_expr(e.then, True)} else {print_expr(e.else_, True)}"
        return f"( {s} )" if nested else s
    if isinstance(e, FnApp):
        return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, AsyncCall):
        return f"{print_expr(e.target, True)}!{e.method}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, SyncCall):
        return f"{print_expr(e.target, True)}.{e.method}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, Get):
        return f"{print_expr(e.future, True)}.get"
    if isinstance(e, New):
        return f"new {e.cls}({', '.join(print_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def print_spec(s: Spec) -> str:
    return f"[Spec : {s.kind}({print_expr(s.expr)})]"


def print_stmts(stmts, depth: int) -> list[str]:
    out = []
    for s in stmts:
        out += print_stmt(s, depth)
    return out


def print_stmt(s, depth: int) -> list[str]:
    pad = IND * depth
    if isinstance(s, VarDecl):
        if s.init is None:
            return [f"{pad}{s.type} {s.name};"]
        return [f"{pad}{s.type} {s.name} = {print_expr(s.init)};"]
    if isinstance(s, Assign):
        return [f"{pad}{print_expr(s.target)} = {print_expr(s.value)};"]
    if isinstance(s, ExprStmt):
        return [f"{pad}{print_expr(s.value)};"]
    if isinstance(s, Await):
        return [f"{pad}await " + " & ".join(print_expr(p, True) + "?" for p in s.polls) + ";"]
    if isinstance(s, Return):
        return [f"{pad}return {print_expr(s.value)};"]
    if isinstance(s, Skip):
        return [f"{pad}skip;"]
    if isinstance(s, Block):
        return [pad + "{"] + print_stmts(s.body, depth + 1) + [pad + "}"]
    if isinstance(s, If):
        out = [f"{pad}if ( {print_expr(s.cond)} ){{"] + print_stmts(s.then, depth + 1)
        if s.else_ is not None:
            out += [pad + "} else {"] + print_stmts(s.else_, depth + 1)
        return out + [pad + "}"]
    if isinstance(s, While):
        out = []
        if s.invariant is not None:
            out.append(f"{pad}[Spec : WhileInv({print_expr(s.invariant)})]")
        out.append(f"{pad}while ( {print_expr(s.cond)} ){{")
        return out + print_stmts(s.body, depth + 1) + [pad + "}"]
    raise TypeError(f"not a statement: {s!r}")


def _params(params) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


def print_sig(m: MethodSig, depth: int = 1) -> list[str]:
    pad = IND * depth
    return [pad + print_spec(s) for s in m.specs] + [f"{pad}{m.ret} {m.name}({_params(m.params)});"]


def print_method(m: Method, depth: int = 1) -> list[str]:
    pad = IND * depth
    out = [pad + print_spec(s) for s in m.specs]
    out.append(f"{pad}{m.ret} {m.name}({_params(m.params)}){{")
    out += print_stmts(m.body, depth + 1)
    return out + [pad + "}"]


def print_interface(i: Interface) -> list[str]:
    out = [f"interface {i.name} {{"]
    for m in i.methods:
        out += print_sig(m)
    return out + ["}"]


def print_class(c: ClassDecl) -> list[str]:
    out = [print_spec(s) for s in c.specs]
    head = f"class {c.name}"
    if c.params:
        head += f"({_params(c.params)})"
    if c.implements:
        head += " implements " + ", ".join(c.implements)
    out.append(head + " {")
    for f in c.fields:
        init = f" = {print_expr(f.init)}" if f.init is not None else ""
        out.append(f"{IND}{f.type} {f.name}{init};")
    for m in c.methods:
        out += print_method(m)
    return out + ["}"]


def print_model(model: AbsModel) -> str:
    out = [f"module {model.module};", ""]
    for d in model.data_decls:
        out += [d, ""]
    for fn in model.functions:
        out += [f"def {fn.ret} {fn.name}({_params(fn.params)}) =", f"{IND}{print_expr(fn.body)};", ""]
    # Interleave so that each class follows the interface it implements,
    # while keeping both declaration orders intact.
    pos = {i.name: k for k, i in enumerate(model.interfaces)}
    printed = 0
    for c in model.classes:
        upto = max((pos[n] + 1 for n in c.implements if n in pos), default=0)
        while printed < upto:
            out += print_interface(model.interfaces[printed])
            printed += 1
        out += print_class(c) + [""]
    for i in model.interfaces[printed:]:
        out += print_interface(i) + [""]
    if model.main:
        out += ["{"] + print_stmts(model.main, 1) + ["}"]
    else:
        out.append("{ }")
    return "\n".join(out) + "\n"
