"""First-order terms with explicit updates.

Formulas are terms of sort Bool.  Updates are explicit substitutions:
``{v := t}``, parallel composition ``U1 || U2`` (the right side wins on a
clash) and application ``{U1}U2``.  :func:`apply_updates` pushes updates into
terms until none remain, simplifying ``select`` over ``store`` on distinct
field constants on the way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

INT, BOOL, UNIT, REF, FIELD = "Int", "Bool", "Unit", "Ref", "Field"


def heap_sort(value_sort: str) -> str:
    return f"Heap_{value_sort}"


def fut_sort(value_sort: str) -> str:
    return f"Fut_{value_sort}"


@dataclass(frozen=True)
class Sym:
    """A program variable (kind ``pv``), rigid constant (``const``), field
    identifier (``field``) or bound logical variable (``logic``)."""

    name: str
    sort: str
    kind: str = "pv"


@dataclass(frozen=True)
class Const:
    value: object  # int, bool, or "null"/"unit"
    sort: str


@dataclass(frozen=True)
class App:
    op: str
    args: tuple
    sort: str


@dataclass(frozen=True)
class Exists:
    var: Sym
    body: "Term"

    @property
    def sort(self) -> str:
        return BOOL


@dataclass(frozen=True)
class UpdApp:
    update: "Update"
    term: "Term"

    @property
    def sort(self) -> str:
        return self.term.sort


Term = Union[Sym, Const, App, Exists, UpdApp]


@dataclass(frozen=True)
class Elementary:
    var: Sym
    value: Term


@dataclass(frozen=True)
class Parallel:
    left: "Update"
    right: "Update"


@dataclass(frozen=True)
class Compose:
    """``{outer}inner``: the update ``inner`` evaluated after ``outer``."""

    outer: "Update"
    inner: "Update"


Update = Union[Elementary, Parallel, Compose]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)
NULL = Const("null", REF)
UNIT_V = Const("unit", UNIT)


def IntV(v: int) -> Const:
    return Const(int(v), INT)


# -- smart constructors --------------------------------------------------------


def and_(*xs) -> Term:
    flat = []
    for x in xs:
        if isinstance(x, App) and x.op == "and":
            flat.extend(x.args)
        elif x != TRUE:
            flat.append(x)
    if any(x == FALSE for x in flat):
        return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), BOOL)


def or_(*xs) -> Term:
    flat = [x for x in xs if x != FALSE]
    if any(x == TRUE for x in flat):
        return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), BOOL)


def not_(x: Term) -> Term:
    if x == TRUE:
        return FALSE
    if x == FALSE:
        return TRUE
    if isinstance(x, App) and x.op == "not":
        return x.args[0]
    return App("not", (x,), BOOL)


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    return App("=>", (a, b), BOOL)


def eq(a: Term, b: Term) -> Term:
    return App("=", (a, b), BOOL)


def select(heap: Term, f: Sym) -> Term:
    vs = heap.sort[len("Heap_"):]
    return App("select", (heap, f), vs)


def store(heap: Term, f: Sym, v: Term) -> Term:
    return App("store", (heap, f, v), heap.sort)


def val(fut: Term) -> Term:
    vs = fut.sort[len("Fut_"):]
    return App(f"val_{vs}", (fut,), vs)


# -- substitution ----------------------------------------------------------------


def free_syms(t: Term) -> set:
    if isinstance(t, Sym):
        return {t}
    if isinstance(t, Const):
        return set()
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= free_syms(a)
        return out
    if isinstance(t, Exists):
        return free_syms(t.body) - {t.var}
    if isinstance(t, UpdApp):
        return free_syms(apply_updates(t))
    raise TypeError(t)


def as_subst(u: Update) -> dict:
    """The simultaneous substitution an update denotes."""
    if isinstance(u, Elementary):
        return {u.var: u.value}
    if isinstance(u, Parallel):
        out = dict(as_subst(u.left))
        out.update(as_subst(u.right))
        return out
    if isinstance(u, Compose):
        outer = as_subst(u.outer)
        inner = {k: substitute(v, outer) for k, v in as_subst(u.inner).items()}
        out = dict(outer)
        out.update(inner)
        return out
    raise TypeError(u)


_fresh_logic = [0]


def substitute(t: Term, sub: dict) -> Term:
    """Capture-avoiding simultaneous substitution, with select/store simplification."""
    if not sub:
        return simplify(t) if isinstance(t, App) else t
    if isinstance(t, Sym):
        return sub.get(t, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return _mk(t.op, tuple(substitute(a, sub) for a in t.args), t.sort)
    if isinstance(t, Exists):
        inner = {k: v for k, v in sub.items() if k != t.var}
        clash = any(t.var in free_syms(v) for v in inner.values())
        var, body = t.var, t.body
        if clash:
            _fresh_logic[0] += 1
            var = Sym(f"{t.var.name}_{_fresh_logic[0]}", t.var.sort, "logic")
            body = substitute(body, {t.var: var})
        return Exists(var, substitute(body, inner))
    if isinstance(t, UpdApp):
        return substitute(apply_updates(t), sub)
    raise TypeError(t)


def apply_updates(t: Term) -> Term:
    """Eliminate every update application in ``t``."""
    if isinstance(t, UpdApp):
        return substitute(apply_updates(t.term), as_subst(t.update))
    if isinstance(t, App):
        return _mk(t.op, tuple(apply_updates(a) for a in t.args), t.sort)
    if isinstance(t, Exists):
        return Exists(t.var, apply_updates(t.body))
    return t


def _mk(op: str, args: tuple, sort: str) -> Term:
    return simplify(App(op, args, sort))


def simplify(t: App) -> Term:
    """Local rewrites: select over store, boolean constants."""
    if t.op == "select":
        heap, f = t.args
        while isinstance(heap, App) and heap.op == "store":
            h2, g, v = heap.args
            if g == f:
                return v
            if isinstance(g, Sym) and g.kind == "field" and isinstance(f, Sym) and f.kind == "field":
                heap = h2
                continue
            break
        return App("select", (heap, f), t.sort)
    if t.op == "and":
        return and_(*t.args)
    if t.op == "or":
        return or_(*t.args)
    if t.op == "not":
        return not_(t.args[0])
    return t


@dataclass
class Sequent:
    """Represents ``/\\ gamma -> \\/ delta``."""

    gamma: list
    delta: list
    label: str = ""

    def formula(self) -> Term:
        return implies(and_(*self.gamma), or_(*self.delta))


def pretty(t: Term) -> str:
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Const):
        if t.sort == BOOL:
            return "true" if t.value else "false"
        return str(t.value)
    if isinstance(t, App):
        infix = {"+", "-", "*", "/", "%", "<", ">", "<=", ">=", "=", "and", "or", "=>"}
        if t.op in infix and len(t.args) >= 2:
            sep = {"and": " & ", "or": " | ", "=>": " -> "}.get(t.op, f" {t.op} ")
            return "(" + sep.join(pretty(a) for a in t.args) + ")"
        if t.op == "not":
            return "!" + pretty(t.args[0])
        return f"{t.op}(" + ", ".join(pretty(a) for a in t.args) + ")"
    if isinstance(t, Exists):
        return f"(exists {t.var.name}:{t.var.sort}. {pretty(t.body)})"
    if isinstance(t, UpdApp):
        return f"{{{_pretty_update(t.update)}}}{pretty(t.term)}"
    return repr(t)


def _pretty_update(u: Update) -> str:
    if isinstance(u, Elementary):
        return f"{u.var.name} := {pretty(u.value)}"
    if isinstance(u, Parallel):
        return f"{_pretty_update(u.left)} || {_pretty_update(u.right)}"
    return f"{{{_pretty_update(u.outer)}}}({_pretty_update(u.inner)})"
