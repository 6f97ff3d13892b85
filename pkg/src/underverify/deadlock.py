"""Structural deadlock analysis.

A method with no ``await`` and no ``get`` cannot take part in a dependency
cycle.  From there a fixpoint adds methods whose synchronization is only on
futures they created themselves:

* an awaited future must come from an in-body call whose every possible
  target is synchronization-free;
* a read future (``get``) must come from an in-body call whose every
  possible target is already free, or whose receiver is an object freshly
  created in the same body without being handed ``this``.

Everything else is reported as unresolved with a reason.  Calls through an
interface type resolve to every implementing class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .absir.ir import (
    AbsModel,
    Assign,
    AsyncCall,
    Await,
    ClassDecl,
    ExprStmt,
    FieldRef,
    Get,
    Method,
    New,
    Return,
    This,
    Var,
    VarDecl,
    is_future_type,
    sub_exprs,
    walk_stmts,
)


@dataclass
class DeadlockReport:
    free_methods: set = field(default_factory=set)
    unresolved_methods: dict = field(default_factory=dict)  # "C.m" -> reason

    def lines(self) -> list[str]:
        return [f"{m}: {r}" for m, r in sorted(self.unresolved_methods.items())]


def _rhs_of(s):
    if isinstance(s, VarDecl):
        return s.name, s.init
    if isinstance(s, Assign) and isinstance(s.target, Var):
        return s.target.name, s.value
    return None, None


def _gets(stmts):
    for s in walk_stmts(stmts):
        for e in _owned(s):
            for sub in sub_exprs(e):
                if isinstance(sub, Get):
                    yield sub.future


def _owned(s):
    if isinstance(s, VarDecl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        return [s.value]
    if isinstance(s, (ExprStmt, Return)):
        return [s.value]
    return []


class _Analysis:
    def __init__(self, model: AbsModel):
        self.model = model
        self.methods: dict[str, tuple[ClassDecl, Method]] = {}
        for c in model.classes:
            for m in c.methods:
                self.methods[f"{c.name}.{m.name}"] = (c, m)

    def static_type(self, c: ClassDecl, m: Method, e) -> str | None:
        if isinstance(e, This):
            return c.name
        if isinstance(e, FieldRef):
            return c.field_type(e.name)
        if isinstance(e, Var):
            for p in m.params:
                if p.name == e.name:
                    return p.type
            for s in walk_stmts(m.body):
                if isinstance(s, VarDecl) and s.name == e.name:
                    return s.type
            return c.field_type(e.name)
        return None

    def targets(self, c: ClassDecl, m: Method, call: AsyncCall) -> list[str]:
        t = self.static_type(c, m, call.target)
        if t is None:
            return []
        if self.model.interface(t) is not None:
            classes = [k for k in self.model.classes if t in k.implements]
        else:
            classes = [k for k in self.model.classes if k.name == t]
        return [f"{k.name}.{call.method}" for k in classes if k.method(call.method) is not None]

    def sync_free(self, m: Method) -> bool:
        if any(isinstance(s, Await) for s in walk_stmts(m.body)):
            return False
        return not any(True for _ in _gets(m.body))

    def definitions(self, m: Method) -> dict:
        """Variable -> list of right-hand sides assigned to it in the body."""
        out: dict = {}
        for s in walk_stmts(m.body):
            name, rhs = _rhs_of(s)
            if name is not None:
                out.setdefault(name, []).append(rhs)
        return out

    def check(self, key: str, free: set, sync_free: set) -> str | None:
        """None if the method qualifies, otherwise the reason it does not."""
        c, m = self.methods[key]
        defs = self.definitions(m)
        params = {p.name: p.type for p in m.params}

        def future_sources(e):
            if not isinstance(e, Var):
                return None, f"synchronizes on {type(e).__name__} expression"
            if e.name in params and is_future_type(params[e.name]):
                return None, "takes future parameter"
            srcs = defs.get(e.name, [])
            if not srcs or not all(isinstance(r, AsyncCall) for r in srcs):
                return None, f"synchronizes on future {e.name} not created by a call in the body"
            return srcs, None

        for s in walk_stmts(m.body):
            if not isinstance(s, Await):
                continue
            for poll in s.polls:
                srcs, why = future_sources(poll)
                if why:
                    return why
                for call in srcs:
                    for t in self.targets(c, m, call):
                        if t not in sync_free:
                            return f"awaits future of synchronizing method {t}"
        for fut in _gets(m.body):
            srcs, why = future_sources(fut)
            if why:
                return why
            for call in srcs:
                if self.fresh_receiver(call.target, defs):
                    continue
                for t in self.targets(c, m, call):
                    if t not in free:
                        return f"depends on unresolved method {t}"
        return None

    def fresh_receiver(self, e, defs) -> bool:
        if not isinstance(e, Var):
            return False
        srcs = defs.get(e.name, [])
        if not srcs:
            return False
        for r in srcs:
            if not isinstance(r, New):
                return False
            if any(isinstance(x, This) for a in r.args for x in sub_exprs(a)):
                return False
        return True

    def run(self) -> DeadlockReport:
        sync_free = {k for k, (_, m) in self.methods.items() if self.sync_free(m)}
        free = set(sync_free)
        changed = True
        while changed:
            changed = False
            for k in self.methods:
                if k not in free and self.check(k, free, sync_free) is None:
                    free.add(k)
                    changed = True
        unresolved = {k: self.check(k, free, sync_free) for k in self.methods if k not in free}
        return DeadlockReport(free, unresolved)


def analyze(model: AbsModel) -> DeadlockReport:
    """Compute the structurally deadlock-free methods of a normalized model."""
    return _Analysis(model).run()
