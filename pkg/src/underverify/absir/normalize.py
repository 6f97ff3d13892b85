"""Normalization applied after parsing, before verification.

* ``e.m(args)`` is split into an async call and a get assigned to a variable.
* Bare ``e.get;``, ``e!m(..);`` and ``new C(..);`` are bound to fresh locals.
* ``return <effectful>`` first binds the value to a fresh local.
* Unit methods get a trailing ``return unit;``.
* A class-method Requires that mentions only parameters moves to the
  interface signature.

The pass is idempotent.
"""

from __future__ import annotations

import copy
import re

from .ir import (
    AbsModel,
    Assign,
    AsyncCall,
    Block,
    ExprStmt,
    FieldRef,
    Get,
    If,
    Method,
    New,
    Return,
    SyncCall,
    This,
    UnitC,
    Var,
    VarDecl,
    While,
    sub_exprs,
    walk_stmts,
)
from .typecheck import _Checker

_TMP = re.compile(r"^tmp_(\d+)$")


class _Fresh:
    def __init__(self, names):
        self.n = max((int(m.group(1)) for m in map(_TMP.match, names) if m), default=0)

    def __call__(self) -> str:
        self.n += 1
        return f"tmp_{self.n}"


def _names(params, body) -> list[str]:
    out = [p.name for p in params]
    for s in walk_stmts(body):
        if isinstance(s, VarDecl):
            out.append(s.name)
    return out


class _Norm:
    def __init__(self, model: AbsModel):
        self.model = model
        self.chk = _Checker(model)

    def type_of(self, rhs, scope) -> str:
        t = self.chk.rhs(rhs, scope)
        if t is None:
            raise ValueError(f"cannot normalize ill-typed expression {rhs!r}")
        return t

    def stmts(self, body: list, scope: dict, fresh: _Fresh) -> list:
        scope = dict(scope)
        out = []
        for s in body:
            out += self.stmt(s, scope, fresh)
        return out

    def split_sync(self, e: SyncCall, scope: dict, fresh: _Fresh):
        call = AsyncCall(e.target, e.method, e.args)
        ft = self.type_of(call, scope)
        f = fresh()
        scope[f] = ft
        return [VarDecl(ft, f, call)], Get(Var(f))

    def stmt(self, s, scope: dict, fresh: _Fresh) -> list:
        loc = getattr(s, "loc", None)
        if isinstance(s, VarDecl):
            pre = []
            init = s.init
            if isinstance(init, SyncCall):
                pre, init = self.split_sync(init, scope, fresh)
            scope[s.name] = s.type
            return pre + [VarDecl(s.type, s.name, init, loc=loc)]
        if isinstance(s, Assign):
            if isinstance(s.value, SyncCall):
                pre, g = self.split_sync(s.value, scope, fresh)
                return pre + [Assign(s.target, g, loc=loc)]
            return [s]
        if isinstance(s, ExprStmt):
            v = s.value
            pre = []
            if isinstance(v, SyncCall):
                pre, v = self.split_sync(v, scope, fresh)
            if isinstance(v, (Get, AsyncCall, New)):
                t = self.type_of(v, scope)
                name = fresh()
                scope[name] = t
                return pre + [VarDecl(t, name, v, loc=loc)]
            return pre + [ExprStmt(v, loc=loc)]
        if isinstance(s, Return):
            v = s.value
            pre = []
            if isinstance(v, SyncCall):
                pre, v = self.split_sync(v, scope, fresh)
            if isinstance(v, (Get, AsyncCall, New)):
                t = self.type_of(v, scope)
                name = fresh()
                scope[name] = t
                return pre + [VarDecl(t, name, v, loc=loc), Return(Var(name), loc=loc)]
            return pre + [Return(v, loc=loc)]
        if isinstance(s, If):
            then = self.stmts(s.then, scope, fresh)
            else_ = self.stmts(s.else_, scope, fresh) if s.else_ is not None else None
            return [If(s.cond, then, else_, loc=loc)]
        if isinstance(s, While):
            return [While(s.cond, self.stmts(s.body, scope, fresh), s.invariant, loc=loc)]
        if isinstance(s, Block):
            return [Block(self.stmts(s.body, scope, fresh), loc=loc)]
        return [s]

    def method(self, cls, m: Method) -> Method:
        scope = self.chk.class_scope(cls)
        for p in m.params:
            scope[p.name] = p.type
        body = self.stmts(m.body, scope, _Fresh(_names(m.params, m.body)))
        if m.ret == "Unit" and not (body and isinstance(body[-1], Return)):
            body.append(Return(UnitC()))
        return Method(m.ret, m.name, m.params, body, list(m.specs))

    def run(self) -> AbsModel:
        out = copy.deepcopy(self.model)
        self.model = out
        self.chk = _Checker(out)
        for c in out.classes:
            c.methods = [self.method(c, m) for m in c.methods]
            for m in c.methods:
                sig = out.signature(c, m.name)
                if sig is None:
                    continue
                keep = []
                params = {p.name for p in m.params}
                for s in m.specs:
                    if s.kind == "Requires" and _param_only(s.expr, params):
                        if s not in sig.specs:
                            sig.specs.append(s)
                    else:
                        keep.append(s)
                m.specs = keep
        out.main = self.stmts(out.main, {}, _Fresh(_names([], out.main)))
        return out


def _param_only(e, params: set) -> bool:
    for sub in sub_exprs(e):
        if isinstance(sub, (FieldRef, This)):
            return False
        if isinstance(sub, Var) and sub.name not in params:
            return False
    return True


def normalize(model: AbsModel) -> AbsModel:
    """Return a normalized copy of ``model``."""
    return _Norm(model).run()
