"""Cooperative-scheduling interpreter with exhaustive schedule exploration.

Method bodies are compiled to flat instruction lists.  A transition picks
one enabled process and runs it atomically to its next release point (an
``await``), a blocking ``get`` on an unresolved future, or its ``return``.
Object and future identities are derived from the creating process and a
per-process creation counter, so they do not depend on the schedule and
configurations reached along different interleavings compare equal.

Events follow the usual shapes: ``invEv``/``invREv`` for a call and its
activation, ``suspEv``/``suspREv`` for an await and its resumption,
``futEv``/``futREv`` for resolving and reading a future, ``noEv`` for a
local step.  The runtime monitor checks contracts at these events.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .absir.ir import (
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
    New,
    NullC,
    Param,
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
from .errors import UnknownStatementForm, UVError
from .semantics import DivisionByZero, c_div, c_mod

ROOT_CLASS = "<root>"


class Ref(NamedTuple):
    id: int


class FutRef(NamedTuple):
    id: int


UNIT = "unit"


class _Stuck(Exception):
    pass


class EntryError(UVError):
    pass


# -- events ------------------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    kind: str  # invEv invREv suspEv suspREv futEv futREv noEv stuck
    obj: int
    fut: int
    method: str = ""
    args: tuple = ()
    value: object = None
    callee: int = -1
    fields: tuple = ()  # (name, value) snapshot of the object after the event
    locals: tuple = ()  # (name, value) snapshot of the process
    futures: tuple = ()  # (future id, value) for futures referenced by locals
    cls: str = ""  # class of ``obj``
    callee_cls: str = ""

    def format(self) -> str:
        if self.kind == "invEv":
            return f"invEv(o{self.obj}, o{self.callee}, f{self.fut}, {self.method}, {list(self.args)})"
        if self.kind == "invREv":
            return f"invREv(o{self.obj}, f{self.fut}, {self.method}, {list(self.args)})"
        if self.kind in ("futEv", "futREv"):
            return f"{self.kind}(o{self.obj}, f{self.fut}, {_show(self.value)})"
        if self.kind in ("suspEv", "suspREv"):
            return f"{self.kind}(o{self.obj}, f{self.fut}, {self.method})"
        if self.kind == "stuck":
            return f"stuck(o{self.obj}, f{self.fut}, {self.value})"
        return f"noEv(o{self.obj}, f{self.fut})"


def _show(v) -> str:
    if isinstance(v, Ref):
        return f"o{v.id}"
    if isinstance(v, FutRef):
        return f"f{v.id}"
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "True" if v else "False"
    return str(v)


@dataclass(frozen=True)
class Violation:
    event_index: int
    event: str
    annotation: str
    where: str


# -- compilation -----------------------------------------------------------------


@dataclass
class Code:
    cls: str
    method: str
    params: list[str]
    locals: list[str]  # params first
    instrs: list
    ret: str

    def slot(self, name: str) -> int:
        return self.locals.index(name)


class _Compiler:
    def __init__(self, cls: Optional[ClassDecl], name: str, params: list[Param], body: list, ret: str):
        self.cls = cls
        self.names = [p.name for p in params]
        self.instrs: list = []
        self.code = Code(cls.name if cls else ROOT_CLASS, name, list(self.names), self.names, self.instrs, ret)
        self.block(body)
        if not self.instrs or self.instrs[-1][0] != "ret":
            self.instrs.append(("ret", UnitC()))

    def slot(self, name: str) -> int:
        if name not in self.names:
            self.names.append(name)
        return self.names.index(name)

    def dest(self, target):
        if isinstance(target, FieldRef):
            return ("f", target.name)
        if isinstance(target, Var):
            if target.name not in self.names and self.cls is not None and self.cls.field_type(target.name) is not None:
                return ("f", target.name)
            return ("l", self.slot(target.name))
        raise UnknownStatementForm(f"bad assignment target {target!r}")

    def rhs(self, dest, rhs, loc):
        if isinstance(rhs, SyncCall):
            tmp = ("l", self.slot(f"$sync{len(self.instrs)}"))
            self.instrs.append(("call", tmp, rhs.target, rhs.method, rhs.args))
            self.instrs.append(("get", dest, Var(self.names[tmp[1]])))
        elif isinstance(rhs, AsyncCall):
            self.instrs.append(("call", dest, rhs.target, rhs.method, rhs.args))
        elif isinstance(rhs, New):
            self.instrs.append(("new", dest, rhs.cls, rhs.args))
        elif isinstance(rhs, Get):
            self.instrs.append(("get", dest, rhs.future))
        elif dest is None:
            self.instrs.append(("eval", rhs))
        else:
            self.instrs.append(("let", dest, rhs))

    def block(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, VarDecl):
            init = s.init
            if init is None:
                init = _default_expr(s.type)
            self.rhs(("l", self.slot(s.name)), init, s.loc)
        elif isinstance(s, Assign):
            self.rhs(self.dest(s.target), s.value, s.loc)
        elif isinstance(s, ExprStmt):
            v = s.value
            if isinstance(v, (AsyncCall, SyncCall, New, Get)):
                self.rhs(None, v, s.loc)
            else:
                self.instrs.append(("eval", v))
        elif isinstance(s, Await):
            self.instrs.append(("await", tuple(s.polls)))
        elif isinstance(s, If):
            jf = len(self.instrs)
            self.instrs.append(None)
            self.block(s.then)
            if s.else_:
                j = len(self.instrs)
                self.instrs.append(None)
                self.instrs[jf] = ("jf", s.cond, len(self.instrs))
                self.block(s.else_)
                self.instrs[j] = ("j", len(self.instrs))
            else:
                self.instrs[jf] = ("jf", s.cond, len(self.instrs))
        elif isinstance(s, While):
            top = len(self.instrs)
            self.instrs.append(None)
            self.block(s.body)
            self.instrs.append(("j", top))
            self.instrs[top] = ("jf", s.cond, len(self.instrs))
        elif isinstance(s, Return):
            v = s.value
            if isinstance(v, (AsyncCall, SyncCall, New, Get)):
                name = f"$ret{len(self.instrs)}"
                self.rhs(("l", self.slot(name)), v, s.loc)
                v = Var(name)
            self.instrs.append(("ret", v))
        elif isinstance(s, Block):
            self.block(s.body)
        elif isinstance(s, Skip):
            pass
        else:
            raise UnknownStatementForm(f"unsupported statement {s!r}")


def _default_expr(t: str):
    if t == "Int":
        return IntC(0)
    if t == "Bool":
        return BoolC(False)
    if t == "Unit":
        return UnitC()
    return NullC()


# -- configurations -----------------------------------------------------------------


class Proc(NamedTuple):
    fut: int
    code: int  # index into the program's code table
    pc: int
    locals: tuple
    counter: int
    started: bool


class Obj(NamedTuple):
    cls: str
    fields: tuple
    active: Optional[Proc]
    pool: frozenset


@dataclass(frozen=True)
class Config:
    objs: tuple  # sorted ((id, Obj), ...)
    futs: tuple  # sorted ((id, value), ...) resolved futures only

    def obj(self, oid: int) -> Obj:
        return dict(self.objs)[oid]

    def resolved(self) -> dict:
        return dict(self.futs)


class Program:
    """A model compiled for execution, with the interning tables for identities."""

    def __init__(self, model: AbsModel):
        self.model = model
        self.classes = {c.name: c for c in model.classes}
        self.codes: list[Code] = []
        self.code_index: dict = {}
        self.field_index: dict = {}
        for c in model.classes:
            self.field_index[c.name] = {n: i for i, n in enumerate(c.field_names())}
            for m in c.methods:
                self.add_code(_Compiler(c, m.name, m.params, m.body, m.ret).code)
        self.field_index[ROOT_CLASS] = {}
        self.obj_ids: dict = {}
        self.fut_ids: dict = {}
        self.functions = {f.name: f for f in model.functions}
        self.fn_cache: dict = {}

    def add_code(self, code: Code) -> int:
        self.code_index[(code.cls, code.method)] = len(self.codes)
        self.codes.append(code)
        return len(self.codes) - 1

    def intern(self, table: dict, path) -> int:
        if path not in table:
            table[path] = len(table) + 1
        return table[path]

    # -- expression evaluation

    def eval(self, e, loc: dict, fields: dict, this: int, futs: dict):
        if isinstance(e, IntC):
            return e.value
        if isinstance(e, BoolC):
            return e.value
        if isinstance(e, NullC):
            return None
        if isinstance(e, UnitC):
            return UNIT
        if isinstance(e, This):
            return Ref(this)
        if isinstance(e, Var):
            if e.name in loc:
                return loc[e.name]
            if e.name in fields:
                return fields[e.name]
            raise UnknownStatementForm(f"unbound variable {e.name}")
        if isinstance(e, FieldRef):
            return fields[e.name]
        if isinstance(e, Bin):
            op = e.op
            if op == "&&":
                return bool(self.eval(e.left, loc, fields, this, futs)) and bool(self.eval(e.right, loc, fields, this, futs))
            if op == "||":
                return bool(self.eval(e.left, loc, fields, this, futs)) or bool(self.eval(e.right, loc, fields, this, futs))
            a = self.eval(e.left, loc, fields, this, futs)
            b = self.eval(e.right, loc, fields, this, futs)
            return _binop(op, a, b)
        if isinstance(e, Un):
            x = self.eval(e.operand, loc, fields, this, futs)
            return (not x) if e.op == "!" else -x
        if isinstance(e, IfE):
            c = self.eval(e.cond, loc, fields, this, futs)
            return self.eval(e.then if c else e.else_, loc, fields, this, futs)
        if isinstance(e, FnApp):
            args = tuple(self.eval(a, loc, fields, this, futs) for a in e.args)
            if e.name == "valueOf":
                f = args[0]
                if not isinstance(f, FutRef) or f.id not in futs:
                    raise _Stuck("valueOf on an unresolved future")
                return futs[f.id]
            return self.call_function(e.name, args)
        raise UnknownStatementForm(f"cannot evaluate {e!r}")

    def call_function(self, name: str, args: tuple):
        key = (name, args)
        if key in self.fn_cache:
            return self.fn_cache[key]
        fd = self.functions.get(name)
        if fd is None:
            raise UnknownStatementForm(f"unknown function {name}")
        env = {p.name: a for p, a in zip(fd.params, args)}
        v = self.eval(fd.body, env, {}, 0, {})
        self.fn_cache[key] = v
        return v


def _binop(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return c_div(a, b)
    if op == "%":
        return c_mod(a, b)
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b and type(a) is type(b) or (a is None and b is None)
    if op == "!=":
        return not _binop("==", a, b)
    raise UnknownStatementForm(f"operator {op}")


# -- entry points and bootstrap ---------------------------------------------------


@dataclass
class Entry:
    cls: Optional[str]  # None for the main block
    method: str = "main"
    args: tuple = ()

    def describe(self) -> str:
        if self.cls is None:
            return "main"
        return f"{self.cls}.{self.method}({', '.join(map(str, self.args))})"


_ENTRY = re.compile(r"^\s*([A-Za-z_]\w*)(?:\.([A-Za-z_]\w*))?\s*(?:\((.*)\))?\s*$")


def parse_entry(text: str, model: AbsModel) -> Entry:
    """``main``, ``CLASS.METHOD(ARGS)``, or a C function name ``f(ARGS)``."""
    m = _ENTRY.match(text)
    if not m:
        raise EntryError(f"cannot parse entry {text!r}")
    a, b, args = m.groups()
    vals = tuple(int(x) for x in args.split(",") if x.strip()) if args else ()
    if b is None:
        if a == "main" and model.class_("C_main") is None:
            return Entry(None)
        if model.class_(f"C_{a}") is not None:
            return Entry(f"C_{a}", "call", vals)
        raise EntryError(f"no entry named {a}")
    if model.class_(a) is None:
        raise EntryError(f"unknown class {a}")
    if model.class_(a).method(b) is None:
        raise EntryError(f"unknown method {a}.{b}")
    return Entry(a, b, vals)


def _bootstrap(model: AbsModel, entry: Entry) -> list:
    """Statements of the root process for an entry."""
    if entry.cls is None:
        body = list(model.main)
        first = next((s for s in body if isinstance(s, VarDecl) and isinstance(s.init, AsyncCall)), None)
        if first is not None and is_future_type(first.type):
            body += [VarDecl(future_payload(first.type), "$result", Get(Var(first.name))), Return(Var("$result"))]
        return body
    out: list = []
    counter = [0]

    def build(cname: str, seen: tuple):
        c = model.class_(cname)
        args = []
        for p in c.params:
            args.append(arg_for(p.type, seen + (cname,)))
        counter[0] += 1
        name = f"$o{counter[0]}"
        out.append(VarDecl(cname, name, New(cname, tuple(args))))
        return Var(name)

    def arg_for(t: str, seen: tuple):
        if t == "Int":
            return IntC(0)
        if t == "Bool":
            return BoolC(False)
        if t == "Unit" or is_future_type(t):
            return NullC() if is_future_type(t) else UnitC()
        impls = [k.name for k in model.classes if t in k.implements or k.name == t]
        impls = [k for k in impls if k not in seen]
        if not impls:
            return NullC()
        return build(impls[0], seen)

    recv = build(entry.cls, ())
    m = model.class_(entry.cls).method(entry.method)
    if len(entry.args) != len(m.params):
        raise EntryError(f"{entry.describe()}: expected {len(m.params)} arguments")
    out.append(VarDecl(f"Fut<{m.ret}>", "$f", AsyncCall(recv, entry.method, tuple(IntC(a) if not isinstance(a, bool) else BoolC(a) for a in entry.args))))
    out.append(VarDecl(m.ret, "$result", Get(Var("$f"))))
    out.append(Return(Var("$result")))
    return out


# -- the transition relation -------------------------------------------------------


ROOT_OBJ = 0
ROOT_FUT = 0
SEGMENT_LIMIT = 1_000_000


class Machine:
    """Transition function over configurations of one program."""

    def __init__(self, model: AbsModel, entry: Entry, record: bool = False, check: bool = True):
        self.prog = Program(model)
        self.model = model
        self.entry = entry
        self.record = record
        self.check = check
        self.monitor = Monitor(model)
        self.violations: list = []
        root = _Compiler(None, "main", [], _bootstrap(model, entry), "Int")
        self.root_code = self.prog.add_code(root.code)

    def initial(self) -> Config:
        code = self.prog.codes[self.root_code]
        p = Proc(ROOT_FUT, self.root_code, 0, (None,) * len(code.locals), 0, True)
        return Config(((ROOT_OBJ, Obj(ROOT_CLASS, (), p, frozenset())),), ())

    def choices(self, cfg: Config) -> list:
        """Enabled (object id, process) pairs, in a deterministic order."""
        futs = dict(cfg.futs)
        out = []
        for oid, o in cfg.objs:
            if o.active is not None:
                p = o.active
                if p.pc == -1:
                    continue
                ins = self.prog.codes[p.code].instrs[p.pc]
                if ins[0] == "get":
                    loc = self._loc(p)
                    f = self.prog.eval(ins[2], loc, self._fields(o), oid, futs)
                    if isinstance(f, FutRef) and f.id in futs:
                        out.append((oid, p))
                else:
                    out.append((oid, p))
                continue
            for p in sorted(o.pool):
                if self.guard_ok(p, oid, o, futs):
                    out.append((oid, p))
        return out

    def guard_ok(self, p: Proc, oid: int, o: Obj, futs: dict) -> bool:
        if not p.started:
            return True
        ins = self.prog.codes[p.code].instrs[p.pc]
        if ins[0] != "await":
            return True
        loc = self._loc(p)
        fields = self._fields(o)
        for poll in ins[1]:
            f = self.prog.eval(poll, loc, fields, oid, futs)
            if not isinstance(f, FutRef) or f.id not in futs:
                return False
        return True

    def _loc(self, p: Proc) -> dict:
        code = self.prog.codes[p.code]
        return dict(zip(code.locals, p.locals))

    def _fields(self, o: Obj) -> dict:
        if o.cls == ROOT_CLASS:
            return {}
        return dict(zip(self.prog.classes[o.cls].field_names(), o.fields))

    def step(self, cfg: Config, choice) -> tuple[Config, list]:
        """Run the chosen process to its next release point."""
        oid, p = choice
        objs = dict(cfg.objs)
        futs = dict(cfg.futs)
        o = objs[oid]
        if o.active is None:
            o = Obj(o.cls, o.fields, None, o.pool - {p})
        events: list = []
        run = _Run(self, objs, futs, oid, o, p, events)
        run.go()
        new = Config(tuple(sorted(run.objs.items())), tuple(sorted(run.futs.items())))
        return new, events

    def step_choices(self, cfg: Config) -> list:
        return [(c, *self.step(cfg, c)) for c in self.choices(cfg)]

    def result(self, cfg: Config):
        return dict(cfg.futs).get(ROOT_FUT, _NONE)

    def is_final(self, cfg: Config) -> bool:
        return all(o.active is None and not o.pool for _, o in cfg.objs)


_NONE = object()


class _Run:
    """Execution of one atomic segment."""

    def __init__(self, m: Machine, objs: dict, futs: dict, oid: int, o: Obj, p: Proc, events: list):
        self.m = m
        self.prog = m.prog
        self.objs = objs
        self.futs = futs
        self.oid = oid
        self.o = o
        self.p = p
        self.events = events
        self.code = self.prog.codes[p.code]
        self.loc = dict(zip(self.code.locals, p.locals))
        self.fields = m._fields(o)
        self.counter = p.counter

    def emit(self, ev: Event):
        idx = len(self.events)
        self.events.append(ev)
        if self.m.check:
            for v in self.m.monitor.check(ev, idx):
                if v not in self.m.violations:
                    self.m.violations.append(v)

    def snapshot_fields(self) -> tuple:
        return tuple(self.fields.items())

    def snapshot_locals(self) -> tuple:
        return tuple((k, v) for k, v in self.loc.items() if v is not None or k in self.code.params)

    def fut_values(self) -> tuple:
        out = []
        for v in self.loc.values():
            if isinstance(v, FutRef) and v.id in self.futs:
                out.append((v.id, self.futs[v.id]))
        return tuple(sorted(set(out), key=lambda x: x[0]))

    def ev(self, kind: str, **kw) -> Event:
        return Event(kind, self.oid, self.p.fut, self.code.method, cls=self.o.cls, **kw)

    def eval(self, e):
        return self.prog.eval(e, self.loc, self.fields, self.oid, self.futs)

    def save(self, active: Optional[Proc], pool_add: Optional[Proc] = None):
        fields = tuple(self.fields.values())
        pool = self.o.pool if pool_add is None else self.o.pool | {pool_add}
        self.objs[self.oid] = Obj(self.o.cls, fields, active, pool)

    def proc(self, pc: int, started: bool = True) -> Proc:
        return Proc(self.p.fut, self.p.code, pc, tuple(self.loc.get(n) for n in self.code.locals), self.counter, started)

    def store(self, dest, value):
        kind, where = dest
        if kind == "f":
            self.fields[where] = value
        else:
            self.loc[self.code.locals[where]] = value
        if self.m.record:
            self.emit(self.ev("noEv", fields=self.snapshot_fields()))

    def go(self):
        pc = self.p.pc
        instrs = self.code.instrs
        if not self.p.started:
            self.emit(self.ev("invREv", args=tuple(self.loc.get(n) for n in self.code.params)))
        elif instrs[pc][0] == "await":
            self.emit(self.ev("suspREv", fields=self.snapshot_fields()))
            pc += 1
        steps = 0
        try:
            while True:
                steps += 1
                if steps > SEGMENT_LIMIT:
                    raise _Stuck("segment step limit")
                ins = instrs[pc]
                op = ins[0]
                if op == "let":
                    self.store(ins[1], self.eval(ins[2]))
                    pc += 1
                elif op == "eval":
                    self.eval(ins[1])
                    pc += 1
                elif op == "jf":
                    pc = pc + 1 if self.eval(ins[1]) else ins[2]
                elif op == "j":
                    pc = ins[1]
                elif op == "call":
                    self.call(ins)
                    pc += 1
                elif op == "new":
                    self.new(ins)
                    pc += 1
                elif op == "get":
                    f = self.eval(ins[2])
                    if not isinstance(f, FutRef):
                        raise _Stuck("get on null future")
                    if f.id not in self.futs:
                        self.save(self.proc(pc))
                        return
                    v = self.futs[f.id]
                    self.emit(Event("futREv", self.oid, f.id, self.code.method, value=v, cls=self.o.cls))
                    if ins[1] is not None:
                        self.store(ins[1], v)
                    pc += 1
                elif op == "await":
                    self.emit(self.ev("suspEv", fields=self.snapshot_fields()))
                    self.save(None, self.proc(pc))
                    return
                elif op == "ret":
                    v = self.eval(ins[1])
                    self.futs[self.p.fut] = v
                    self.emit(self.ev("futEv", value=v, fields=self.snapshot_fields(),
                                      locals=self.snapshot_locals(), futures=self.fut_values()))
                    self.save(None)
                    return
                else:
                    raise UnknownStatementForm(f"instruction {op}")
        except (_Stuck, DivisionByZero, TypeError) as e:
            self.emit(self.ev("stuck", value=str(e)))
            stuck = Proc(self.p.fut, self.p.code, pc, tuple(self.loc.get(n) for n in self.code.locals), self.counter, True)
            self.fields_stuck(stuck)

    def fields_stuck(self, proc: Proc):
        # a stuck process keeps its object forever
        fields = tuple(self.fields.values())
        self.objs[self.oid] = Obj(self.o.cls, fields, proc._replace(pc=-1), self.o.pool)

    def call(self, ins):
        _, dest, target, method, args = ins
        recv = self.eval(target)
        vals = tuple(self.eval(a) for a in args)
        if not isinstance(recv, Ref):
            raise _Stuck(f"call {method} on null")
        self.counter += 1
        fid = self.prog.intern(self.prog.fut_ids, (self.p.fut, self.counter))
        callee = self.objs[recv.id] if recv.id != self.oid else None
        ccls = callee.cls if callee is not None else self.o.cls
        ci = self.prog.code_index.get((ccls, method))
        if ci is None:
            raise _Stuck(f"no method {ccls}.{method}")
        code = self.prog.codes[ci]
        loc = list(vals) + [None] * (len(code.locals) - len(vals))
        proc = Proc(fid, ci, 0, tuple(loc), 0, False)
        self.emit(Event("invEv", self.oid, fid, method, vals, callee=recv.id, cls=self.o.cls, callee_cls=ccls))
        if recv.id == self.oid:
            self.o = Obj(self.o.cls, self.o.fields, self.o.active, self.o.pool | {proc})
        else:
            self.objs[recv.id] = Obj(callee.cls, callee.fields, callee.active, callee.pool | {proc})
        if dest is not None:
            self.store(dest, FutRef(fid))

    def new(self, ins):
        _, dest, cname, args = ins
        c = self.prog.classes.get(cname)
        if c is None:
            raise _Stuck(f"unknown class {cname}")
        vals = [self.eval(a) for a in args]
        self.counter += 1
        oid = self.prog.intern(self.prog.obj_ids, (self.p.fut, self.counter))
        env = {p.name: v for p, v in zip(c.params, vals)}
        for f in c.fields:
            env[f.name] = self.prog.eval(f.init, {}, env, oid, self.futs) if f.init is not None else _default_value(f.type)
        fields = tuple(env[n] for n in c.field_names())
        self.objs[oid] = Obj(cname, fields, None, frozenset())
        if dest is not None:
            self.store(dest, Ref(oid))


def _default_value(t: str):
    if t == "Int":
        return 0
    if t == "Bool":
        return False
    if t == "Unit":
        return UNIT
    return None


# -- runtime monitor -----------------------------------------------------------------


class Monitor:
    """Checks contracts on concrete events."""

    def __init__(self, model: AbsModel):
        self.model = model
        self.prog = None
        self.inv = {c.name: c.invariants() for c in model.classes}
        self.pre: dict = {}
        self.post: dict = {}
        self.cls_of_method: dict = {}
        for c in model.classes:
            for m in c.methods:
                sig = model.signature(c, m.name)
                specs = (list(sig.specs) if sig else []) + list(m.specs)
                self.pre[(c.name, m.name)] = [s.expr for s in specs if s.kind == "Requires"]
                self.post[(c.name, m.name)] = [s.expr for s in specs if s.kind == "Ensures"]

    def _eval(self, e, loc, fields, futs):
        if self.prog is None:
            self.prog = Program(self.model)
        return self.prog.eval(e, loc, fields, 0, futs)

    def _holds(self, e, loc, fields, futs) -> Optional[bool]:
        try:
            return bool(self._eval(e, loc, fields, futs))
        except (_Stuck, UnknownStatementForm, KeyError, TypeError, DivisionByZero):
            return None  # not decidable on this event

    def check(self, ev: Event, idx: int) -> list[Violation]:
        from .absir.printer import print_expr

        out = []
        if ev.kind == "invEv":
            ccls = ev.callee_cls
            key = (ccls, ev.method)
            code_params = self._params(key)
            loc = dict(zip(code_params, ev.args))
            for e in self.pre.get(key, []):
                if self._holds(e, loc, {}, {}) is False:
                    out.append(Violation(idx, ev.format(), f"Requires({print_expr(e)})", f"{ccls}.{ev.method}"))
            return out
        ocls = ev.cls
        if ev.kind in ("suspEv", "suspREv", "futEv") and ocls in self.inv:
            fields = dict(ev.fields)
            for e in self.inv[ocls]:
                if self._holds(e, {}, fields, {}) is False:
                    out.append(Violation(idx, ev.format(), f"ObjInv({print_expr(e)})", f"{ocls}.{ev.method}"))
        if ev.kind == "futEv":
            loc = dict(ev.locals)
            loc["result"] = ev.value
            for e in self.post.get((ocls, ev.method), []):
                if self._holds(e, loc, dict(ev.fields), dict(ev.futures)) is False:
                    out.append(Violation(idx, ev.format(), f"Ensures({print_expr(e)})", f"{ocls}.{ev.method}"))
        return out

    def _params(self, key) -> list[str]:
        c = self.model.class_(key[0])
        m = c.method(key[1]) if c else None
        return [p.name for p in m.params] if m else []


def monitor(trace: list, model: AbsModel) -> list[Violation]:
    """Check a recorded trace against the model's annotations."""
    mon = Monitor(model)
    out = []
    for i, ev in enumerate(trace):
        out += mon.check(ev, i)
    return out


# -- exploration ---------------------------------------------------------------------


@dataclass
class Exploration:
    results: set
    configurations: int
    exhausted: bool
    deadlocked: int = 0
    stuck: int = 0
    violations: list = field(default_factory=list)
    traces: list = field(default_factory=list)  # (result, [Event]) per distinct final configuration

    def summary(self) -> str:
        res = "{" + ", ".join(_show(r) for r in sorted(self.results, key=_sort_key)) + "}"
        return (f"results: {res}\nconfigurations: {self.configurations}\nexhausted: {str(self.exhausted).lower()}\n"
                f"deadlocked: {self.deadlocked}\nstuck: {self.stuck}\nviolations: {len(self.violations)}")


def _sort_key(v):
    return (0, v) if isinstance(v, int) else (1, str(v))


def _make_machine(model: AbsModel, entry: Entry, record: bool) -> Machine:
    return Machine(model, entry, record=record, check=False)


def explore(model: AbsModel, entry: Entry | str, max_depth: int = 100_000, max_configs: int = 5_000_000,
            traces: bool = False) -> Exploration:
    """Enumerate every schedule from ``entry`` with configuration memoization."""
    if isinstance(entry, str):
        entry = parse_entry(entry, model)
    m = _make_machine(model, entry, traces)
    init = m.initial()
    seen = {init: None}
    parent: dict = {}
    stack = [(init, 0)]
    results: set = set()
    exhausted = True
    deadlocked = stuck = 0
    violations: list = []
    finals = []
    while stack:
        cfg, depth = stack.pop()
        chs = m.choices(cfg)
        if not chs:
            r = m.result(cfg)
            if r is not _NONE:
                results.add(r)
            if not m.is_final(cfg):
                if any(o.active is not None and o.active.pc == -1 for _, o in cfg.objs):
                    stuck += 1
                else:
                    deadlocked += 1
            if traces:
                finals.append(cfg)
            continue
        if depth >= max_depth:
            exhausted = False
            continue
        for ch in chs:
            new, events = m.step(cfg, ch)
            base = _trace_len(parent, cfg) if traces else 0
            for i, ev in enumerate(events):
                for v in m.monitor.check(ev, base + i):
                    if v not in violations:
                        violations.append(v)
            if new in seen:
                continue
            if len(seen) >= max_configs:
                exhausted = False
                break
            seen[new] = None
            if traces:
                parent[new] = (cfg, events)
            stack.append((new, depth + 1))
    out = Exploration(results, len(seen), exhausted, deadlocked, stuck, violations)
    if traces:
        for cfg in finals:
            r = m.result(cfg)
            out.traces.append((None if r is _NONE else r, _rebuild(parent, cfg)))
    return out


def _rebuild(parent: dict, cfg) -> list:
    chunks = []
    while cfg in parent:
        cfg, events = parent[cfg]
        chunks.append(events)
    out = []
    for c in reversed(chunks):
        out += c
    return out


def _trace_len(parent: dict, cfg) -> int:
    n = 0
    while cfg in parent:
        cfg, events = parent[cfg]
        n += len(events)
    return n


def run_random(model: AbsModel, entry: Entry | str, seed: int = 0, max_steps: int = 100_000):
    """Run one schedule chosen by a seeded random policy; returns (result, trace)."""
    if isinstance(entry, str):
        entry = parse_entry(entry, model)
    rng = random.Random(seed)
    m = _make_machine(model, entry, True)
    cfg = m.initial()
    trace: list = []
    for _ in range(max_steps):
        chs = m.choices(cfg)
        if not chs:
            break
        cfg, events = m.step(cfg, rng.choice(chs))
        trace += events
    r = m.result(cfg)
    return (None if r is _NONE else r), trace


def sample(model: AbsModel, entry: Entry | str, runs: int, seed: int = 0) -> set:
    """Results of ``runs`` random schedules."""
    if isinstance(entry, str):
        entry = parse_entry(entry, model)
    rng = random.Random(seed)
    m = _make_machine(model, entry, False)
    out = set()
    for _ in range(runs):
        cfg = m.initial()
        while True:
            chs = m.choices(cfg)
            if not chs:
                break
            cfg, _ = m.step(cfg, rng.choice(chs))
        r = m.result(cfg)
        if r is not _NONE:
            out.add(r)
    return out


def format_trace(trace: list) -> str:
    return "\n".join(ev.format() for ev in trace) + ("\n" if trace else "")
