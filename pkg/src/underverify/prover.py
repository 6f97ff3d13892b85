"""Proof obligations and symbolic execution with behavioral contracts.

Every method yields one obligation ``inv & pre -> [body |- inv, M, phi, true]``
and every class one initialization obligation.  Symbolic execution walks the
normalized body with an update (kept as a substitution) and a set of
assumptions, turning the modality into first-order sequents that are then
discharged by an SMT solver.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

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
    Method,
    New,
    NullC,
    Return,
    Skip,
    This,
    Un,
    UnitC,
    Var,
    VarDecl,
    While,
    future_payload,
    is_future_type,
    sub_exprs,
    walk_stmts,
)
from .errors import UnknownStatementForm
from .logic import (
    BOOL,
    FIELD,
    INT,
    NULL,
    REF,
    TRUE,
    UNIT,
    UNIT_V,
    App,
    Const,
    Sequent,
    Sym,
    Term,
    and_,
    eq,
    heap_sort,
    not_,
    or_,
    pretty,
    select,
    store,
    substitute,
    val,
)
from .smt import FunDef, SmtScript, SolverConfig, SolverResult, encode, run_solver

MAIN = "<main>"
INIT = "<init>"
THIS = Sym("this", REF, "const")


def sort_of(t: str) -> str:
    """Logical sort of an IR type."""
    if t in (INT, BOOL, UNIT):
        return t
    if is_future_type(t):
        return "Fut_" + sort_of(future_payload(t))
    return REF


@dataclass
class BehavioralContract:
    inv: Term
    M: dict  # (type name, method) -> (pre, post), built lazily through ``lookup``
    phi: Term
    psi: Term = TRUE


@dataclass
class ProofObligation:
    kind: str  # MethodContract | ClassInitialization
    cls: str
    method: str
    antecedent: Term
    body: list
    contract: BehavioralContract
    env: dict = field(default_factory=dict)  # variable -> IR type

    @property
    def name(self) -> str:
        return f"{self.cls}.{self.method}"


# -- expression translation ------------------------------------------------------


class Translator:
    """IR expressions to terms, relative to a class and a typing environment."""

    def __init__(self, model: AbsModel, cls: Optional[ClassDecl], env: dict, fields: Optional[dict] = None):
        self.model = model
        self.cls = cls
        self.env = env
        self.fields = fields  # override: field name -> term (used for creation requires)

    def field_term(self, name: str) -> Term:
        if self.fields is not None and name in self.fields:
            return self.fields[name]
        if self.cls is None or self.cls.field_type(name) is None:
            raise UnknownStatementForm(f"unknown field {name}")
        s = sort_of(self.cls.field_type(name))
        return select(Sym(f"heap_{s}", heap_sort(s)), field_sym(self.cls.name, name))

    def __call__(self, e) -> Term:
        if isinstance(e, IntC):
            return Const(e.value, INT)
        if isinstance(e, BoolC):
            return Const(bool(e.value), BOOL)
        if isinstance(e, NullC):
            return NULL
        if isinstance(e, UnitC):
            return UNIT_V
        if isinstance(e, This):
            return THIS
        if isinstance(e, Var):
            if e.name not in self.env:
                if self.cls is not None and self.cls.field_type(e.name) is not None:
                    return self.field_term(e.name)
                raise UnknownStatementForm(f"unknown variable {e.name}")
            return Sym(e.name, sort_of(self.env[e.name]))
        if isinstance(e, FieldRef):
            return self.field_term(e.name)
        if isinstance(e, Bin):
            a, b = self(e.left), self(e.right)
            op = e.op
            if op in ("+", "-", "*"):
                return App(op, (a, b), INT)
            if op == "/":
                return App("cdiv", (a, b), INT)
            if op == "%":
                return App("cmod", (a, b), INT)
            if op in ("<", ">", "<=", ">="):
                return App(op, (a, b), BOOL)
            if op == "==":
                return eq(a, b)
            if op == "!=":
                return not_(eq(a, b))
            if op == "&&":
                return and_(a, b)
            if op == "||":
                return or_(a, b)
            raise UnknownStatementForm(f"operator {op}")
        if isinstance(e, Un):
            x = self(e.operand)
            if e.op == "!":
                return not_(x)
            return App("-", (Const(0, INT), x), INT)
        if isinstance(e, IfE):
            t = self(e.then)
            return App("ite", (self(e.cond), t, self(e.else_)), t.sort)
        if isinstance(e, FnApp):
            args = tuple(self(a) for a in e.args)
            if e.name == "valueOf":
                return val(args[0])
            fd = self.model.function(e.name)
            if fd is None:
                raise UnknownStatementForm(f"unknown function {e.name}")
            return App(f"fn_{e.name}", args, sort_of(fd.ret))
        raise UnknownStatementForm(f"not a pure expression: {e!r}")


def field_sym(cls: str, name: str) -> Sym:
    return Sym(f"{cls}.{name}", FIELD, "field")


def model_defs(model: AbsModel) -> dict:
    out = {}
    for f in model.functions:
        env = {p.name: p.type for p in f.params}
        tr = Translator(model, None, env)
        out[f.name] = FunDef(f.name, [Sym(p.name, sort_of(p.type)) for p in f.params], sort_of(f.ret), tr(f.body))
    return out


# -- obligations -----------------------------------------------------------------


def _method_specs(model: AbsModel, cls: ClassDecl, m: Method):
    sig = model.signature(cls, m.name)
    specs = list(sig.specs) if sig is not None else []
    specs += [s for s in m.specs if s not in specs]
    pre = [s.expr for s in specs if s.kind == "Requires"]
    post = [s.expr for s in specs if s.kind == "Ensures"]
    return pre, post


def _method_env(cls: Optional[ClassDecl], m_params, body, ret: Optional[str]) -> dict:
    env = {p.name: p.type for p in m_params}
    for s in walk_stmts(body):
        if isinstance(s, VarDecl):
            env[s.name] = s.type
    if ret is not None:
        env["result"] = ret
    return env


def generate_obligations(model: AbsModel) -> list[ProofObligation]:
    """One contract obligation per method, one initialization obligation per class,
    and one for the main block when it is non-empty."""
    pos = []
    for c in model.classes:
        inv_exprs = c.invariants()
        for m in c.methods:
            env = _method_env(c, m.params, m.body, m.ret)
            tr = Translator(model, c, env)
            pre, post = _method_specs(model, c, m)
            inv = and_(*(tr(e) for e in inv_exprs))
            ante = and_(inv, *(tr(e) for e in pre))
            contract = BehavioralContract(inv, {}, and_(*(tr(e) for e in post)), TRUE)
            pos.append(ProofObligation("MethodContract", c.name, m.name, ante, m.body, contract, env))
        pos.append(init_obligation(model, c))
    if model.main:
        env = _method_env(None, [], model.main, None)
        contract = BehavioralContract(TRUE, {}, TRUE, TRUE)
        pos.append(ProofObligation("MethodContract", MAIN, "main", TRUE, model.main, contract, env))
    return pos


def init_obligation(model: AbsModel, c: ClassDecl) -> ProofObligation:
    tr = Translator(model, c, {})
    gamma = [tr(e) for e in c.creation_requires()]
    for f in c.fields:
        if f.init is not None:
            gamma.append(eq(tr.field_term(f.name), tr(f.init)))
    inv = and_(*(tr(e) for e in c.invariants()))
    contract = BehavioralContract(inv, {}, TRUE, TRUE)
    return ProofObligation("ClassInitialization", c.name, INIT, and_(*gamma), list(c.fields), contract, {})


# -- symbolic execution ------------------------------------------------------------


@dataclass
class _State:
    gamma: list
    sub: dict  # the accumulated update, as a substitution

    def apply(self, t: Term) -> Term:
        return substitute(t, self.sub)

    def bind(self, v: Sym, t: Term) -> "_State":
        sub = dict(self.sub)
        sub[v] = self.apply(t)
        return _State(list(self.gamma), sub)

    def assume(self, *fs) -> "_State":
        return _State(self.gamma + [self.apply(f) for f in fs if f != TRUE], dict(self.sub))


class _Executor:
    def __init__(self, model: AbsModel, po: ProofObligation):
        self.model = model
        self.po = po
        self.cls = model.class_(po.cls) if po.cls != MAIN else None
        self.tr = Translator(model, self.cls, po.env)
        self.goals: list[Sequent] = []
        self.n = 0

    def fresh(self, base: str, sort: str) -> Sym:
        self.n += 1
        return Sym(f"{base}#{self.n}", sort, "const")

    def goal(self, st: _State, f: Term, why: str):
        f = st.apply(f)
        for part in (f.args if isinstance(f, App) and f.op == "and" else (f,)):
            if part == TRUE or part in st.gamma:
                continue
            self.goals.append(Sequent(list(st.gamma), [part], why))

    def div_guards(self, st: _State, exprs):
        for e in exprs:
            for sub in sub_exprs(e):
                if isinstance(sub, Bin) and sub.op in ("/", "%"):
                    self.goal(st, not_(eq(self.tr(sub.right), Const(0, INT))), "division guard")

    def heaps(self) -> list[str]:
        sorts = set()
        for c in self.model.classes:
            for n in c.field_names():
                sorts.add(sort_of(c.field_type(n)))
        return sorted(sorts)

    def var(self, name: str) -> Sym:
        if name not in self.po.env:
            raise UnknownStatementForm(f"undeclared variable {name}")
        return Sym(name, sort_of(self.po.env[name]))

    def static_type(self, e) -> str:
        if isinstance(e, This):
            return self.po.cls
        if isinstance(e, Var):
            if e.name in self.po.env:
                return self.po.env[e.name]
            return self.cls.field_type(e.name)
        if isinstance(e, FieldRef):
            return self.cls.field_type(e.name)
        raise UnknownStatementForm(f"cannot type call receiver {e!r}")

    def callee_contract(self, rtype: str, method: str):
        """Parameter pre/postcondition of ``rtype.method`` as terms over the callee's parameters."""
        iface = self.model.interface(rtype)
        if iface is not None and iface.method(method) is not None:
            sig = iface.method(method)
            pre, post = sig.requires(), sig.ensures()
            params, ret, ctx = sig.params, sig.ret, None
        else:
            c = self.model.class_(rtype)
            if c is None or c.method(method) is None:
                raise UnknownStatementForm(f"unknown method {rtype}.{method}")
            m = c.method(method)
            pre, post = _method_specs(self.model, c, m)
            params, ret, ctx = m.params, m.ret, c
        env = {p.name: p.type for p in params}
        env["result"] = ret
        tr = Translator(self.model, ctx, env)
        key = (rtype, method)
        entry = (and_(*(tr(e) for e in pre)), and_(*(tr(e) for e in post)))
        self.po.contract.M.setdefault(key, entry)
        return entry, [Sym(p.name, sort_of(p.type)) for p in params], Sym("result", sort_of(ret))

    # -- rules

    def run(self, stmts: list, st: _State, psi: Term):
        stmts = list(stmts)
        while stmts:
            s = stmts.pop(0)
            if isinstance(s, Block):
                stmts = list(s.body) + stmts
                continue
            if isinstance(s, Skip):
                continue
            if isinstance(s, (VarDecl, Assign)):
                if isinstance(s, VarDecl):
                    target, rhs = Var(s.name), s.init
                    if rhs is None:
                        rhs = _default(s.type)
                    if rhs is None:
                        v = self.var(s.name)
                        st = st.bind(v, self.fresh(v.name, v.sort))
                        continue
                else:
                    target, rhs = s.target, s.value
                st = self.assign(target, rhs, st)
                if st is None:
                    return
                continue
            if isinstance(s, ExprStmt):
                v = s.value
                if isinstance(v, (AsyncCall, New)):
                    st = self.assign(None, v, st)
                    if st is None:
                        return
                else:
                    self.div_guards(st, [v.future if isinstance(v, Get) else v])
                continue
            if isinstance(s, Await):
                inv = self.po.contract.inv
                self.goal(st, inv, "object invariant at release")
                st = self.anonymize_heap(st).assume(inv)
                continue
            if isinstance(s, If):
                self.div_guards(st, [s.cond])
                c = self.tr(s.cond)
                self.run(list(s.then) + stmts, st.assume(c), psi)
                self.run(list(s.else_ or []) + stmts, st.assume(not_(c)), psi)
                return
            if isinstance(s, While):
                self.loop(s, stmts, st, psi)
                return
            if isinstance(s, Return):
                self.div_guards(st, [s.value])
                res = self.po.env.get("result")
                body = and_(self.po.contract.inv, self.po.contract.phi, psi)
                if res is not None:
                    st = st.bind(Sym("result", sort_of(res)), self.tr(s.value))
                self.goal(st, body, "postcondition")
                return
            raise UnknownStatementForm(f"unsupported statement {s!r}")
        self.goal(st, psi, "statement postcondition")

    def assign(self, target, rhs, st: _State) -> Optional[_State]:
        if isinstance(rhs, Get):
            self.div_guards(st, [rhs.future])
            value = val(self.tr(rhs.future))
        elif isinstance(rhs, AsyncCall):
            self.div_guards(st, [rhs.target, *rhs.args])
            rtype = self.static_type(rhs.target)
            (pre, post), params, res = self.callee_contract(rtype, rhs.method)
            recv = self.tr(rhs.target)
            args = {p: self.tr(a) for p, a in zip(params, rhs.args)}
            self.goal(st, not_(eq(recv, NULL)), f"receiver of {rhs.method}")
            self.goal(st, substitute(pre, args), f"precondition of {rhs.method}")
            fut = self.fresh("fut", "Fut_" + res.sort)
            args[res] = val(fut)
            st = st.assume(substitute(post, args))
            value = fut
        elif isinstance(rhs, New):
            self.div_guards(st, list(rhs.args))
            c = self.model.class_(rhs.cls)
            if c is None:
                raise UnknownStatementForm(f"unknown class {rhs.cls}")
            fields = {p.name: self.tr(a) for p, a in zip(c.params, rhs.args)}
            ctr = Translator(self.model, c, {}, fields)
            self.goal(st, and_(*(ctr(e) for e in c.creation_requires())), f"creation of {c.name}")
            ref = self.fresh("obj", REF)
            facts = [not_(eq(ref, NULL))]
            if self.cls is not None:
                facts.append(not_(eq(ref, THIS)))
            st = st.assume(*facts)
            value = ref
        else:
            self.div_guards(st, [rhs])
            value = self.tr(rhs)
        if target is None:
            return st
        if isinstance(target, FieldRef) or (isinstance(target, Var) and target.name not in self.po.env):
            name = target.name
            s = sort_of(self.cls.field_type(name))
            heap = Sym(f"heap_{s}", heap_sort(s))
            return st.bind(heap, store(heap, field_sym(self.cls.name, name), value))
        return st.bind(self.var(target.name), value)

    def anonymize_heap(self, st: _State) -> _State:
        sub = dict(st.sub)
        for s in self.heaps():
            sub[Sym(f"heap_{s}", heap_sort(s))] = self.fresh(f"heap_{s}", heap_sort(s))
        return _State(list(st.gamma), sub)

    def loop(self, s: While, rest: list, st: _State, psi: Term):
        inv_l = self.tr(s.invariant) if s.invariant is not None else TRUE
        self.goal(st, inv_l, "loop invariant initially")
        anon = dict(st.sub)
        writes_heap = False
        for t in walk_stmts(s.body):
            if isinstance(t, Await):
                writes_heap = True
            target = t.target if isinstance(t, Assign) else Var(t.name) if isinstance(t, VarDecl) else None
            if isinstance(target, FieldRef) or (isinstance(target, Var) and target.name not in self.po.env):
                writes_heap = True
            elif isinstance(target, Var):
                v = self.var(target.name)
                anon[v] = self.fresh(v.name, v.sort)
        st2 = _State(list(st.gamma), anon)
        if writes_heap:
            st2 = self.anonymize_heap(st2)
        st2 = st2.assume(inv_l)
        self.div_guards(st2, [s.cond])
        c = self.tr(s.cond)
        self.run(list(s.body), st2.assume(c), inv_l)
        self.run(rest, st2.assume(not_(c)), psi)


def _default(t: str):
    if t == INT:
        return IntC(0)
    if t == BOOL:
        return BoolC(False)
    if t == UNIT:
        return UnitC()
    if is_future_type(t):
        return None
    return NullC()


def symbolic_execute(model: AbsModel, po: ProofObligation) -> list[Sequent]:
    """Reduce an obligation to modality-free, update-free sequents."""
    if po.kind == "ClassInitialization":
        goals = []
        f = po.contract.inv
        for part in (f.args if isinstance(f, App) and f.op == "and" else (f,)):
            if part != TRUE:
                goals.append(Sequent([po.antecedent] if po.antecedent != TRUE else [], [part], "object invariant"))
        return goals
    ex = _Executor(model, po)
    gamma = []
    if ex.cls is not None:
        gamma.append(not_(eq(THIS, NULL)))
    a = po.antecedent
    gamma += list(a.args) if isinstance(a, App) and a.op == "and" else ([a] if a != TRUE else [])
    ex.run(po.body, _State(gamma, {}), po.contract.psi)
    return ex.goals


# -- discharge -------------------------------------------------------------------


VALID, NOT_VALID, UNKNOWN = "VALID", "NOT_VALID", "UNKNOWN"


@dataclass
class GoalResult:
    sequent: Sequent
    script: str
    status: str  # unsat | sat | unknown
    detail: str = ""
    millis: float = 0.0


@dataclass
class POResult:
    po: ProofObligation
    verdict: str
    goals: list
    millis: float

    def line(self) -> str:
        return f"{self.po.name}: {self.verdict} ({len(self.goals)} goals, {self.millis:.0f} ms)"


def verdict_of(statuses) -> str:
    statuses = list(statuses)
    if any(s == "sat" for s in statuses):
        return NOT_VALID
    if all(s == "unsat" for s in statuses):
        return VALID
    return UNKNOWN


def scripts_for(model: AbsModel, po: ProofObligation, config: Optional[SolverConfig] = None) -> list[tuple[Sequent, SmtScript]]:
    config = config or SolverConfig()
    defs = model_defs(model)
    out = []
    for i, g in enumerate(symbolic_execute(model, po), 1):
        g.label = f"{po.name} goal {i}: {g.label}"
        out.append((g, encode(g, defs, config.recursive_defs)))
    return out


def discharge(goals: list[tuple[Sequent, SmtScript]], config: SolverConfig) -> list[GoalResult]:
    def one(item):
        seq, script = item
        t0 = time.perf_counter()
        r: SolverResult = run_solver(script, config.timeout, config.path)
        return GoalResult(seq, script.text(), r.status, r.model, (time.perf_counter() - t0) * 1000)

    if config.jobs > 1 and len(goals) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(one, goals))
    return [one(g) for g in goals]


def verify_model(model: AbsModel, config: Optional[SolverConfig] = None) -> list[POResult]:
    """Generate, execute and discharge every obligation of a normalized model."""
    config = config or SolverConfig()
    results = []
    pos = generate_obligations(model)
    per_po = [scripts_for(model, po, config) for po in pos]
    if config.dump_dir:
        os.makedirs(config.dump_dir, exist_ok=True)
        for po, items in zip(pos, per_po):
            for i, (_, script) in enumerate(items, 1):
                fname = f"{po.cls}.{po.method}.goal{i}.smt2".replace("<", "").replace(">", "")
                with open(os.path.join(config.dump_dir, fname), "w") as fh:
                    fh.write(script.text())
    flat = [item for items in per_po for item in items]
    solved = discharge(flat, config)
    k = 0
    for po, items in zip(pos, per_po):
        rs = solved[k:k + len(items)]
        k += len(items)
        results.append(POResult(po, verdict_of(r.status for r in rs), rs, sum(r.millis for r in rs)))
    return results


def describe_goal(g: GoalResult) -> str:
    ante = " & ".join(pretty(x) for x in g.sequent.gamma) or "true"
    return f"{g.sequent.label}\n  {ante}\n  ==> {' | '.join(pretty(x) for x in g.sequent.delta)}"
