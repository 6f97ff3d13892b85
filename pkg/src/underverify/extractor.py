"""Extraction of an annotated active-object model from a C translation unit.

Every C function ``f`` becomes an interface ``I_f`` and a class ``C_f`` whose
``call`` method runs the function body.  Each sub-expression that reads a
global, has a side effect, or combines runtime values is an asynchronous call
to a helper method on ``this``; sequence points are ``await`` statements over
all futures created since the previous one.  Values computable from literals,
parameters and locals stay inline.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .absir import ir as A
from .cfront import ast as C
from .cfront.parser import parse_translation_unit
from .cfront.validate import validate_subset
from .errors import ContractTranslationError, InternalExtractionError, InvariantError, SubsetViolation

OP_NAMES = {
    "+": "plus", "-": "minus", "*": "times", "/": "div",
    "<": "lt", ">": "gt", "<=": "le", ">=": "ge", "==": "eq", "!=": "neq",
}
OP_SYMBOLS = {v: k for k, v in OP_NAMES.items()}
COMPARISONS = ("<", ">", "<=", ">=", "==", "!=")

RETURN_FLAG = "returnFlag"
FUNC_RESULT = "funcResult"


# -- value references ---------------------------------------------------------


@dataclass(frozen=True)
class CompileTimeVal:
    """An Int-valued pure expression over literals, parameters and locals."""

    expr: A.Expr


@dataclass(frozen=True)
class FutureName:
    """A ``Fut<Int>`` local holding the value."""

    name: str


ValueRef = Union[CompileTimeVal, FutureName]


def _kind(v: ValueRef) -> str:
    return "val" if isinstance(v, CompileTimeVal) else "fut"


def _arg_expr(v: ValueRef) -> A.Expr:
    return v.expr if isinstance(v, CompileTimeVal) else A.Var(v.name)


def _truth(e: A.Expr) -> A.Expr:
    return A.Bin("!=", e, A.IntC(0))


# -- context --------------------------------------------------------------------


@dataclass
class Counter:
    n: int = 0

    def fresh(self) -> str:
        self.n += 1
        return f"tmp_{self.n}"


@dataclass
class ExtractionContext:
    temp_counter: Counter
    function: C.CFunction
    program: C.CProgram
    helper_registry: dict = field(default_factory=dict)  # name -> A.Method
    pending_side_effects: list = field(default_factory=list)  # future names, creation order
    out: list = field(default_factory=list)
    globals: frozenset = frozenset()

    def fresh(self) -> str:
        return self.temp_counter.fresh()

    def emit(self, s) -> None:
        self.out.append(s)

    def consume(self, v: ValueRef) -> None:
        if isinstance(v, FutureName) and v.name in self.pending_side_effects:
            self.pending_side_effects.remove(v.name)

    def spawn(self, type_: str, method: str, args) -> str:
        name = self.fresh()
        self.emit(A.VarDecl(type_, name, A.AsyncCall(A.This(), method, tuple(args))))
        self.pending_side_effects.append(name)
        return name

    def sequence_point(self, extra: Optional[ValueRef] = None) -> None:
        polls = list(self.pending_side_effects)
        if isinstance(extra, FutureName) and extra.name not in polls:
            polls.append(extra.name)
        polls.sort(key=_tmp_index)
        if polls:
            self.emit(A.Await([A.Var(p) for p in polls]))
        self.pending_side_effects.clear()


def _tmp_index(name: str) -> int:
    m = re.match(r"tmp_(\d+)$", name)
    return int(m.group(1)) if m else 0


# -- helper bodies ----------------------------------------------------------------


def _await_and_unpack(params: list[A.Param]) -> list:
    futs = [p for p in params if A.is_future_type(p.type)]
    out = []
    if futs:
        out.append(A.Await([A.Var(p.name) for p in futs]))
    for p in futs:
        if p.name.startswith("fut_arg"):
            out.append(A.VarDecl("Int", p.name[len("fut_"):], A.Get(A.Var(p.name))))
    return out


def _arg_params(kinds) -> list[A.Param]:
    return [A.Param("Int", f"arg{i}") if k == "val" else A.Param("Fut<Int>", f"fut_arg{i}")
            for i, k in enumerate(kinds, 1)]


def op_helper(op: str, k1: str, k2: str) -> A.Method:
    params = _arg_params([k1, k2])
    body = _await_and_unpack(params)
    e = A.Bin(op, A.Var("arg1"), A.Var("arg2"))
    if op in COMPARISONS:
        e = A.IfE(e, A.IntC(1), A.IntC(0))
    body.append(A.Return(e))
    return A.Method("Int", f"op_{OP_NAMES[op]}_{k1}_{k2}", params, body)


def get_helper(g: str) -> A.Method:
    return A.Method("Int", f"get_global_{g}", [], [
        A.VarDecl("Fut<Int>", "futureResult", A.AsyncCall(A.FieldRef("global"), f"get_{g}", ())),
        A.VarDecl("Int", "funcResult", A.Get(A.Var("futureResult"))),
        A.Return(A.Var("funcResult")),
    ])


def set_helper(g: str, kind: str) -> A.Method:
    if kind == "val":
        params = [A.Param("Int", "value")]
        body = []
    else:
        params = [A.Param("Fut<Int>", "fut_arg")]
        body = [A.Await([A.Var("fut_arg")]), A.VarDecl("Int", "value", A.Get(A.Var("fut_arg")))]
    body += [
        A.VarDecl("Fut<Unit>", "futureResult", A.AsyncCall(A.FieldRef("global"), f"set_{g}", (A.Var("value"),))),
        A.ExprStmt(A.Get(A.Var("futureResult"))),
    ]
    return A.Method("Unit", f"set_global_{g}_{kind}", params, body)


def call_helper(f: str, kinds, n_side: int, ctr: Counter) -> A.Method:
    params = _arg_params(kinds) + [A.Param("Fut<Unit>", f"fut_se{i}") for i in range(1, n_side + 1)]
    body = _await_and_unpack(params)
    obj, fut, res = ctr.fresh(), ctr.fresh(), ctr.fresh()
    body += [
        A.VarDecl(f"I_{f}", obj, A.New(f"C_{f}", (A.FieldRef("global"),))),
        A.VarDecl("Fut<Int>", fut, A.AsyncCall(A.Var(obj), "call", tuple(A.Var(f"arg{i}") for i in range(1, len(kinds) + 1)))),
        A.VarDecl("Int", res, A.Get(A.Var(fut))),
        A.Return(A.Var(res)),
    ]
    name = f"call_{f}_" + "".join(k + "_" for k in kinds) + str(n_side)
    return A.Method("Int", name, params, body)


# -- expressions --------------------------------------------------------------------


def _helper(ctx: ExtractionContext, name: str, build):
    if name not in ctx.helper_registry:
        ctx.helper_registry[name] = build()
    return ctx.helper_registry[name]


def extract_expression(expr: C.Expr, ctx: ExtractionContext):
    """Translate ``expr``; returns (value, emitted statements, helper methods).

    Statements are also appended to ``ctx.out`` and helpers registered in
    ``ctx.helper_registry``; the returned lists are the increments.
    """
    start = len(ctx.out)
    before = set(ctx.helper_registry)
    v = _expr(expr, ctx)
    return v, ctx.out[start:], [m for k, m in ctx.helper_registry.items() if k not in before]


def _expr(e: C.Expr, ctx: ExtractionContext) -> ValueRef:
    if isinstance(e, C.IntLit):
        return CompileTimeVal(A.IntC(e.value))
    if isinstance(e, C.Name):
        if e.name in ctx.globals:
            _helper(ctx, f"get_global_{e.name}", lambda: get_helper(e.name))
            return FutureName(ctx.spawn("Fut<Int>", f"get_global_{e.name}", []))
        return CompileTimeVal(A.Var(e.name))
    if isinstance(e, C.BinOp):
        if e.op in ("&&", "||"):
            raise InternalExtractionError(f"short-circuit operator '{e.op}' in nested position")
        left = _expr(e.left, ctx)
        right = _expr(e.right, ctx)
        if isinstance(left, CompileTimeVal) and isinstance(right, CompileTimeVal):
            b = A.Bin(e.op, left.expr, right.expr)
            return CompileTimeVal(A.IfE(b, A.IntC(1), A.IntC(0)) if e.op in COMPARISONS else b)
        k1, k2 = _kind(left), _kind(right)
        h = _helper(ctx, f"op_{OP_NAMES[e.op]}_{k1}_{k2}", lambda: op_helper(e.op, k1, k2))
        ctx.consume(left)
        ctx.consume(right)
        return FutureName(ctx.spawn("Fut<Int>", h.name, [_arg_expr(left), _arg_expr(right)]))
    if isinstance(e, C.Assign):
        if e.target not in ctx.globals:
            raise InternalExtractionError(f"nested assignment to local '{e.target}'")
        v = _expr(e.value, ctx)
        k = _kind(v)
        h = _helper(ctx, f"set_global_{e.target}_{k}", lambda: set_helper(e.target, k))
        ctx.consume(v)
        ctx.spawn("Fut<Unit>", h.name, [_arg_expr(v)])
        return v
    if isinstance(e, C.Call):
        mark = list(ctx.pending_side_effects)
        args = [_expr(a, ctx) for a in e.args]
        for a in args:
            ctx.consume(a)
        side = [p for p in ctx.pending_side_effects if p not in mark]
        for p in side:
            ctx.pending_side_effects.remove(p)
        kinds = [_kind(a) for a in args]
        name = f"call_{e.func}_" + "".join(k + "_" for k in kinds) + str(len(side))
        _helper(ctx, name, lambda: call_helper(e.func, kinds, len(side), ctx.temp_counter))
        return FutureName(ctx.spawn("Fut<Int>", name, [_arg_expr(a) for a in args] + [A.Var(p) for p in side]))
    raise InternalExtractionError(f"unsupported expression {e!r}")


# -- statements ------------------------------------------------------------------------


def _is_sc(e) -> bool:
    return isinstance(e, C.BinOp) and e.op in ("&&", "||")


def _contains_return(s: C.Stmt) -> bool:
    return any(isinstance(x, C.Return) for x in C.walk_stmt(s))


def _items(s: C.Stmt) -> list:
    return s.items if isinstance(s, C.Compound) else [s]


class _FunctionExtractor:
    def __init__(self, ctx: ExtractionContext):
        self.ctx = ctx

    # Evaluate e and leave its Int value in variable `name`.
    def eval_into(self, e: C.Expr, name: str, declare: bool) -> None:
        ctx = self.ctx
        if _is_sc(e):
            self._assign(name, A.IntC(0), declare)
            ctx.out.extend(self.branch(e, [A.Assign(A.Var(name), A.IntC(1))], []))
            return
        v = _expr(e, ctx)
        ctx.sequence_point(v)
        value = v.expr if isinstance(v, CompileTimeVal) else A.Get(A.Var(v.name))
        self._assign(name, value, declare)

    def _assign(self, name, value, declare: bool) -> None:
        if declare:
            self.ctx.emit(A.VarDecl("Int", name, value))
        else:
            self.ctx.emit(A.Assign(A.Var(name), value))

    def condition(self, e: C.Expr) -> A.Expr:
        t = self.ctx.fresh()
        self.eval_into(e, t, declare=True)
        return _truth(A.Var(t))

    def branch(self, e: C.Expr, then: list, else_: list) -> list:
        """Statements running `then` iff e is non-zero, short-circuiting && and ||."""
        saved = self.ctx.out
        self.ctx.out = []
        try:
            if isinstance(e, C.BinOp) and e.op == "&&":
                test = self.condition(e.left)
                inner = self.branch(e.right, then, else_)
                self.ctx.emit(A.If(test, inner, list(else_) if else_ else None))
            elif isinstance(e, C.BinOp) and e.op == "||":
                test = self.condition(e.left)
                inner = self.branch(e.right, then, else_)
                self.ctx.emit(A.If(test, list(then), inner))
            else:
                test = self.condition(e)
                self.ctx.emit(A.If(test, list(then), list(else_) if else_ else None))
            return self.ctx.out
        finally:
            self.ctx.out = saved

    def sub_block(self, items: list) -> list:
        saved = self.ctx.out
        self.ctx.out = []
        try:
            self.block(items)
            return self.ctx.out
        finally:
            self.ctx.out = saved

    def block(self, items: list) -> None:
        for k, s in enumerate(items):
            self.stmt(s)
            if _contains_return(s) and k < len(items) - 1:
                rest = self.sub_block(items[k + 1:])
                if rest:
                    self.ctx.emit(A.If(A.Un("!", A.Var(RETURN_FLAG)), rest, None))
                return

    def stmt(self, s: C.Stmt) -> None:
        ctx = self.ctx
        if isinstance(s, C.Compound):
            ctx.emit(A.Block(self.sub_block(s.items)))
        elif isinstance(s, C.LocalDecl):
            self.eval_into(s.init, s.name, declare=True)
        elif isinstance(s, C.ExprStmt):
            e = s.expr
            if isinstance(e, C.Assign) and e.target not in ctx.globals:
                self.eval_into(e.value, e.target, declare=False)
            elif _is_sc(e):
                self.condition(e)
            else:
                v = _expr(e, ctx)
                ctx.sequence_point(v)
        elif isinstance(s, C.Return):
            if s.value is not None:
                self.eval_into(s.value, FUNC_RESULT, declare=False)
            ctx.emit(A.Assign(A.Var(RETURN_FLAG), A.BoolC(True)))
        elif isinstance(s, C.If):
            test = self.condition(s.cond)
            then = self.sub_block(_items(s.then))
            else_ = self.sub_block(_items(s.else_)) if s.else_ is not None else None
            ctx.emit(A.If(test, then, else_))
        elif isinstance(s, C.While):
            self.loop(s)
        else:
            raise InternalExtractionError(f"unsupported statement {s!r}")

    def loop(self, s: C.While) -> None:
        ctx = self.ctx
        returns = _contains_return(s.body)
        inv = spec_expr(s.invariant) if s.invariant is not None else None
        ct = None
        if not _is_sc(s.cond):
            probe = ExtractionContext(Counter(), ctx.function, ctx.program, {}, [], [], ctx.globals)
            v = _expr(s.cond, probe)
            if isinstance(v, CompileTimeVal) and not probe.out:
                ct = v.expr
        if ct is not None:
            cond = ct.cond if isinstance(ct, A.IfE) and ct.then == A.IntC(1) and ct.else_ == A.IntC(0) else _truth(ct)
            body = self.sub_block(_items(s.body))
        else:
            t = ctx.fresh()
            self.eval_into(s.cond, t, declare=True)
            cond = _truth(A.Var(t))
            body = self.sub_block(_items(s.body))
            saved = ctx.out
            ctx.out = []
            self.eval_into(s.cond, t, declare=False)
            reeval, ctx.out = ctx.out, saved
            body += [A.If(A.Un("!", A.Var(RETURN_FLAG)), reeval, None)] if returns else reeval
        if returns:
            cond = A.Bin("&&", cond, A.Un("!", A.Var(RETURN_FLAG)))
        ctx.emit(A.While(cond, body, inv))


def _assigned_params(fn: C.CFunction) -> list[str]:
    names = {p.name for p in fn.params if not p.const}
    hit = []
    for s in C.walk_stmt(fn.body):
        for top in C.stmt_exprs(s):
            for e in C.walk_expr(top):
                if isinstance(e, C.Assign) and e.target in names and e.target not in hit:
                    hit.append(e.target)
    return [p.name for p in fn.params if p.name in hit]


def _rename(node, mapping: dict):
    """Copy of a C statement/expression with local names renamed."""
    if isinstance(node, C.Name):
        return C.Name(mapping.get(node.name, node.name), loc=node.loc)
    if isinstance(node, C.Assign):
        return C.Assign(mapping.get(node.target, node.target), _rename(node.value, mapping), node.op, loc=node.loc)
    if isinstance(node, C.BinOp):
        return C.BinOp(node.op, _rename(node.left, mapping), _rename(node.right, mapping), loc=node.loc)
    if isinstance(node, C.Unary):
        return C.Unary(node.op, _rename(node.operand, mapping), loc=node.loc)
    if isinstance(node, C.Call):
        return C.Call(node.func, [_rename(a, mapping) for a in node.args], loc=node.loc)
    if isinstance(node, C.ExprStmt):
        return C.ExprStmt(_rename(node.expr, mapping), loc=node.loc)
    if isinstance(node, C.LocalDecl):
        return C.LocalDecl(node.name, node.const, _rename(node.init, mapping) if node.init else None, node.ctype, loc=node.loc)
    if isinstance(node, C.Return):
        return C.Return(_rename(node.value, mapping) if node.value is not None else None, loc=node.loc)
    if isinstance(node, C.If):
        return C.If(_rename(node.cond, mapping), _rename(node.then, mapping),
                    _rename(node.else_, mapping) if node.else_ is not None else None, loc=node.loc)
    if isinstance(node, C.While):
        return C.While(_rename(node.cond, mapping), _rename(node.body, mapping),
                       _rename(node.invariant, mapping) if node.invariant is not None else None, loc=node.loc)
    if isinstance(node, C.Compound):
        return C.Compound([_rename(x, mapping) for x in node.items], loc=node.loc)
    return node


def _extract_function(fn: C.CFunction, program: C.CProgram, ctr: Counter):
    globals_ = frozenset(g.name for g in program.globals)
    ctx = ExtractionContext(ctr, fn, program, globals=globals_)
    fx = _FunctionExtractor(ctx)
    copies = _assigned_params(fn)
    body = fn.body
    prologue = []
    if copies:
        mapping = {p: f"local_{p}" for p in copies}
        body = _rename(body, mapping)
        prologue = [A.VarDecl("Int", mapping[p], A.Var(p)) for p in copies]
    inner = prologue + fx.sub_block(body.items)
    call = A.Method("Int", "call", [A.Param("Int", p.name) for p in fn.params], [
        A.VarDecl("Bool", RETURN_FLAG, A.BoolC(False)),
        A.VarDecl("Int", FUNC_RESULT, A.IntC(0)),
        A.Block(inner),
        A.Return(A.Var(FUNC_RESULT)),
    ])
    methods = [call] + list(ctx.helper_registry.values())
    iface = A.Interface(f"I_{fn.name}", [m.signature() for m in methods])
    cls = A.ClassDecl(f"C_{fn.name}", [A.Param("Global", "global")], [iface.name], [], methods)
    return iface, cls


def _global_decls(program: C.CProgram):
    iface = A.Interface("Global")
    cls = A.ClassDecl("Global", [], ["Global"])
    for g in program.globals:
        get = A.Method("Int", f"get_{g.name}", [], [A.Return(A.FieldRef(g.name))])
        set_ = A.Method("Unit", f"set_{g.name}", [A.Param("Int", "value")],
                        [A.Assign(A.FieldRef(g.name), A.Var("value"))])
        cls.fields.append(A.FieldDecl("Int", g.name, A.IntC(g.initial)))
        cls.methods += [get, set_]
        iface.methods += [get.signature(), set_.signature()]
    return iface, cls


def _model_functions(program: C.CProgram) -> list[A.FunctionDef]:
    from .absir.parser import parse_model

    out = []
    for d in program.model_fn_defs:
        out += parse_model(d).functions
    return out


def _main_block(program: C.CProgram) -> list:
    main = program.function("main")
    if main is None:
        return []
    return [
        A.VarDecl("Global", "g", A.New("Global", ())),
        A.VarDecl("I_main", "m", A.New("C_main", (A.Var("g"),))),
        A.VarDecl("Fut<Int>", "r", A.AsyncCall(A.Var("m"), "call", tuple(A.IntC(0) for _ in main.params))),
        A.Await([A.Var("r")]),
    ]


def extract_structure(program: C.CProgram, module: str = "TestModule") -> A.AbsModel:
    """Model extraction without any specification synthesis."""
    diags = [d for d in validate_subset(program) if d.severity == "error"]
    if diags:
        raise SubsetViolation(diags)
    ctr = Counter()
    model = A.AbsModel(module=module, functions=_model_functions(program))
    gi, gc = _global_decls(program)
    model.interfaces.append(gi)
    model.classes.append(gc)
    for fn in program.functions:
        i, c = _extract_function(fn, program, ctr)
        model.interfaces.append(i)
        model.classes.append(c)
    model.main = _main_block(program)
    return model


# -- specification synthesis -----------------------------------------------------------


def _add_spec(specs: list, spec: A.Spec) -> None:
    if spec not in specs:
        specs.append(spec)


def _function_classes(model: A.AbsModel):
    for c in model.classes:
        if any(p.name == "global" for p in c.params) and c.name != "Global":
            yield c


def synthesize_global_object_specs(model: A.AbsModel) -> A.AbsModel:
    nonnull = A.Bin("!=", A.FieldRef("global"), A.NullC())
    for c in _function_classes(model):
        _add_spec(c.specs, A.Spec("Requires", nonnull))
        _add_spec(c.specs, A.Spec("ObjInv", nonnull))
    return model


_OP_RE = re.compile(r"^op_(plus|minus|times|div|lt|gt|le|ge|eq|neq)_(val|fut)_(val|fut)$")


def _param_value(p: A.Param) -> A.Expr:
    return A.FnApp("valueOf", (A.Var(p.name),)) if A.is_future_type(p.type) else A.Var(p.name)


def synthesize_operator_postconditions(model: A.AbsModel) -> A.AbsModel:
    for i in model.interfaces:
        for sig in i.methods:
            m = _OP_RE.match(sig.name)
            if m is None or len(sig.params) != 2:
                continue
            op = OP_SYMBOLS[m.group(1)]
            e = A.Bin(op, _param_value(sig.params[0]), _param_value(sig.params[1]))
            if op in COMPARISONS:
                e = A.IfE(e, A.IntC(1), A.IntC(0))
            _add_spec(sig.specs, A.Spec("Ensures", A.Bin("==", A.Var("result"), e)))
    return model


def spec_expr(e: C.Expr, subst: Optional[dict] = None) -> A.Expr:
    """Translate a C specification expression; ``subst`` maps parameter names."""
    subst = subst or {}
    if isinstance(e, C.IntLit):
        return A.IntC(e.value)
    if isinstance(e, C.Name):
        return subst.get(e.name, A.Var(e.name))
    if isinstance(e, C.ResultRef):
        return A.Var("result")
    if isinstance(e, C.BinOp):
        return A.Bin(e.op, spec_expr(e.left, subst), spec_expr(e.right, subst))
    if isinstance(e, C.Unary) and e.op == "!":
        return A.Un("!", spec_expr(e.operand, subst))
    if isinstance(e, C.Unary) and e.op == "-":
        inner = spec_expr(e.operand, subst)
        return A.IntC(-inner.value) if isinstance(inner, A.IntC) else A.Bin("-", A.IntC(0), inner)
    if isinstance(e, C.Call):
        return A.FnApp(e.func, tuple(spec_expr(a, subst) for a in e.args))
    raise ContractTranslationError(f"cannot translate specification expression {e!r}")


def _call_helper_shape(name: str, program: C.CProgram, n_params: int):
    """(callee, arg kinds, side-effect count) for a call helper name, or None."""
    for f in program.functions:
        prefix = f"call_{f.name}_"
        if not name.startswith(prefix):
            continue
        parts = name[len(prefix):].split("_")
        if not parts[-1].isdigit():
            continue
        kinds = parts[:-1]
        if len(kinds) == len(f.params) and all(k in ("val", "fut") for k in kinds) \
                and len(kinds) + int(parts[-1]) == n_params:
            return f, kinds, int(parts[-1])
    return None


def translate_function_contracts(model: A.AbsModel, program: C.CProgram) -> A.AbsModel:
    globals_ = {g.name for g in program.globals}
    for fn in program.functions:
        c = fn.contract
        if c is None:
            continue
        params = {p.name for p in fn.params}
        for clause in (c.requires, c.ensures):
            if clause is None:
                continue
            for sub in C.walk_expr(clause):
                if isinstance(sub, C.Name) and sub.name in globals_ and sub.name not in params:
                    raise ContractTranslationError(
                        f"contract of '{fn.name}' mentions global '{sub.name}'")
        i = model.interface(f"I_{fn.name}")
        if i is not None and i.method("call") is not None:
            sig = i.method("call")
            if c.requires is not None:
                _add_spec(sig.specs, A.Spec("Requires", spec_expr(c.requires)))
            if c.ensures is not None:
                _add_spec(sig.specs, A.Spec("Ensures", spec_expr(c.ensures)))
    for i in model.interfaces:
        for sig in i.methods:
            shape = _call_helper_shape(sig.name, program, len(sig.params))
            if shape is None:
                continue
            fn, kinds, _ = shape
            if fn.contract is None:
                continue
            subst = {p.name: _param_value(sig.params[k]) for k, p in enumerate(fn.params)}
            if fn.contract.requires is not None:
                _add_spec(sig.specs, A.Spec("Requires", spec_expr(fn.contract.requires, subst)))
            if fn.contract.ensures is not None:
                _add_spec(sig.specs, A.Spec("Ensures", spec_expr(fn.contract.ensures, subst)))
    return model


def _eval_c(e: C.Expr, env: dict) -> Optional[int]:
    """Evaluate a closed C spec expression; None when it needs a model function."""
    if isinstance(e, C.IntLit):
        return e.value
    if isinstance(e, C.Name):
        return env[e.name]
    if isinstance(e, C.Unary):
        v = _eval_c(e.operand, env)
        if v is None:
            return None
        return int(not v) if e.op == "!" else -v
    if isinstance(e, C.BinOp):
        a = _eval_c(e.left, env)
        if e.op == "&&" and a == 0:
            return 0
        if e.op == "||" and a not in (0, None):
            return 1
        b = _eval_c(e.right, env)
        if a is None or b is None:
            return None
        from .semantics import c_binop

        return c_binop(e.op, a, b)
    return None


def translate_strong_global_invariants(model: A.AbsModel, program: C.CProgram) -> A.AbsModel:
    for g in program.globals:
        if g.strong_invariant is None:
            continue
        inv = g.strong_invariant
        if _eval_c(inv, {g.name: g.initial}) == 0:
            raise InvariantError(f"initial value {g.initial} of '{g.name}' violates its strong invariant")

        def at(e: A.Expr) -> A.Expr:
            return spec_expr(inv, {g.name: e})

        gi = model.interface("Global")
        gc = model.class_("Global")
        _add_spec(gc.specs, A.Spec("ObjInv", at(A.FieldRef(g.name))))
        if gi.method(f"get_{g.name}") is not None:
            _add_spec(gi.method(f"get_{g.name}").specs, A.Spec("Ensures", at(A.Var("result"))))
        if gi.method(f"set_{g.name}") is not None:
            _add_spec(gi.method(f"set_{g.name}").specs, A.Spec("Requires", at(A.Var("value"))))
        for i in model.interfaces:
            if i.name == "Global":
                continue
            for sig in i.methods:
                if sig.name == f"get_global_{g.name}":
                    _add_spec(sig.specs, A.Spec("Ensures", at(A.Var("result"))))
                elif sig.name == f"set_global_{g.name}_val":
                    _add_spec(sig.specs, A.Spec("Requires", at(A.Var("value"))))
                elif sig.name == f"set_global_{g.name}_fut":
                    _add_spec(sig.specs, A.Spec("Requires", at(A.FnApp("valueOf", (A.Var("fut_arg"),)))))
    return model


def extract_model(program: C.CProgram, module: str = "TestModule") -> A.AbsModel:
    model = extract_structure(program, module)
    synthesize_global_object_specs(model)
    synthesize_operator_postconditions(model)
    translate_function_contracts(model, program)
    translate_strong_global_invariants(model, program)
    return model


def extract_source(text: str, module: str = "TestModule") -> A.AbsModel:
    return extract_model(parse_translation_unit(text), module)
