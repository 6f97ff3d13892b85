"""Recursive-descent parser for the textual model syntax.

After parsing, bare identifiers that name a field of the enclosing class and
are not shadowed by a parameter or local are rewritten to ``this.f``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
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
    FieldDecl,
    FieldRef,
    FnApp,
    FunctionDef,
    Get,
    If,
    IfE,
    IntC,
    Interface,
    Method,
    MethodSig,
    New,
    NullC,
    Param,
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

KEYWORDS = {
    "module", "data", "def", "interface", "class", "implements", "extends", "if", "then", "else",
    "while", "return", "await", "new", "this", "null", "True", "False", "unit", "skip", "import",
    "export",
}
SPEC_KINDS = ("ObjInv", "Ensures", "Requires", "WhileInv")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/%<>=!?&.,;:(){}\[\]|])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int
    pos: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            toks.append(Tok(kind, s, line, pos - lstart + 1, pos))
        nl = s.count("\n")
        if nl:
            line += nl
            lstart = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - lstart + 1, pos))
    return toks


_BIN_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%")]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers --
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("op", "kw", "ident") and t.text in texts

    def error(self, msg: str, tok: Tok | None = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected '{text}', found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return t.text

    # -- types --
    def type_(self) -> str:
        name = self.ident()
        if self.at("<"):
            self.i += 1
            inner = self.type_()
            self.expect(">")
            return f"{name}<{inner}>"
        return name

    def looks_like_decl(self) -> bool:
        if self.tok.kind != "ident":
            return False
        j = self.i + 1
        if self.toks[j].text == "<":
            depth = 0
            while j < len(self.toks):
                t = self.toks[j]
                if t.text == "<":
                    depth += 1
                elif t.text == ">":
                    depth -= 1
                    if depth == 0:
                        break
                elif t.kind != "ident":
                    return False
                j += 1
            j += 1
        return self.toks[j].kind == "ident"

    # -- expressions --
    def expr(self):
        if self.at("if"):
            return self.if_expr()
        return self.binary(0)

    def if_expr(self):
        self.expect("if")
        c = self.expr()
        self.expect("then")
        a = self.expr()
        self.expect("else")
        b = self.expr()
        return IfE(c, a, b)

    def binary(self, level: int):
        if level == len(_BIN_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BIN_LEVELS[level]:
            op = self.tok.text
            self.i += 1
            right = self.binary(level + 1)
            left = Bin(op, left, right)
        return left

    def unary(self):
        if self.at("!"):
            self.i += 1
            return Un("!", self.unary())
        if self.at("-"):
            self.i += 1
            if self.tok.kind == "num" and not self.peek().text in (".", "!"):
                v = int(self.tok.text)
                self.i += 1
                return IntC(-v)
            return Un("-", self.unary())
        return self.postfix()

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(")")
        return tuple(out)

    def postfix(self):
        e = self.primary()
        while True:
            if self.at("."):
                self.i += 1
                name = self.ident() if self.tok.kind == "ident" else self.error("expected member name")
                if name == "get" and not self.at("("):
                    e = Get(e)
                elif self.at("("):
                    e = SyncCall(e, name, self.args())
                elif isinstance(e, This):
                    e = FieldRef(name)
                else:
                    self.error(f"unexpected member access '.{name}'")
            elif self.at("!") and self.peek().kind == "ident" and self.peek(2).text == "(":
                self.i += 1
                name = self.ident()
                e = AsyncCall(e, name, self.args())
            else:
                return e

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return IntC(int(t.text))
        if self.at("True"):
            self.i += 1
            return BoolC(True)
        if self.at("False"):
            self.i += 1
            return BoolC(False)
        if self.at("null"):
            self.i += 1
            return NullC()
        if self.at("unit"):
            self.i += 1
            return UnitC()
        if self.at("this"):
            self.i += 1
            return This()
        if self.at("if"):
            return self.if_expr()
        if self.at("new"):
            self.i += 1
            cls = self.ident()
            return New(cls, self.args())
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.i += 1
            if self.at("("):
                name = "valueOf" if t.text in ("valueOf", "valueof") else t.text
                return FnApp(name, self.args())
            return Var(t.text)
        self.error(f"unexpected '{t.text or 'end of input'}' in expression")

    # -- specs --
    def specs(self) -> list[Spec]:
        out = []
        while self.at("["):
            self.i += 1
            if self.ident() != "Spec":
                self.error("expected 'Spec' annotation", self.toks[self.i - 1])
            self.expect(":")
            kind_tok = self.tok
            kind = self.ident()
            if kind not in SPEC_KINDS:
                self.error(f"unknown specification kind '{kind}'", kind_tok)
            self.expect("(")
            e = self.expr()
            self.expect(")")
            self.expect("]")
            out.append(Spec(kind, e))
        return out

    # -- statements --
    def block(self) -> list:
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            out.append(self.stmt())
        self.expect("}")
        return out

    def body(self) -> list:
        if self.at("{"):
            return self.block()
        return [self.stmt()]

    def stmt(self):
        t = self.tok
        loc = (t.line, t.col)
        specs = self.specs()
        if specs:
            if not self.at("while") or len(specs) != 1 or specs[0].kind != "WhileInv":
                self.error("only a single WhileInv annotation may precede a statement", t)
            s = self.stmt()
            s.invariant = specs[0].expr
            return s
        if self.at("{"):
            return Block(self.block(), loc=loc)
        if self.accept("if"):
            self.expect("(")
            c = self.expr()
            self.expect(")")
            then = self.body()
            else_ = None
            if self.accept("else"):
                else_ = self.body()
            return If(c, then, else_, loc=loc)
        if self.accept("while"):
            self.expect("(")
            c = self.expr()
            self.expect(")")
            return While(c, self.body(), loc=loc)
        if self.accept("return"):
            e = self.expr()
            self.expect(";")
            return Return(e, loc=loc)
        if self.accept("skip"):
            self.expect(";")
            return Skip(loc=loc)
        if self.accept("await"):
            polls = [self.poll()]
            while self.accept("&"):
                polls.append(self.poll())
            self.expect(";")
            return Await(polls, loc=loc)
        if self.looks_like_decl():
            ty = self.type_()
            name = self.ident()
            init = None
            if self.accept("="):
                init = self.expr()
            self.expect(";")
            return VarDecl(ty, name, init, loc=loc)
        e = self.expr()
        if self.accept("="):
            if not isinstance(e, (Var, FieldRef)):
                self.error("left-hand side of assignment must be a variable or field", t)
            v = self.expr()
            self.expect(";")
            return Assign(e, v, loc=loc)
        self.expect(";")
        return ExprStmt(e, loc=loc)

    def poll(self):
        e = self.postfix()
        self.expect("?")
        return e

    # -- declarations --
    def params(self) -> list[Param]:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                ty = self.type_()
                out.append(Param(ty, self.ident()))
                if not self.accept(","):
                    break
        self.expect(")")
        return out

    def interface(self) -> Interface:
        self.expect("interface")
        name = self.ident()
        if self.accept("extends"):
            self.ident()
            while self.accept(","):
                self.ident()
        self.expect("{")
        out = Interface(name)
        while not self.at("}"):
            specs = self.specs()
            ret = self.type_()
            mname = self.ident()
            ps = self.params()
            self.expect(";")
            out.methods.append(MethodSig(ret, mname, ps, specs))
        self.expect("}")
        return out

    def class_(self, specs) -> ClassDecl:
        self.expect("class")
        name = self.ident()
        ps = self.params() if self.at("(") else []
        impl = []
        if self.accept("implements"):
            impl.append(self.ident())
            while self.accept(","):
                impl.append(self.ident())
        c = ClassDecl(name, ps, impl, specs=specs)
        self.expect("{")
        while not self.at("}"):
            mspecs = self.specs()
            ty = self.type_()
            mname = self.ident()
            if self.at("("):
                mps = self.params()
                c.methods.append(Method(ty, mname, mps, self.block(), mspecs))
            else:
                if mspecs:
                    self.error("specifications on field declarations are not supported")
                init = self.expr() if self.accept("=") else None
                self.expect(";")
                c.fields.append(FieldDecl(ty, mname, init))
        self.expect("}")
        return c

    def model(self) -> AbsModel:
        m = AbsModel(module="M", data_decls=[])
        if self.accept("module"):
            parts = [self.ident()]
            while self.accept("."):
                parts.append(self.ident())
            m.module = ".".join(parts)
            self.expect(";")
        main_seen = False
        while self.tok.kind != "eof":
            if self.at("import", "export"):
                while not self.at(";"):
                    self.i += 1
                self.i += 1
            elif self.at("data"):
                start = self.tok.pos
                while not self.at(";"):
                    if self.tok.kind == "eof":
                        self.error("unterminated data declaration")
                    self.i += 1
                end = self.tok.pos + 1
                self.i += 1
                m.data_decls.append(" ".join(self.text[start:end].split()))
            elif self.at("def"):
                self.i += 1
                ret = self.type_()
                name = self.ident()
                ps = self.params()
                self.expect("=")
                body = self.expr()
                self.expect(";")
                m.functions.append(FunctionDef(ret, name, ps, body))
            elif self.at("interface"):
                m.interfaces.append(self.interface())
            elif self.at("[") or self.at("class"):
                specs = self.specs()
                if not self.at("class"):
                    self.error("annotations at top level must precede a class")
                m.classes.append(self.class_(specs))
            elif self.at("{"):
                if main_seen:
                    self.error("more than one main block")
                main_seen = True
                m.main = self.block()
            else:
                self.error(f"unexpected '{self.tok.text}' at top level")
        return m


# -- scope resolution ---------------------------------------------------------


def _res(e, scope: set, fields: set):
    if isinstance(e, Var):
        if e.name not in scope and e.name in fields:
            return FieldRef(e.name)
        return e
    if isinstance(e, Bin):
        return Bin(e.op, _res(e.left, scope, fields), _res(e.right, scope, fields))
    if isinstance(e, Un):
        return Un(e.op, _res(e.operand, scope, fields))
    if isinstance(e, IfE):
        return IfE(_res(e.cond, scope, fields), _res(e.then, scope, fields), _res(e.else_, scope, fields))
    if isinstance(e, FnApp):
        return FnApp(e.name, tuple(_res(a, scope, fields) for a in e.args))
    if isinstance(e, AsyncCall):
        return AsyncCall(_res(e.target, scope, fields), e.method, tuple(_res(a, scope, fields) for a in e.args))
    if isinstance(e, SyncCall):
        return SyncCall(_res(e.target, scope, fields), e.method, tuple(_res(a, scope, fields) for a in e.args))
    if isinstance(e, Get):
        return Get(_res(e.future, scope, fields))
    if isinstance(e, New):
        return New(e.cls, tuple(_res(a, scope, fields) for a in e.args))
    return e


def _res_stmts(stmts: list, scope: set, fields: set) -> None:
    scope = set(scope)
    for s in stmts:
        if isinstance(s, VarDecl):
            if s.init is not None:
                s.init = _res(s.init, scope, fields)
            scope.add(s.name)
        elif isinstance(s, Assign):
            s.target = _res(s.target, scope, fields)
            s.value = _res(s.value, scope, fields)
        elif isinstance(s, ExprStmt):
            s.value = _res(s.value, scope, fields)
        elif isinstance(s, Await):
            s.polls = [_res(p, scope, fields) for p in s.polls]
        elif isinstance(s, Return):
            s.value = _res(s.value, scope, fields)
        elif isinstance(s, If):
            s.cond = _res(s.cond, scope, fields)
            _res_stmts(s.then, scope, fields)
            if s.else_ is not None:
                _res_stmts(s.else_, scope, fields)
        elif isinstance(s, While):
            s.cond = _res(s.cond, scope, fields)
            if s.invariant is not None:
                s.invariant = _res(s.invariant, scope, fields)
            _res_stmts(s.body, scope, fields)
        elif isinstance(s, Block):
            _res_stmts(s.body, scope, fields)


def resolve_fields(model: AbsModel) -> AbsModel:
    for c in model.classes:
        fields = set(c.field_names())
        for s in c.specs:
            s.expr = _res(s.expr, set(), fields)
        for f in c.fields:
            if f.init is not None:
                f.init = _res(f.init, set(), fields)
        for m in c.methods:
            scope = {p.name for p in m.params} | {"result"}
            for s in m.specs:
                s.expr = _res(s.expr, scope, fields)
            _res_stmts(m.body, {p.name for p in m.params}, fields)
    return model


def parse_model(text: str) -> AbsModel:
    return resolve_fields(_Parser(text).model())


def parse_expr(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected '{p.tok.text}' after expression")
    return e
