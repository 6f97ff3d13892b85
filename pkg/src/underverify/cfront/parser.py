"""Recursive-descent parser for the C subset with ACSL-style annotations.

The parser is deliberately lenient about a few out-of-fragment constructs
(pointer/array/float declarations, unary operators, ``%``, compound
assignment, ``const`` globals) so that :func:`validate_subset` can report them
with precise positions. Constructs it cannot represent at all (``for``,
``struct``, casts, ...) raise :class:`SubsetViolation` or :class:`ParseError`
directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import Diagnostic, ParseError, SubsetViolation, UnknownIdentifier
from .ast import (
    Assign,
    BinOp,
    Call,
    CFunction,
    Compound,
    Contract,
    CProgram,
    Expr,
    ExprStmt,
    GlobalDecl,
    If,
    IntLit,
    LocalDecl,
    Name,
    Param,
    ResultRef,
    Return,
    Stmt,
    Unary,
    While,
    walk_expr,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<annot_line>//@[^\n]*)
  | (?P<annot_block>/\*@.*?\*/)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<id>\\?[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|&&|\|\||==|!=|<=|>=|->|[-+*/%<>=!~&|^?:;,(){}\[\].])
    """,
    re.VERBOSE | re.DOTALL,
)

UNSUPPORTED_KEYWORDS = {
    "for", "do", "switch", "case", "default", "break", "continue", "goto",
    "struct", "union", "enum", "typedef", "sizeof", "static", "extern",
    "unsigned", "signed", "long", "short", "char", "float", "double",
    "volatile", "register", "auto", "inline",
}
TYPE_WORDS = {"int", "void", "float", "double", "char", "long", "short", "unsigned", "signed"}


@dataclass
class Token:
    kind: str  # id | int | op | annot | eof
    text: str
    line: int
    col: int


def _clean_annotation(raw: str) -> str:
    if raw.startswith("//@"):
        return raw[3:].strip()
    body = raw[3:-2]
    if body.endswith("@"):
        body = body[:-1]
    lines = [ln.strip() for ln in body.splitlines()]
    lines = [ln[1:].strip() if ln.startswith("@") else ln for ln in lines]
    return " ".join(ln for ln in lines if ln)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    last_annot_line = -2
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "annot_line":
            cleaned = _clean_annotation(value)
            if tokens and tokens[-1].kind == "annot" and last_annot_line == line - 1:
                # consecutive //@ lines form one annotation
                tokens[-1].text += " " + cleaned
            else:
                tokens.append(Token("annot", cleaned, line, col))
            last_annot_line = line
        elif kind == "annot_block":
            tokens.append(Token("annot", _clean_annotation(value), line, col))
        elif kind in ("int", "id", "op"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- ACSL clauses ------------------------------------------------------------


@dataclass
class Clause:
    kind: str  # requires | ensures | assigns | strong_invariant | loop_invariant | abs_def
    text: str
    line: int
    col: int


_CLAUSE_PREFIXES = [
    ("strong global invariant", "strong_invariant"),
    ("global invariant", "weak_invariant"),
    ("loop invariant", "loop_invariant"),
    ("loop assigns", "loop_assigns"),
    ("requires", "requires"),
    ("ensures", "ensures"),
    ("assigns", "assigns"),
]


def split_clauses(tok: Token) -> list[Clause]:
    text = tok.text.strip()
    if text.startswith("ABS def"):
        body = text[len("ABS"):].strip()
        return [Clause("abs_def", body if body.endswith(";") else body + ";", tok.line, tok.col)]
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        for prefix, kind in _CLAUSE_PREFIXES:
            if part.startswith(prefix + " ") or part == prefix:
                out.append(Clause(kind, part[len(prefix):].strip(), tok.line, tok.col))
                break
        else:
            raise ParseError(f"unsupported annotation clause: {part!r}", tok.line, tok.col)
    return out


# -- expression parser (shared by C code and spec expressions) --------------

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class _Parser:
    def __init__(self, tokens: list[Token], spec: bool = False):
        self.toks = tokens
        self.i = 0
        self.spec = spec

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def violation(self, msg: str, construct: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise SubsetViolation([Diagnostic(t.line, t.col, "error", msg, construct)])

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id" or t.text.startswith("\\"):
            self.error(f"expected identifier, found {t.text!r}")
        if t.text in UNSUPPORTED_KEYWORDS:
            self.violation(f"'{t.text}' is outside the supported C fragment", t.text)
        return self.advance()

    # expressions
    def expression(self) -> Expr:
        return self.assignment()

    def assignment(self) -> Expr:
        t = self.tok
        if (
            not self.spec
            and t.kind == "id"
            and self.peek().kind == "op"
            and self.peek().text in ("=", "+=", "-=", "*=", "/=", "%=")
        ):
            self.advance()
            op = self.advance().text
            value = self.assignment()
            return Assign(t.text, value, op, loc=(t.line, t.col))
        if self.at(",") and not self.spec:
            self.violation("comma operator is outside the supported C fragment", ",")
        return self.binary(0)

    def binary(self, level: int) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op_tok = self.advance()
            right = self.binary(level + 1)
            left = BinOp(op_tok.text, left, right, loc=(op_tok.line, op_tok.col))
        if self.at("?"):
            self.violation("conditional operator is outside the supported C fragment", "?:")
        return left

    def unary(self) -> Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("-", "!", "~", "+", "*", "&", "++", "--"):
            self.advance()
            operand = self.unary()
            return Unary(t.text, operand, loc=(t.line, t.col))
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.primary()
        if self.at("[") or self.at("->") or self.at(".") or self.at("++") or self.at("--"):
            self.violation(f"'{self.tok.text}' is outside the supported C fragment", self.tok.text)
        return e

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), loc=(t.line, t.col))
        if t.kind == "id":
            if t.text == "\\result":
                if not self.spec:
                    self.error("\\result outside a specification")
                self.advance()
                return ResultRef(loc=(t.line, t.col))
            if t.text.startswith("\\"):
                self.error(f"unsupported ACSL construct {t.text!r}")
            self.ident()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.assignment())
                    while self.at(","):
                        self.advance()
                        args.append(self.assignment())
                self.expect(")")
                return Call(t.text, args, loc=(t.line, t.col))
            return Name(t.text, loc=(t.line, t.col))
        if self.at("("):
            self.advance()
            if self.tok.kind == "id" and self.tok.text in TYPE_WORDS:
                self.violation("casts are outside the supported C fragment", "cast")
            e = self.expression()
            self.expect(")")
            return e
        self.error(f"unexpected token {t.text or 'end of input'!r}")


# -- spec expressions --------------------------------------------------------


def _spec_type(e: Expr, where: str) -> str:
    if isinstance(e, (IntLit, Name, ResultRef, Call)):
        return "int"
    if isinstance(e, Unary):
        if e.op == "!":
            if _spec_type(e.operand, where) != "bool":
                raise ParseError(f"'!' applied to a non-boolean in {where}", *(e.loc or (0, 0)))
            return "bool"
        if e.op == "-":
            if _spec_type(e.operand, where) != "int":
                raise ParseError(f"'-' applied to a boolean in {where}", *(e.loc or (0, 0)))
            return "int"
        raise ParseError(f"unsupported operator {e.op!r} in {where}", *(e.loc or (0, 0)))
    if isinstance(e, BinOp):
        lt, rt = _spec_type(e.left, where), _spec_type(e.right, where)
        if e.op in ("&&", "||"):
            if lt != "bool" or rt != "bool":
                raise ParseError(f"operands of {e.op!r} must be boolean in {where}", *(e.loc or (0, 0)))
            return "bool"
        if e.op in ("==", "!="):
            if lt != rt:
                raise ParseError(f"mismatched operand types for {e.op!r} in {where}", *(e.loc or (0, 0)))
            return "bool"
        if lt != "int" or rt != "int":
            raise ParseError(f"operands of {e.op!r} must be integers in {where}", *(e.loc or (0, 0)))
        if e.op in ("<", ">", "<=", ">="):
            return "bool"
        if e.op in ("+", "-", "*", "/"):
            return "int"
        raise ParseError(f"unsupported operator {e.op!r} in {where}", *(e.loc or (0, 0)))
    raise ParseError(f"unsupported construct in {where}")


def parse_spec_expr(
    text: str,
    names: Optional[set[str]] = None,
    functions: Optional[set[str]] = None,
    allow_result: bool = True,
    line: int = 1,
    col: int = 1,
) -> Expr:
    """Parse a boolean ACSL expression.

    When ``names``/``functions`` are given, every identifier must resolve to one
    of them (``\\result`` only when ``allow_result``).
    """
    toks = tokenize(text)
    for t in toks:
        t.line += line - 1
        if t.line == line:
            t.col += col - 1
    p = _Parser(toks, spec=True)
    e = p.expression()
    if p.tok.kind != "eof":
        p.error(f"unexpected trailing {p.tok.text!r}")
    if _spec_type(e, "specification") != "bool":
        raise ParseError("specification expressions must be boolean", line, col)
    if names is not None:
        for sub in walk_expr(e):
            pos = sub.loc or (line, col)
            if isinstance(sub, Name) and sub.name not in names:
                raise UnknownIdentifier(f"unknown identifier {sub.name!r}", *pos)
            if isinstance(sub, Call) and sub.func not in (functions or set()):
                raise UnknownIdentifier(f"unknown model function {sub.func!r}", *pos)
            if isinstance(sub, ResultRef) and not allow_result:
                raise UnknownIdentifier("\\result is only allowed in ensures clauses", *pos)
    return e


_MODEL_FN_RE = re.compile(r"def\s+\w+\s+([A-Za-z_]\w*)\s*\(")


def model_function_name(definition: str) -> str:
    m = _MODEL_FN_RE.match(definition.strip())
    if not m:
        raise ParseError(f"malformed ABS def: {definition!r}")
    return m.group(1)


# -- translation units -------------------------------------------------------


class _CParser(_Parser):
    def __init__(self, tokens: list[Token]):
        super().__init__(tokens)
        self.program = CProgram()
        self.pending: list[Clause] = []
        self.invariant_clauses: list[Clause] = []
        self.warnings: list[Diagnostic] = []

    def take_annotations(self) -> None:
        while self.tok.kind == "annot":
            tok = self.advance()
            for clause in split_clauses(tok):
                self.route_clause(clause)

    def route_clause(self, clause: Clause) -> None:
        if clause.kind == "abs_def":
            self.program.model_fn_defs.append(clause.text)
        elif clause.kind == "strong_invariant":
            self.invariant_clauses.append(clause)
        elif clause.kind == "weak_invariant":
            raise SubsetViolation([Diagnostic(
                clause.line, clause.col, "error",
                "weak global invariants are not supported; state them as requires/ensures",
                "global invariant")])
        elif clause.kind in ("assigns", "loop_assigns"):
            self.warnings.append(Diagnostic(clause.line, clause.col, "warning",
                                            f"{clause.kind.replace('_', ' ')} clause ignored", "assigns"))
            self.pending.append(clause)
        else:
            self.pending.append(clause)

    def parse_type(self) -> tuple[bool, str]:
        const = False
        words = []
        while self.tok.kind == "id" and (self.tok.text in TYPE_WORDS or self.tok.text == "const"):
            t = self.advance()
            if t.text == "const":
                const = True
            else:
                words.append(t.text)
        if not words:
            self.error(f"expected a type, found {self.tok.text!r}")
        ctype = " ".join(words)
        while self.at("*"):
            self.advance()
            ctype += "*"
        if self.at("const"):
            self.advance()
            const = True
        return const, ctype

    def parse(self) -> CProgram:
        while True:
            self.take_annotations()
            if self.tok.kind == "eof":
                break
            if self.at("#"):
                self.error("preprocessor directives are not supported")
            if self.tok.kind == "id" and self.tok.text in UNSUPPORTED_KEYWORDS - TYPE_WORDS:
                self.violation(f"'{self.tok.text}' is outside the supported C fragment", self.tok.text)
            self.top_level()
        if self.pending:
            c = self.pending[0]
            raise ParseError(f"dangling {c.kind} annotation", c.line, c.col)
        self.attach_invariants()
        self.program.warnings = self.warnings
        return self.program

    def top_level(self) -> None:
        const, ctype = self.parse_type()
        name_tok = self.ident()
        if self.at("("):
            self.function(ctype, name_tok)
            return
        if self.pending:
            c = self.pending[0]
            raise ParseError(f"{c.kind} annotation must precede a function", c.line, c.col)
        if self.at("["):
            self.advance()
            size = self.advance().text if self.tok.kind == "int" else ""
            self.expect("]")
            ctype += f"[{size}]"
        initial = 0
        if self.at("="):
            self.advance()
            neg = False
            if self.at("-"):
                self.advance()
                neg = True
            if self.tok.kind != "int":
                self.error("global initializers must be integer literals")
            initial = int(self.advance().text) * (-1 if neg else 1)
        self.expect(";")
        self.program.globals.append(
            GlobalDecl(name_tok.text, initial, None, ctype, const, loc=(name_tok.line, name_tok.col))
        )

    def params(self) -> list[Param]:
        self.expect("(")
        params: list[Param] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                const, ctype = self.parse_type()
                t = self.ident()
                if self.at("["):
                    self.advance()
                    self.expect("]")
                    ctype += "[]"
                params.append(Param(t.text, const, ctype, loc=(t.line, t.col)))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return params

    def function(self, ctype: str, name_tok: Token) -> None:
        params = self.params()
        self.take_annotations()
        if self.at(";"):
            # prototype: contracts wait for the definition
            self.advance()
            return
        contract = self.build_contract(params)
        body = self.compound()
        fn = CFunction(name_tok.text, params, ctype, contract, body, loc=(name_tok.line, name_tok.col))
        self.program.functions.append(fn)

    def build_contract(self, params: list[Param]) -> Optional[Contract]:
        clauses, self.pending = self.pending, []
        if not clauses:
            return None
        contract = Contract()
        for c in clauses:
            if c.kind == "loop_invariant":
                raise ParseError("loop invariant must precede a while loop", c.line, c.col)
            if c.kind in ("assigns", "loop_assigns"):
                contract.assigns.append(c.text)
                continue
            e = parse_spec_expr(c.text, line=c.line, col=c.col)
            if c.kind == "requires":
                contract.requires = e if contract.requires is None else BinOp("&&", contract.requires, e)
            else:
                contract.ensures = e if contract.ensures is None else BinOp("&&", contract.ensures, e)
        return contract

    def attach_invariants(self) -> None:
        for c in self.invariant_clauses:
            e = parse_spec_expr(c.text, line=c.line, col=c.col)
            mentioned = sorted({s.name for s in walk_expr(e) if isinstance(s, Name)})
            targets = [g for g in self.program.globals if g.name in mentioned]
            if not targets:
                raise UnknownIdentifier(f"strong invariant mentions no declared global: {c.text!r}", c.line, c.col)
            target = targets[0]
            if target.strong_invariant is not None:
                target.strong_invariant = BinOp("&&", target.strong_invariant, e)
            else:
                target.strong_invariant = e

    # statements
    def compound(self) -> Compound:
        t = self.expect("{")
        items: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            items.append(self.statement())
        self.expect("}")
        return Compound(items, loc=(t.line, t.col))

    def statement(self) -> Stmt:
        self.take_annotations()
        t = self.tok
        loop_inv = [c for c in self.pending if c.kind == "loop_invariant"]
        if self.pending and not (loop_inv and self.at("while")):
            c = self.pending[0]
            raise ParseError(f"misplaced {c.kind.replace('_', ' ')} annotation", c.line, c.col)
        if t.kind == "id" and t.text in UNSUPPORTED_KEYWORDS - TYPE_WORDS:
            self.violation(f"'{t.text}' is outside the supported C fragment", t.text)
        if self.at("{"):
            return self.compound()
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return Return(value, loc=(t.line, t.col))
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            else_ = None
            if self.at("else"):
                self.advance()
                else_ = self.statement()
            return If(cond, then, else_, loc=(t.line, t.col))
        if self.at("while"):
            self.advance()
            invariant = None
            clauses, self.pending = self.pending, []
            for c in clauses:
                e = parse_spec_expr(c.text, allow_result=False, line=c.line, col=c.col)
                invariant = e if invariant is None else BinOp("&&", invariant, e)
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            body = self.statement()
            return While(cond, body, invariant, loc=(t.line, t.col))
        if t.kind == "id" and (t.text in TYPE_WORDS or t.text == "const"):
            const, ctype = self.parse_type()
            name = self.ident()
            if self.at("["):
                self.advance()
                if self.tok.kind == "int":
                    self.advance()
                self.expect("]")
                ctype += "[]"
            init = None
            if self.at("="):
                self.advance()
                init = self.expression()
            self.expect(";")
            return LocalDecl(name.text, const, init, ctype, loc=(name.line, name.col))
        if self.at(";"):
            self.violation("empty statements are outside the supported C fragment", ";")
        e = self.expression()
        self.expect(";")
        return ExprStmt(e, loc=(t.line, t.col))


def parse_raw(source_text: str) -> CProgram:
    """Parse without subset validation; out-of-fragment constructs stay in the AST."""
    return _CParser(tokenize(source_text)).parse()


def parse_translation_unit(source_text: str, check_subset: bool = True) -> CProgram:
    program = parse_raw(source_text)
    if check_subset:
        from .validate import validate_subset

        errors = [d for d in validate_subset(program) if d.severity == "error"]
        if errors:
            raise SubsetViolation(errors)
    return program
