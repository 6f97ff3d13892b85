"""Active-object model IR: parser, printer, type checker and normalization."""

from .ir import AbsModel
from .normalize import normalize
from .parser import parse_expr, parse_model
from .printer import print_expr, print_model
from .typecheck import typecheck

__all__ = ["AbsModel", "normalize", "parse_expr", "parse_model", "print_expr", "print_model", "typecheck"]
