"""C-subset frontend: parsing, printing and subset validation."""

from .ast import CProgram
from .parser import parse_raw, parse_spec_expr, parse_translation_unit
from .printer import print_program
from .validate import validate_subset

__all__ = [
    "CProgram",
    "parse_raw",
    "parse_spec_expr",
    "parse_translation_unit",
    "print_program",
    "validate_subset",
]
