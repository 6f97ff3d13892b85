"""Integer operator semantics shared by the interpreter, the extractor's
constant checks, and the tests' reference evaluators.

Division truncates toward zero, as in C, for both the C source and the model.
"""

from __future__ import annotations


class DivisionByZero(ArithmeticError):
    pass


def c_div(a: int, b: int) -> int:
    if b == 0:
        raise DivisionByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a: int, b: int) -> int:
    return a - b * c_div(a, b)


def c_binop(op: str, a: int, b: int) -> int:
    """C semantics on ints: comparisons and logical operators yield 0/1."""
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
        return int(a < b)
    if op == ">":
        return int(a > b)
    if op == "<=":
        return int(a <= b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    raise ValueError(f"unknown operator {op!r}")
