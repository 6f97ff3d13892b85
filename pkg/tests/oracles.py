"""Independent oracles, computed without the package under test."""

from functools import lru_cache


def fib(n: int) -> int:
    a, b = 1, 1
    for _ in range(n - 2):
        a, b = b, a + b
    return 1 if n <= 2 else b


def x_plus_id_set_x(v: int) -> set:
    """Results of ``x = 0; return x + id_set_x(v);`` under both operand orders.

    Reading ``x`` first sees 0; calling first sets ``x`` to 1 before the read.
    """
    return {0 + v, 1 + v}


def pred_or_id(v: int) -> set:
    """``x = 0; return (v - x) + id_set_x(0);``: ``x`` is read as 0 or 1."""
    return {v - 0 + 0, v - 1 + 0}


@lru_cache(maxsize=None)
def one_to_fib(n: int) -> frozenset:
    """All results of the C program over every unsequenced evaluation order."""
    if n > 3:
        return frozenset(a + b for a in one_to_fib(n - 2) for c in one_to_fib(n - 1) for b in pred_or_id(c))
    if n == 3:
        return frozenset(x_plus_id_set_x(1))
    return frozenset({1})
