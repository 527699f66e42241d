"""Bit-accurate semantics of the fine-grained operations.

Values are plain Python ints holding the sign-extended contents of a register
of the given width.
"""

from __future__ import annotations

from .errors import DivByZero
from .frontend.ast import wrap

RELATIONS = {
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
}
REL_OF_SYMBOL = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge", "==": "eq", "!=": "ne"}
ARITH_OF_SYMBOL = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise DivByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def apply(op: str, args: list[int], width: int) -> int:
    """Evaluate ``op`` (``add``, ``cmp.lt``, ``mux`` ...) and wrap to ``width``."""
    if op == "add":
        raw = args[0] + args[1]
    elif op == "sub":
        raw = args[0] - args[1]
    elif op == "mul":
        raw = args[0] * args[1]
    elif op == "div":
        raw = trunc_div(args[0], args[1])
    elif op.startswith("cmp."):
        raw = int(RELATIONS[op[4:]](args[0], args[1]))
    elif op == "mux":
        raw = args[1] if args[0] != 0 else args[2]
    else:
        raise ValueError(f"unknown operation {op!r}")
    return wrap(raw, width)
