"""Syntax tree for the behavioral DSL.

Source positions are carried on every node but excluded from equality, so two
programs compare equal exactly when they are structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

WIDTHS = {"int8": 8, "int12": 12, "int14": 14, "int16": 16}
TYPE_KINDS = (*WIDTHS, "void")
MAX_WIDTH = 16


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class SignalType:
    kind: str
    array_len: int | None = None

    def __post_init__(self):
        if self.kind not in TYPE_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.kind == "void" and self.array_len is not None:
            raise ValueError("void cannot be an array")
        if self.array_len is not None and self.array_len < 1:
            raise ValueError("array length must be >= 1")

    @property
    def width(self) -> int | None:
        return WIDTHS.get(self.kind)

    @property
    def is_void(self) -> bool:
        return self.kind == "void"

    @property
    def is_array(self) -> bool:
        return self.array_len is not None

    def element(self) -> "SignalType":
        return SignalType(self.kind)

    def __str__(self) -> str:
        if self.array_len is None:
            return self.kind
        return f"{self.kind}[{self.array_len}]"

    @classmethod
    def parse(cls, text: str) -> "SignalType":
        text = text.strip()
        if text.endswith("]") and "[" in text:
            kind, _, n = text[:-1].partition("[")
            if not n.isdigit():
                raise ValueError(f"bad array length in {text!r}")
            return cls(kind, int(n))
        return cls(text)


@dataclass(frozen=True)
class Pragma:
    kind: str  # "FuncOperator" | "ShareName"
    name: str | None = None

    FUNC_OPERATOR = "FuncOperator"
    SHARE_NAME = "ShareName"

    def __post_init__(self):
        if self.kind not in (self.FUNC_OPERATOR, self.SHARE_NAME):
            raise ValueError(f"unknown pragma kind {self.kind!r}")
        if (self.kind == self.SHARE_NAME) != (self.name is not None):
            raise ValueError("ShareName pragmas carry a name, FuncOperator pragmas do not")

    def render(self) -> str:
        if self.kind == self.FUNC_OPERATOR:
            return "/* Cyber func = operator */"
        return f"/* Cyber share name = {self.name} */"


# expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Index:
    name: str
    index: "Expr"
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / < <= > >= == !=
    left: "Expr"
    right: "Expr"
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    pos: Pos | None = field(default=None, compare=False)


Expr = Union[IntLit, VarRef, Index, Neg, BinOp, Call]

ARITH_OPS = ("+", "-", "*", "/")
REL_OPS = ("<", "<=", ">", ">=", "==", "!=")


# statements

@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Decl:
    type: SignalType
    name: str
    init: "Expr | tuple[Expr, ...] | None" = None
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assign:
    name: str
    index: "Expr | None"
    value: "Expr"
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: Block
    orelse: Block | None = None
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class For:
    var: str
    init: "Expr"
    rel: str
    bound: "Expr"
    step_op: str  # "+=" | "-="
    step: "Expr"
    body: Block
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Return:
    value: "Expr | None"
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Call
    pos: Pos | None = field(default=None, compare=False)


Stmt = Union[Block, Decl, Assign, If, For, Return, ExprStmt]


@dataclass(frozen=True)
class Param:
    name: str
    type: SignalType
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[Param, ...]
    ret: SignalType
    body: Block
    pragmas: tuple[Pragma, ...] = ()
    pos: Pos | None = field(default=None, compare=False)

    @property
    def is_operator(self) -> bool:
        return any(p.kind == Pragma.FUNC_OPERATOR for p in self.pragmas)

    @property
    def share_name(self) -> str | None:
        for p in self.pragmas:
            if p.kind == Pragma.SHARE_NAME:
                return p.name
        return None

    @property
    def signature(self) -> "Signature":
        return Signature(self.name, tuple(p.type for p in self.params), self.ret)


@dataclass(frozen=True, order=True)
class Signature:
    name: str
    params: tuple[SignalType, ...]
    ret: SignalType

    def __str__(self) -> str:
        return f"{self.name}({','.join(map(str, self.params))})->{self.ret}"

    def sort_key(self) -> tuple:
        return (self.name, tuple(str(t) for t in self.params), str(self.ret))


@dataclass(frozen=True)
class BehaviorProgram:
    functions: tuple[FunctionDef, ...]
    entry: str

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def entry_function(self) -> FunctionDef:
        return self.function(self.entry)

    def with_entry(self, name: str) -> "BehaviorProgram":
        self.function(name)
        return BehaviorProgram(self.functions, name)


def literal_width(value: int) -> int | None:
    """Narrowest supported width holding ``value`` as signed two's complement."""
    for w in (8, 12, 14, 16):
        if -(1 << (w - 1)) <= value < (1 << (w - 1)):
            return w
    return None


def wrap(value: int, width: int) -> int:
    half = 1 << (width - 1)
    return ((value + half) % (1 << width)) - half
