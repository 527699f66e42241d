"""Static checks that turn a list of parsed functions into a BehaviorProgram."""

from __future__ import annotations

from ..errors import PragmaError, SemanticError
from .ast import (
    Assign, BehaviorProgram, BinOp, Block, Call, Decl, Expr, ExprStmt, For, FunctionDef, If,
    Index, IntLit, Neg, Pos, Pragma, Return, SignalType, VarRef, literal_width,
)

LOOP = "loop"


def _err(msg: str, pos: Pos | None) -> SemanticError:
    if pos is None:
        return SemanticError(msg)
    return SemanticError(msg, line=pos.line, col=pos.col)


class _Scopes:
    def __init__(self):
        self.stack: list[dict[str, object]] = [{}]

    def push(self):
        self.stack.append({})

    def pop(self):
        self.stack.pop()

    def lookup(self, name: str):
        for frame in reversed(self.stack):
            if name in frame:
                return frame[name]
        return None

    def declare(self, name: str, what, pos: Pos | None):
        if name in self.stack[-1]:
            raise _err(f"redeclaration of {name!r}", pos)
        if self.lookup(name) == LOOP:
            raise _err(f"{name!r} shadows a loop variable", pos)
        self.stack[-1][name] = what


class _FunctionChecker:
    def __init__(self, funcs: dict[str, FunctionDef], fn: FunctionDef):
        self.funcs = funcs
        self.fn = fn
        self.scopes = _Scopes()
        self.calls: set[str] = set()

    def run(self) -> None:
        fn = self.fn
        for p in fn.params:
            if p.type.is_void:
                raise _err(f"parameter {p.name!r} cannot be void", p.pos)
            self.scopes.declare(p.name, p.type, p.pos)
        stmts = fn.body.stmts
        for k, stmt in enumerate(stmts):
            self.stmt(stmt, top=(k == len(stmts) - 1))
        if not fn.ret.is_void and not (stmts and isinstance(stmts[-1], Return)):
            raise _err(f"function {fn.name!r} must end with a return statement", fn.pos)

    # statements

    def block(self, block: Block) -> None:
        self.scopes.push()
        for stmt in block.stmts:
            self.stmt(stmt, top=False)
        self.scopes.pop()

    def stmt(self, stmt, top: bool) -> None:
        if isinstance(stmt, Block):
            self.block(stmt)
        elif isinstance(stmt, Decl):
            self.decl(stmt)
        elif isinstance(stmt, Assign):
            self.assign(stmt)
        elif isinstance(stmt, If):
            self.scalar(stmt.cond)
            self.block(stmt.then)
            if stmt.orelse is not None:
                self.block(stmt.orelse)
        elif isinstance(stmt, For):
            self.for_loop(stmt)
        elif isinstance(stmt, Return):
            if not top:
                raise _err("return must be the final statement of the function body", stmt.pos)
            if self.fn.ret.is_void:
                if stmt.value is not None:
                    raise _err(f"void function {self.fn.name!r} cannot return a value", stmt.pos)
            else:
                if stmt.value is None:
                    raise _err(f"function {self.fn.name!r} must return a value", stmt.pos)
                self.scalar(stmt.value)
        elif isinstance(stmt, ExprStmt):
            self.call(stmt.expr, as_value=False)
        else:  # pragma: no cover
            raise TypeError(stmt)

    def decl(self, d: Decl) -> None:
        if d.type.is_void:
            raise _err(f"variable {d.name!r} cannot be void", d.pos)
        if d.init is not None:
            if d.type.is_array:
                if not isinstance(d.init, tuple):
                    raise _err(f"array {d.name!r} needs a brace initializer", d.pos)
                if len(d.init) != d.type.array_len:
                    raise _err(f"initializer of {d.name!r} has {len(d.init)} elements, "
                               f"expected {d.type.array_len}", d.pos)
                for item in d.init:
                    self.scalar(item)
            else:
                if isinstance(d.init, tuple):
                    raise _err(f"scalar {d.name!r} cannot take a brace initializer", d.pos)
                self.scalar(d.init)
        self.scopes.declare(d.name, d.type, d.pos)

    def assign(self, a: Assign) -> None:
        what = self.scopes.lookup(a.name)
        if what is None:
            raise _err(f"unknown identifier {a.name!r}", a.pos)
        if what == LOOP:
            raise _err(f"loop variable {a.name!r} cannot be assigned", a.pos)
        if a.index is None:
            if what.is_array:
                raise _err(f"cannot assign whole array {a.name!r}", a.pos)
        else:
            if not what.is_array:
                raise _err(f"{a.name!r} is not an array", a.pos)
            self.constant(a.index, "array index")
        self.scalar(a.value)

    def for_loop(self, f: For) -> None:
        if self.scopes.lookup(f.var) is not None:
            raise _err(f"loop variable {f.var!r} shadows an existing name", f.pos)
        self.constant(f.init, "loop start")
        self.constant(f.bound, "loop bound")
        self.constant(f.step, "loop step")
        self.scopes.push()
        self.scopes.declare(f.var, LOOP, f.pos)
        self.block(f.body)
        self.scopes.pop()

    # expressions

    def constant(self, e: Expr, what: str) -> None:
        if isinstance(e, IntLit):
            self.literal(e)
        elif isinstance(e, VarRef):
            kind = self.scopes.lookup(e.name)
            if kind is None:
                raise _err(f"unknown identifier {e.name!r}", e.pos)
            if kind != LOOP:
                raise _err(f"{what} must be a compile-time constant", e.pos)
        elif isinstance(e, Neg):
            self.constant(e.operand, what)
        elif isinstance(e, BinOp):
            self.constant(e.left, what)
            self.constant(e.right, what)
        else:
            raise _err(f"{what} must be a compile-time constant", e.pos)

    def literal(self, e: IntLit) -> None:
        if literal_width(e.value) is None:
            raise _err(f"literal {e.value} does not fit in 16 bits", e.pos)

    def scalar(self, e: Expr) -> None:
        if isinstance(e, IntLit):
            self.literal(e)
        elif isinstance(e, VarRef):
            what = self.scopes.lookup(e.name)
            if what is None:
                raise _err(f"unknown identifier {e.name!r}", e.pos)
            if what != LOOP and what.is_array:
                raise _err(f"array {e.name!r} used as a scalar", e.pos)
        elif isinstance(e, Index):
            what = self.scopes.lookup(e.name)
            if what is None:
                raise _err(f"unknown identifier {e.name!r}", e.pos)
            if what == LOOP or not what.is_array:
                raise _err(f"{e.name!r} is not an array", e.pos)
            self.constant(e.index, "array index")
        elif isinstance(e, Neg):
            self.scalar(e.operand)
        elif isinstance(e, BinOp):
            self.scalar(e.left)
            self.scalar(e.right)
        elif isinstance(e, Call):
            self.call(e, as_value=True)
        else:  # pragma: no cover
            raise TypeError(e)

    def call(self, c: Call, as_value: bool) -> None:
        callee = self.funcs.get(c.name)
        if callee is None:
            raise _err(f"unknown function {c.name!r}", c.pos)
        if as_value and callee.ret.is_void:
            raise _err(f"void function {c.name!r} used as a value", c.pos)
        if len(c.args) != len(callee.params):
            raise _err(f"{c.name!r} takes {len(callee.params)} arguments, got {len(c.args)}", c.pos)
        for arg, param in zip(c.args, callee.params):
            if param.type.is_array:
                what = self.scopes.lookup(arg.name) if isinstance(arg, VarRef) else None
                if not isinstance(what, SignalType) or what != param.type:
                    raise _err(f"argument for {param.name!r} of {c.name!r} must be an array "
                               f"variable of type {param.type}", getattr(arg, "pos", c.pos))
            else:
                self.scalar(arg)
        self.calls.add(c.name)


def _check_pragmas(fn: FunctionDef) -> None:
    kinds = [p.kind for p in fn.pragmas]
    for kind in set(kinds):
        if kinds.count(kind) > 1:
            raise PragmaError(f"duplicate {kind} directive on {fn.name!r}",
                              line=fn.pos.line if fn.pos else None, col=fn.pos.col if fn.pos else None)
    if Pragma.SHARE_NAME in kinds and not fn.is_operator:
        raise PragmaError(f"share name on {fn.name!r} requires /* Cyber func = operator */",
                          line=fn.pos.line if fn.pos else None, col=fn.pos.col if fn.pos else None)


def call_graph(program_funcs) -> dict[str, set[str]]:
    """Callee names per function, read directly off the syntax tree."""
    graph: dict[str, set[str]] = {}

    def walk(node, acc: set[str]):
        if isinstance(node, Call):
            acc.add(node.name)
        if isinstance(node, tuple):
            for item in node:
                walk(item, acc)
            return
        for attr in getattr(node, "__dataclass_fields__", {}):
            if attr == "pos":
                continue
            child = getattr(node, attr)
            if isinstance(child, (tuple, Block, Decl, Assign, If, For, Return, ExprStmt,
                                  BinOp, Neg, Call, Index)):
                walk(child, acc)

    for fn in program_funcs:
        acc: set[str] = set()
        walk(fn.body, acc)
        graph[fn.name] = acc
    return graph


def check_program(funcs: list[FunctionDef], entry: str | None = None) -> BehaviorProgram:
    table: dict[str, FunctionDef] = {}
    for fn in funcs:
        if fn.name in table:
            raise _err(f"duplicate function {fn.name!r}", fn.pos)
        table[fn.name] = fn
    if not table:
        raise SemanticError("program defines no functions")
    for fn in funcs:
        _check_pragmas(fn)
        _FunctionChecker(table, fn).run()

    graph = call_graph(funcs)
    # recursion: depth-first search for a back edge
    state: dict[str, int] = {}

    def visit(name: str, path: list[str]):
        state[name] = 1
        for callee in sorted(graph[name]):
            if state.get(callee) == 1:
                cycle = " -> ".join(path[path.index(callee):] + [callee]) if callee in path else callee
                raise _err(f"recursion is not supported ({cycle})", table[name].pos)
            if callee not in state:
                visit(callee, path + [callee])
        state[name] = 2

    for fn in funcs:
        if fn.name not in state:
            visit(fn.name, [fn.name])

    if entry is None:
        if "top" in table:
            entry = "top"
        else:
            called = set().union(*graph.values())
            roots = [f.name for f in funcs if f.name not in called]
            if len(roots) != 1:
                raise SemanticError(
                    f"cannot determine entry function (candidates: {', '.join(roots)}); "
                    "name one 'top'")
            entry = roots[0]
    if entry not in table:
        raise SemanticError(f"entry function {entry!r} is not defined")
    if table[entry].ret.is_void:
        raise _err(f"entry function {entry!r} must return a value", table[entry].pos)
    return BehaviorProgram(tuple(funcs), entry)
