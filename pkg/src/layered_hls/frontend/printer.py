from __future__ import annotations

from .ast import (
    Assign, BehaviorProgram, BinOp, Block, Call, Decl, ExprStmt, For, FunctionDef, If, Index,
    IntLit, Neg, Return, VarRef,
)

INDENT = "    "


def expr_str(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{expr_str(e.index)}]"
    if isinstance(e, Neg):
        return f"-{_operand(e.operand)}"
    if isinstance(e, BinOp):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(expr_str(a) for a in e.args)})"
    raise TypeError(e)


def _operand(e) -> str:
    # negative literals are parenthesized so "a - -1" never prints as "a --1"
    if isinstance(e, (BinOp, Neg)) or (isinstance(e, IntLit) and e.value < 0):
        return f"({expr_str(e)})"
    return expr_str(e)


def _block(block: Block, depth: int, out: list[str]) -> None:
    for stmt in block.stmts:
        _stmt(stmt, depth, out)


def _stmt(s, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(s, Block):
        out.append(pad + "{")
        _block(s, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, Decl):
        init = ""
        if isinstance(s.init, tuple):
            init = " = {" + ", ".join(expr_str(x) for x in s.init) + "}"
        elif s.init is not None:
            init = f" = {expr_str(s.init)}"
        suffix = f"[{s.type.array_len}]" if s.type.is_array else ""
        out.append(f"{pad}{s.type.kind} {s.name}{suffix}{init};")
    elif isinstance(s, Assign):
        target = s.name if s.index is None else f"{s.name}[{expr_str(s.index)}]"
        out.append(f"{pad}{target} = {expr_str(s.value)};")
    elif isinstance(s, If):
        out.append(f"{pad}if ({expr_str(s.cond)}) {{")
        _block(s.then, depth + 1, out)
        if s.orelse is not None:
            out.append(pad + "} else {")
            _block(s.orelse, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, For):
        out.append(f"{pad}for ({s.var} = {expr_str(s.init)}; {s.var} {s.rel} {expr_str(s.bound)}; "
                   f"{s.var} {s.step_op} {expr_str(s.step)}) {{")
        _block(s.body, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, Return):
        out.append(pad + ("return;" if s.value is None else f"return {expr_str(s.value)};"))
    elif isinstance(s, ExprStmt):
        out.append(f"{pad}{expr_str(s.expr)};")
    else:  # pragma: no cover
        raise TypeError(s)


def function_str(fn: FunctionDef) -> str:
    out = [p.render() for p in fn.pragmas]
    params = ", ".join(
        f"{p.type.kind} {p.name}" + (f"[{p.type.array_len}]" if p.type.is_array else "")
        for p in fn.params)
    out.append(f"{fn.ret.kind} {fn.name}({params}) {{")
    _block(fn.body, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"


def pretty(program: BehaviorProgram) -> str:
    return "\n".join(function_str(fn) for fn in program.functions)
