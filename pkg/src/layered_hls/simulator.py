"""Golden interpreter, cycle-level netlist executor and equivalence checking."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from . import ops
from .cdfg import scalar_ports
from .errors import DivByZero, SemanticError, SimulatorError, UninitializedRegister, VectorError
from .frontend.ast import (
    Assign, BehaviorProgram, BinOp, Block, Call, Decl, ExprStmt, For, FunctionDef, If, Index,
    IntLit, Neg, Return, VarRef, literal_width, wrap,
)
from .netlist import Netlist, parse_netlist


# ---------------------------------------------------------------------------
# golden interpreter

@dataclass
class _Slot:
    width: int
    value: int | list[int]


class _Interp:
    """Sequential AST evaluation.

    Expressions evaluate to ``(value, width, fresh)``: intermediate operations
    wrap at the widest operand width, the operation at the root of an
    assignment computes directly at the destination width, and variables or
    call results are wrapped when narrowed.
    """

    def __init__(self, program: BehaviorProgram):
        self.funcs = {f.name: f for f in program.functions}
        self.program = program

    def run(self, inputs: Mapping[str, int]) -> dict[str, int]:
        fn = self.program.entry_function
        frame: dict[str, object] = {}
        for p in fn.params:
            w = p.type.width
            if p.type.is_array:
                frame[p.name] = _Slot(w, [wrap(inputs[f"{p.name}[{i}]"], w)
                                          for i in range(p.type.array_len)])
            else:
                frame[p.name] = _Slot(w, wrap(inputs[p.name], w))
        return {"ret": self.call_body(fn, [frame])}

    def call_body(self, fn: FunctionDef, scopes: list[dict]) -> int:
        for stmt in fn.body.stmts:
            if isinstance(stmt, Return):
                return self.assign_value(stmt.value, scopes, fn.ret.width)
            self.stmt(stmt, scopes)
        raise SemanticError(f"function {fn.name!r} ended without return")

    def lookup(self, name: str, scopes: list[dict]):
        for frame in reversed(scopes):
            if name in frame:
                return frame[name]
        raise SemanticError(f"unknown identifier {name!r}")

    def assign_value(self, e, scopes, width: int) -> int:
        value, w, fresh = self.expr(e, scopes, width)
        return wrap(value, width)

    def block(self, b: Block, scopes) -> None:
        scopes.append({})
        for s in b.stmts:
            self.stmt(s, scopes)
        scopes.pop()

    def stmt(self, s, scopes) -> None:
        if isinstance(s, Block):
            self.block(s, scopes)
        elif isinstance(s, Decl):
            w = s.type.width
            if s.type.is_array:
                vals = ([0] * s.type.array_len if s.init is None
                        else [self.assign_value(e, scopes, w) for e in s.init])
                scopes[-1][s.name] = _Slot(w, vals)
            else:
                scopes[-1][s.name] = _Slot(w, 0 if s.init is None
                                           else self.assign_value(s.init, scopes, w))
        elif isinstance(s, Assign):
            slot = self.lookup(s.name, scopes)
            value = self.assign_value(s.value, scopes, slot.width)
            if s.index is None:
                slot.value = value
            else:
                slot.value[self.index(slot, s.index, scopes)] = value
        elif isinstance(s, If):
            if self.expr(s.cond, scopes, None)[0] != 0:
                self.block(s.then, scopes)
            elif s.orelse is not None:
                self.block(s.orelse, scopes)
        elif isinstance(s, For):
            scopes.append({s.var: self.const(s.init, scopes)})
            while ops.RELATIONS[ops.REL_OF_SYMBOL[s.rel]](scopes[-1][s.var],
                                                          self.const(s.bound, scopes)):
                self.block(s.body, scopes)
                step = self.const(s.step, scopes)
                scopes[-1][s.var] += step if s.step_op == "+=" else -step
            scopes.pop()
        elif isinstance(s, ExprStmt):
            self.call(s.expr, scopes)
        else:
            raise SemanticError("return must be the final statement of the function body")

    def const(self, e, scopes) -> int:
        value, _, _ = self.expr(e, scopes, None)
        return value

    def index(self, slot: _Slot, e, scopes) -> int:
        i = self.const(e, scopes)
        if not 0 <= i < len(slot.value):
            raise SemanticError(f"index {i} out of range")
        return i

    def expr(self, e, scopes, dest: int | None) -> tuple[int, int, bool]:
        if isinstance(e, IntLit):
            return e.value, literal_width(e.value), False
        if isinstance(e, VarRef):
            v = self.lookup(e.name, scopes)
            if isinstance(v, int):  # loop variable
                return v, literal_width(v) or 16, False
            return v.value, v.width, False
        if isinstance(e, Index):
            slot = self.lookup(e.name, scopes)
            return slot.value[self.index(slot, e.index, scopes)], slot.width, False
        if isinstance(e, Neg):
            a, wa, _ = self.expr(e.operand, scopes, None)
            w = dest if dest is not None else max(wa, 8)
            return wrap(-a, w), w, True
        if isinstance(e, BinOp):
            a, wa, _ = self.expr(e.left, scopes, None)
            b, wb, _ = self.expr(e.right, scopes, None)
            w = dest if dest is not None else min(16, max(wa, wb))
            if e.op in ops.REL_OF_SYMBOL:
                return ops.apply("cmp." + ops.REL_OF_SYMBOL[e.op], [a, b], w), w, True
            return ops.apply(ops.ARITH_OF_SYMBOL[e.op], [a, b], w), w, True
        if isinstance(e, Call):
            fn = self.funcs[e.name]
            return self.call(e, scopes), fn.ret.width, False
        raise TypeError(e)

    def call(self, c: Call, scopes) -> int | None:
        fn = self.funcs[c.name]
        frame: dict[str, object] = {}
        for arg, p in zip(c.args, fn.params):
            if p.type.is_array:
                frame[p.name] = _Slot(p.type.width, list(self.lookup(arg.name, scopes).value))
            else:
                frame[p.name] = _Slot(p.type.width, self.assign_value(arg, scopes, p.type.width))
        if fn.ret.is_void:
            for stmt in fn.body.stmts:
                if not isinstance(stmt, Return):
                    self.stmt(stmt, [frame])
            return None
        return self.call_body(fn, [frame])


def interpret(program: BehaviorProgram, vector: Mapping[str, int]) -> dict[str, int]:
    """Reference semantics: run the entry function sequentially on ``vector``."""
    ports = dict(input_widths(program))
    _check_vector(vector, ports)
    return _Interp(program).run(vector)


def input_widths(program: BehaviorProgram) -> list[tuple[str, int]]:
    fn = program.entry_function
    return [(name, t.width) for name, t in scalar_ports([(p.name, p.type) for p in fn.params])]


def _check_vector(vector: Mapping[str, int], ports: Mapping[str, int]) -> None:
    missing = sorted(set(ports) - set(vector))
    extra = sorted(set(vector) - set(ports))
    if missing:
        raise VectorError(f"vector lacks input port(s): {', '.join(missing)}")
    if extra:
        raise VectorError(f"vector names unknown port(s): {', '.join(extra)}")


# ---------------------------------------------------------------------------
# cycle-level netlist executor

@dataclass
class SimResult:
    outputs: dict[str, int]
    cycles_executed: int


def _source(src: str, regs: dict[int, int], inputs: Mapping[str, int], widths) -> int:
    if src.startswith("#"):
        return int(src[1:])
    if src.startswith("p:"):
        name, _, narrow = src[2:].partition("/")
        return wrap(inputs[name], int(narrow) if narrow else widths[name])
    rid = int(src[1:])
    if rid not in regs:
        raise UninitializedRegister(f"register r{rid} read before it was written")
    return regs[rid]


def _run(nl: Netlist, inputs: Mapping[str, int]) -> SimResult:
    widths = {p.name: p.width for p in nl.inputs}
    _check_vector(inputs, widths)
    regs: dict[int, int] = {}
    pending: dict[int, list[tuple[int, int]]] = {}
    config: dict[int, str] = {}
    for state in nl.states:
        for alu, op in state.reconf:
            if nl.units[alu].kind != "alu":
                raise SimulatorError(f"reconf targets non-ALU unit {alu}")
            config[alu] = op
        for op in state.ops:
            unit = nl.units[op.unit]
            args = [_source(s, regs, inputs, widths) for s in op.srcs]
            if unit.kind == "alu" and config.get(op.unit) != op.opcode:
                raise SimulatorError(f"state {state.index}: ALU {op.unit} configured for "
                                     f"{config.get(op.unit)!r}, asked to run {op.opcode!r}")
            if op.opcode.startswith("macro:"):
                if unit.kind != op.opcode:
                    raise SimulatorError(f"unit {op.unit} ({unit.kind}) cannot run {op.opcode}")
                sub = nl.macros[op.opcode[6:]]
                if len(args) != len(sub.inputs):
                    raise SimulatorError(f"macro {op.opcode[6:]} takes {len(sub.inputs)} operands")
                res = _run(sub, {p.name: a for p, a in zip(sub.inputs, args)})
                value = wrap(res.outputs[sub.outputs[0].name], op.width)
            else:
                value = ops.apply(op.opcode, args, op.width)
            done = state.index + unit.latency - 1
            pending.setdefault(done, []).append((op.dst, value))
        for dst, value in pending.pop(state.index, []):
            regs[dst] = wrap(value, nl.regs[dst])
    if pending:
        raise SimulatorError("operation completes after the final state")
    outputs = {p.name: wrap(_source(p.src, regs, inputs, widths), p.width) for p in nl.outputs}
    return SimResult(outputs, len(nl.states))


def simulate(netlist: Netlist | str, vector: Mapping[str, int]) -> SimResult:
    """Execute every state once; results latch at the end of their last busy state."""
    if isinstance(netlist, str):
        netlist = parse_netlist(netlist)
    return _run(netlist, vector)


# ---------------------------------------------------------------------------
# vectors and equivalence

def corner_vectors(ports: list[tuple[str, int]]) -> list[dict[str, int]]:
    """All-zeros, all-ones (value 1), all-bits-set (-1), minimum and maximum per width."""
    return [
        {p: 0 for p, _ in ports},
        {p: 1 for p, _ in ports},
        {p: -1 for p, _ in ports},
        {p: -(1 << (w - 1)) for p, w in ports},
        {p: (1 << (w - 1)) - 1 for p, w in ports},
    ]


def random_vectors(ports: list[tuple[str, int]], count: int, seed: int) -> list[dict[str, int]]:
    rng = random.Random(seed)
    return [{p: rng.randint(-(1 << (w - 1)), (1 << (w - 1)) - 1) for p, w in ports}
            for _ in range(count)]


@dataclass
class Verdict:
    passed: bool
    vectors: int
    counterexample: dict | None = None
    expected: dict | str | None = None
    actual: dict | str | None = None
    notes: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        if self.passed:
            return f"PASS ({self.vectors} vectors)"
        return (f"FAIL on {self.counterexample}: expected {self.expected}, got {self.actual}")


def _outcome(fn, *args):
    try:
        return fn(*args)
    except DivByZero:
        return "DivByZero"


def check_equivalence(program: BehaviorProgram, netlist: Netlist | str, count: int = 100,
                      seed: int = 0) -> Verdict:
    """Compare interpreter and netlist on the corner set plus ``count`` random vectors.

    A vector on which the source program divides by zero is undefined and
    accepted whatever the netlist does.
    """
    if isinstance(netlist, str):
        netlist = parse_netlist(netlist)
    ports = input_widths(program)
    vectors = corner_vectors(ports) + random_vectors(ports, count, seed)
    notes = []
    for vec in vectors:
        expected = _outcome(interpret, program, vec)
        if expected == "DivByZero":
            notes.append(f"undefined (division by zero) on {vec}")
            continue
        actual = _outcome(lambda v: simulate(netlist, v).outputs, vec)
        if actual != expected:
            return Verdict(False, len(vectors), vec, expected, actual, notes)
    return Verdict(True, len(vectors), notes=notes)


def read_vectors(text: str) -> list[dict[str, int]]:
    """Parse ``in <port> = <int>`` lines; blank lines separate vectors."""
    vectors: list[dict[str, int]] = []
    cur: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if cur:
                vectors.append(cur)
                cur = {}
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "in" or parts[2] != "=":
            raise VectorError(f"malformed vector line: {raw!r}", line=lineno, col=1)
        try:
            value = int(parts[3])
        except ValueError:
            raise VectorError(f"bad integer {parts[3]!r}", line=lineno, col=1) from None
        if parts[1] in cur:
            raise VectorError(f"port {parts[1]!r} given twice in one vector", line=lineno, col=1)
        cur[parts[1]] = value
    if cur:
        vectors.append(cur)
    return vectors


def write_results(results: list[SimResult]) -> str:
    blocks = []
    for r in results:
        blocks.append("".join(f"out {p} = {v}\n" for p, v in sorted(r.outputs.items()))
                      + f"# cycles = {r.cycles_executed}\n")
    return "\n".join(blocks)
