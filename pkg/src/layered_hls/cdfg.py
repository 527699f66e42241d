"""Lowering of a BehaviorProgram into an acyclic dataflow graph.

Loops are fully unrolled, ``if``/``else`` becomes multiplexers, ordinary calls
are inlined, and calls to ``func = operator`` functions stay as opaque
``macro`` nodes unless ``inline_operators`` is set.
"""

from __future__ import annotations

import copy
import heapq
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

from . import ops
from .errors import ExpansionLimit, InlineError, SemanticError, WidthError
from .frontend.ast import (
    MAX_WIDTH, Assign, BehaviorProgram, BinOp, Block, Call, Decl, ExprStmt, For, FunctionDef,
    If, Index, IntLit, Neg, Return, SignalType, Signature, VarRef, literal_width, wrap,
)
from .frontend.semantic import call_graph

FINE_OPS = ("add", "sub", "mul", "div", "cmp", "mux")
ARITY = {"add": 2, "sub": 2, "mul": 2, "div": 2, "cmp": 2, "mux": 3, "const": 0, "read": 0, "write": 1}
DEFAULT_MAX_NODES = 1_000_000


@dataclass
class DfgNode:
    id: int
    op: str
    operands: tuple[int, ...] = ()
    width: int | None = None
    rel: str | None = None        # cmp relation: lt le gt ge eq ne
    value: int | None = None      # const
    port: str | None = None       # read / write
    func: str | None = None       # macro
    signature: Signature | None = None
    share_name: str | None = None
    dest_width: int | None = None  # width fixed by an assignment destination
    truncated: bool = False
    latency: int = 1

    @property
    def opcode(self) -> str:
        if self.op == "cmp":
            return f"cmp.{self.rel}"
        if self.op == "macro":
            return f"macro:{self.func}"
        return self.op

    @property
    def is_operation(self) -> bool:
        """Nodes that occupy a functional unit."""
        return self.op in FINE_OPS or self.op == "macro"

    def label(self) -> str:
        if self.op == "const":
            return f"const:{self.value}"
        if self.op in ("read", "write"):
            return f"{self.op}:{self.port}"
        return self.opcode


@dataclass
class DataFlowGraph:
    name: str
    nodes: dict[int, DfgNode]
    inputs: list[tuple[str, SignalType]] = field(default_factory=list)
    outputs: list[tuple[str, SignalType]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.nodes[k] for k in sorted(self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return sorted((src, n.id, k) for n in self for k, src in enumerate(n.operands))

    def consumers(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {k: [] for k in self.nodes}
        for n in self:
            for src in n.operands:
                out[src].append(n.id)
        return out

    def input_ports(self) -> dict[str, int]:
        """Scalar port name -> width."""
        return {name: t.width for name, t in scalar_ports(self.inputs)}

    def output_ports(self) -> dict[str, int]:
        return {name: t.width for name, t in scalar_ports(self.outputs)}

    def topological(self) -> list[int]:
        indeg = {k: 0 for k in self.nodes}
        cons = self.consumers()
        for n in self:
            indeg[n.id] = len(n.operands)
        ready = sorted(k for k, d in indeg.items() if d == 0)
        order = []
        heapq.heapify(ready)
        while ready:
            k = heapq.heappop(ready)
            order.append(k)
            for c in cons[k]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self.nodes):
            raise ValueError("graph contains a cycle")
        return order

    def dump(self) -> str:
        lines = [f"node {n.id} {n.label()} w={n.width}" for n in self]
        lines += [f"edge {s} {d} {k}" for s, d, k in self.edges]
        return "\n".join(lines) + "\n"

    def copy(self) -> "DataFlowGraph":
        return DataFlowGraph(self.name, {k: replace(v) for k, v in self.nodes.items()},
                             list(self.inputs), list(self.outputs))


def scalar_ports(ports) -> list[tuple[str, SignalType]]:
    out = []
    for name, t in ports:
        if t.is_array:
            out += [(f"{name}[{i}]", t.element()) for i in range(t.array_len)]
        else:
            out.append((name, t))
    return out


def natural_width(node: DfgNode, widths: Mapping[int, int | None]) -> int | None:
    """Width before any destination override: max of the data operands, capped."""
    if node.op == "const":
        return literal_width(node.value)
    if node.op == "macro":
        return node.signature.ret.width
    data = node.operands[1:] if node.op == "mux" else node.operands
    ws = [widths[k] for k in data]
    if any(w is None for w in ws):
        raise WidthError(f"node {node.id} ({node.label()}) uses a void value")
    return min(MAX_WIDTH, max(ws))


# ---------------------------------------------------------------------------
# builder

@dataclass
class _Var:
    type: SignalType
    value: int | list[int]


class _Env:
    def __init__(self):
        self.frames: list[dict[str, object]] = [{}]

    def lookup(self, name: str):
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        raise SemanticError(f"unknown identifier {name!r}")


class _Widths:
    def __init__(self, nodes: list[DfgNode]):
        self.nodes = nodes

    def __getitem__(self, k: int) -> int | None:
        return self.nodes[k].width


class _Builder:
    def __init__(self, program: BehaviorProgram, inline_operators: bool, max_nodes: int):
        self.program = program
        self.funcs = {f.name: f for f in program.functions}
        self.inline_operators = inline_operators
        self.max_nodes = max_nodes
        self.nodes: list[DfgNode] = []
        self.iterations = 0
        self.widths = _Widths(self.nodes)

    def new(self, op: str, operands=(), **attrs) -> int:
        if len(self.nodes) >= self.max_nodes:
            raise ExpansionLimit(f"expanded graph exceeds {self.max_nodes} nodes")
        node = DfgNode(len(self.nodes), op, tuple(operands), **attrs)
        if op in ("const", "read", "write"):
            node.latency = 0
        if node.width is None and op != "write":
            natural = natural_width(node, self.widths)
            node.width = node.dest_width if node.dest_width is not None else natural
        self.nodes.append(node)
        return node.id

    def const(self, value: int) -> int:
        if literal_width(value) is None:
            raise SemanticError(f"constant {value} does not fit in 16 bits")
        return self.new("const", value=value)

    def coerce(self, val: tuple[int, bool], width: int) -> int:
        nid, fresh = val
        node = self.nodes[nid]
        if node.width is None:
            raise WidthError(f"void value of {node.label()} used where int{width} is required")
        if fresh and node.op in FINE_OPS:
            natural = natural_width(node, self.widths)
            node.dest_width = width
            node.width = width
            node.truncated = natural > width
            return nid
        if node.width == width:
            return nid
        narrowing = node.width > width
        # a variable's value always carries the variable's declared width
        if node.op == "const":
            return self.new("const", value=wrap(node.value, width), dest_width=width)
        if node.op == "read":
            return self.new("read", port=node.port, width=width, dest_width=width,
                            truncated=narrowing)
        if node.op == "macro" or not narrowing:
            zero = self.const(0)
            return self.new("add", (nid, zero), dest_width=width, truncated=narrowing)
        return self.new(node.op, node.operands, rel=node.rel, dest_width=width, truncated=True)

    # program

    def build(self) -> DataFlowGraph:
        fn = self.program.entry_function
        env = _Env()
        for p in fn.params:
            if p.type.is_array:
                elems = [self.new("read", port=f"{p.name}[{i}]", width=p.type.width)
                         for i in range(p.type.array_len)]
                env.frames[0][p.name] = _Var(p.type, elems)
            else:
                env.frames[0][p.name] = _Var(p.type, self.new("read", port=p.name, width=p.type.width))
        ret = self.body(fn, env)
        src = self.nodes[ret]
        self.new("write", (ret,), port="ret", width=fn.ret.width,
                 truncated=src.width > fn.ret.width)
        graph = DataFlowGraph(fn.name, {n.id: n for n in self.nodes},
                              [(p.name, p.type) for p in fn.params], [("ret", fn.ret)])
        return _eliminate_dead(graph)

    def body(self, fn: FunctionDef, env: _Env) -> int | None:
        result = None
        for stmt in fn.body.stmts:
            if isinstance(stmt, Return):
                if stmt.value is not None:
                    result = self.coerce(self.expr(stmt.value, env), fn.ret.width)
            else:
                self.stmt(stmt, env)
        return result

    # statements

    def block(self, block: Block, env: _Env) -> None:
        env.frames.append({})
        for stmt in block.stmts:
            self.stmt(stmt, env)
        env.frames.pop()

    def stmt(self, s, env: _Env) -> None:
        if isinstance(s, Block):
            self.block(s, env)
        elif isinstance(s, Decl):
            w = s.type.width
            if s.type.is_array:
                if s.init is None:
                    elems = [self.new("const", value=0, dest_width=w) for _ in range(s.type.array_len)]
                else:
                    elems = [self.coerce(self.expr(e, env), w) for e in s.init]
                env.frames[-1][s.name] = _Var(s.type, elems)
            else:
                value = (self.new("const", value=0, dest_width=w) if s.init is None
                         else self.coerce(self.expr(s.init, env), w))
                env.frames[-1][s.name] = _Var(s.type, value)
        elif isinstance(s, Assign):
            var = env.lookup(s.name)
            value = self.coerce(self.expr(s.value, env), var.type.width)
            if s.index is None:
                var.value = value
            else:
                i = self.index_of(var, s.index, env, s)
                var.value[i] = value
        elif isinstance(s, If):
            self.if_stmt(s, env)
        elif isinstance(s, For):
            self.for_loop(s, env)
        elif isinstance(s, ExprStmt):
            self.call(s.expr, env)
        elif isinstance(s, Return):
            raise SemanticError("return must be the final statement of the function body")
        else:  # pragma: no cover
            raise TypeError(s)

    def if_stmt(self, s: If, env: _Env) -> None:
        cond = self.expr(s.cond, env)[0]
        then_env = _snapshot(env)
        self.block(s.then, then_env)
        else_env = _snapshot(env)
        if s.orelse is not None:
            self.block(s.orelse, else_env)
        for depth, frame in enumerate(env.frames):
            for name, var in frame.items():
                if not isinstance(var, _Var):
                    continue
                a = then_env.frames[depth][name].value
                b = else_env.frames[depth][name].value
                if isinstance(var.value, list):
                    var.value = [self.select(cond, x, y) for x, y in zip(a, b)]
                else:
                    var.value = self.select(cond, a, b)

    def select(self, cond: int, a: int, b: int) -> int:
        if a == b:
            return a
        return self.new("mux", (cond, a, b))

    def for_loop(self, s: For, env: _Env) -> None:
        i = self.const_eval(s.init, env)
        env.frames.append({})
        while True:
            env.frames[-1][s.var] = i
            if not ops.RELATIONS[ops.REL_OF_SYMBOL[s.rel]](i, self.const_eval(s.bound, env)):
                break
            self.iterations += 1
            if self.iterations > self.max_nodes:
                raise ExpansionLimit(f"loop expansion exceeds {self.max_nodes} iterations")
            self.block(s.body, env)
            step = self.const_eval(s.step, env)
            i = i + step if s.step_op == "+=" else i - step
        env.frames.pop()

    def const_eval(self, e, env: _Env) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, VarRef):
            v = env.lookup(e.name)
            if isinstance(v, int):
                return v
            raise SemanticError(f"{e.name!r} is not a compile-time constant")
        if isinstance(e, Neg):
            return -self.const_eval(e.operand, env)
        if isinstance(e, BinOp):
            a, b = self.const_eval(e.left, env), self.const_eval(e.right, env)
            if e.op in ops.REL_OF_SYMBOL:
                return int(ops.RELATIONS[ops.REL_OF_SYMBOL[e.op]](a, b))
            if e.op == "/":
                if b == 0:
                    raise SemanticError("division by zero in constant expression")
                return ops.trunc_div(a, b)
            return {"+": a + b, "-": a - b, "*": a * b}[e.op]
        raise SemanticError("expression is not a compile-time constant")

    def index_of(self, var: _Var, index, env: _Env, where) -> int:
        if not isinstance(var.value, list):
            raise SemanticError("indexing a scalar")
        i = self.const_eval(index, env)
        if not 0 <= i < len(var.value):
            pos = getattr(where, "pos", None)
            raise SemanticError(f"index {i} out of range for {var.type}",
                                line=pos.line if pos else None, col=pos.col if pos else None)
        return i

    # expressions

    def expr(self, e, env: _Env) -> tuple[int, bool]:
        if isinstance(e, IntLit):
            return self.const(e.value), False
        if isinstance(e, VarRef):
            v = env.lookup(e.name)
            if isinstance(v, int):
                return self.const(v), False
            return v.value, False
        if isinstance(e, Index):
            var = env.lookup(e.name)
            return var.value[self.index_of(var, e.index, env, e)], False
        if isinstance(e, Neg):
            operand = self.expr(e.operand, env)[0]
            return self.new("sub", (self.const(0), operand)), True
        if isinstance(e, BinOp):
            a = self.expr(e.left, env)[0]
            b = self.expr(e.right, env)[0]
            if e.op in ops.REL_OF_SYMBOL:
                return self.new("cmp", (a, b), rel=ops.REL_OF_SYMBOL[e.op]), True
            return self.new(ops.ARITH_OF_SYMBOL[e.op], (a, b)), True
        if isinstance(e, Call):
            return self.call(e, env), False
        raise TypeError(e)

    def call(self, c: Call, env: _Env) -> int | None:
        callee = self.funcs[c.name]
        if callee.is_operator and not self.inline_operators:
            return self.macro_call(callee, c, env)
        if len(c.args) != len(callee.params):
            raise InlineError(f"{c.name!r} takes {len(callee.params)} arguments, got {len(c.args)}")
        inner = _Env()
        for arg, p in zip(c.args, callee.params):
            if p.type.is_array:
                var = env.lookup(arg.name)
                inner.frames[0][p.name] = _Var(p.type, list(var.value))
            else:
                inner.frames[0][p.name] = _Var(p.type, self.coerce(self.expr(arg, env), p.type.width))
        return self.body(callee, inner)

    def macro_call(self, callee: FunctionDef, c: Call, env: _Env) -> int:
        if len(c.args) != len(callee.params):
            raise InlineError(f"operator {callee.name!r} takes {len(callee.params)} arguments, "
                              f"got {len(c.args)}")
        operands = []
        for arg, p in zip(c.args, callee.params):
            if p.type.is_array:
                var = env.lookup(arg.name) if isinstance(arg, VarRef) else None
                if not isinstance(var, _Var) or var.type != p.type:
                    raise InlineError(f"argument for {p.name!r} of operator {callee.name!r} "
                                      f"must have type {p.type}")
                operands += [self.coerce((v, False), p.type.width) for v in var.value]
            else:
                operands.append(self.coerce(self.expr(arg, env), p.type.width))
        return self.new("macro", operands, func=callee.name, signature=callee.signature,
                        share_name=callee.share_name, width=callee.ret.width)


def _snapshot(env: _Env) -> _Env:
    out = _Env()
    out.frames = [{k: (copy.copy(v) if isinstance(v, _Var) else v) for k, v in f.items()}
                  for f in env.frames]
    for f in out.frames:
        for v in f.values():
            if isinstance(v, _Var) and isinstance(v.value, list):
                v.value = list(v.value)
    return out


def _eliminate_dead(graph: DataFlowGraph) -> DataFlowGraph:
    live: set[int] = set()
    stack = [n.id for n in graph if n.op == "write"]
    while stack:
        k = stack.pop()
        if k in live:
            continue
        live.add(k)
        stack.extend(graph.nodes[k].operands)
    remap = {old: new for new, old in enumerate(sorted(live))}
    nodes = {}
    for old in sorted(live):
        n = graph.nodes[old]
        nodes[remap[old]] = replace(n, id=remap[old], operands=tuple(remap[s] for s in n.operands))
    return DataFlowGraph(graph.name, nodes, graph.inputs, graph.outputs)


def _check_nested_operators(program: BehaviorProgram) -> None:
    funcs = {f.name: f for f in program.functions}
    graph = call_graph(program.functions)

    def reachable_operators(name: str, seen: set[str]) -> set[str]:
        found = set()
        for callee in graph[name]:
            if funcs[callee].is_operator:
                found.add(callee)
            elif callee not in seen:
                seen.add(callee)
                found |= reachable_operators(callee, seen)
        return found

    for f in program.functions:
        if f.is_operator:
            nested = reachable_operators(f.name, {f.name})
            if nested:
                raise InlineError(f"operator {f.name!r} calls operator(s) "
                                  f"{', '.join(sorted(nested))}; nested operators are not supported")


def build_cdfg(program: BehaviorProgram, *, inline_operators: bool = False,
               max_nodes: int = DEFAULT_MAX_NODES) -> DataFlowGraph:
    """Lower the entry function of ``program`` into a DataFlowGraph."""
    _check_nested_operators(program)
    return infer_widths(_Builder(program, inline_operators, max_nodes).build())


def infer_widths(graph: DataFlowGraph) -> DataFlowGraph:
    """Recompute every node width from port/literal widths and destination overrides.

    Widths depend only on leaves and ``dest_width`` annotations, so the pass is a
    fixpoint after one application.
    """
    out = graph.copy()
    in_widths = graph.input_ports()
    out_widths = graph.output_ports()
    widths: dict[int, int | None] = {}
    for k in graph.topological():
        n = out.nodes[k]
        if n.op == "read":
            w = n.dest_width if n.dest_width is not None else in_widths[n.port]
        elif n.op == "write":
            w = out_widths[n.port]
            src = widths[n.operands[0]]
            if src is None:
                raise WidthError(f"void value written to port {n.port!r}")
            n.truncated = src > w
        elif n.dest_width is not None:
            natural_width(n, widths)  # raises on void operands
            w = n.dest_width
        else:
            w = natural_width(n, widths)
        n.width = w
        widths[k] = w
    return out


def evaluate(graph: DataFlowGraph, inputs: Mapping[str, int],
             macro_eval: Callable[[DfgNode, list[int]], int]) -> dict[str, int]:
    """Run the graph as a pure dataflow program; ``macro_eval`` computes macro nodes."""
    values: dict[int, int] = {}
    outputs: dict[str, int] = {}
    for k in graph.topological():
        n = graph.nodes[k]
        args = [values[s] for s in n.operands]
        if n.op == "const":
            v = n.value
        elif n.op == "read":
            v = wrap(inputs[n.port], n.width)
        elif n.op == "write":
            v = wrap(args[0], n.width)
            outputs[n.port] = v
        elif n.op == "macro":
            v = wrap(macro_eval(n, args), n.width)
        else:
            v = ops.apply(n.opcode, args, n.width)
        values[k] = v
    return outputs
