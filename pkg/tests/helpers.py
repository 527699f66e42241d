"""Shared builders for the test suite: random DSL programs and random dataflow graphs."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from layered_hls.cdfg import DataFlowGraph, DfgNode, infer_widths
from layered_hls.frontend.ast import SignalType
from layered_hls.macrodb import MacroDatabase
from layered_hls.pipeline import register_operators
from layered_hls.scheduler import ResourceConstraints

WIDTHS = ("int8", "int12", "int14", "int16")
OPERATOR_SRC = """\
/* Cyber func = operator */
int16 mac3(int16 a, int16 b, int16 c) {
  return a * b + c;
}
"""


def db_for(program) -> MacroDatabase:
    db = MacroDatabase()
    register_operators(program, db)
    return db


# ---------------------------------------------------------------------------
# random programs

@st.composite
def expressions(draw, names, depth=2, allow_div=True):
    if depth == 0 or draw(st.booleans()):
        if names and draw(st.integers(0, 3)):
            return draw(st.sampled_from(names))
        return str(draw(st.integers(-130, 130)))
    ops = ["+", "-", "*"] + (["/"] if allow_div else [])
    op = draw(st.sampled_from(ops))
    left = draw(expressions(names, depth - 1, allow_div))
    right = draw(expressions(names, depth - 1, allow_div))
    if draw(st.integers(0, 5)) == 0:
        return f"-({left})"
    return f"({left} {op} {right})"


@st.composite
def programs(draw, with_operator=False):
    """Well-typed straight-line programs with ifs, a small loop and optional calls.

    Division never appears inside an ``if`` so that speculative evaluation of
    the untaken branch cannot raise where the sequential program does not.
    """
    nparams = draw(st.integers(1, 3))
    params = [(f"a{i}", draw(st.sampled_from(WIDTHS))) for i in range(nparams)]
    names = [p for p, _ in params]
    lines = []
    for i in range(draw(st.integers(1, 3))):
        t = draw(st.sampled_from(WIDTHS))
        lines.append(f"  {t} v{i} = {draw(expressions(names))};")
        names.append(f"v{i}")
    if draw(st.booleans()):
        target = draw(st.sampled_from(names[nparams:] or names))
        cond = f"{draw(expressions(names, 1, False))} {draw(st.sampled_from(['<', '<=', '>', '>=', '==', '!=']))} {draw(expressions(names, 1, False))}"
        then = draw(expressions(names, 1, False))
        lines.append(f"  if ({cond}) {{ {target} = {then}; }}"
                     + (f" else {{ {target} = {draw(expressions(names, 1, False))}; }}"
                        if draw(st.booleans()) else ""))
    if draw(st.booleans()):
        target = draw(st.sampled_from(names))
        lines.append(f"  for (i = 0; i < {draw(st.integers(1, 3))}; i++) {{ {target} = {target} + i; }}")
    helper = ""
    if draw(st.booleans()):
        helper = "int16 twice(int16 x) {\n  return x + x;\n}\n\n"
        lines.append(f"  {names[-1]} = twice({draw(expressions(names, 1))});")
    op_src = ""
    if with_operator:
        op_src = OPERATOR_SRC + "\n"
        args = ", ".join(draw(expressions(names, 1, False)) for _ in range(3))
        lines.append(f"  {names[-1]} = mac3({args});")
    ret_t = draw(st.sampled_from(WIDTHS))
    body = "\n".join(lines)
    sig = ", ".join(f"{t} {p}" for p, t in params)
    return f"{op_src}{helper}{ret_t} top({sig}) {{\n{body}\n  return {draw(expressions(names, 1))};\n}}\n"


# ---------------------------------------------------------------------------
# random dataflow graphs for scheduler/binder properties

FINE = ("add", "sub", "mul", "cmp")


def random_dfg(rng: random.Random, n_ops: int, n_inputs: int = 3) -> DataFlowGraph:
    nodes: dict[int, DfgNode] = {}
    ids = itertools.count()
    reads = []
    for i in range(n_inputs):
        k = next(ids)
        nodes[k] = DfgNode(k, "read", port=f"x{i}", width=16, latency=0)
        reads.append(k)
    values = list(reads)
    for _ in range(n_ops):
        k = next(ids)
        op = rng.choice(FINE)
        a, b = rng.choice(values), rng.choice(values)
        nodes[k] = DfgNode(k, op, (a, b), rel="lt" if op == "cmp" else None)
        values.append(k)
    consumed = {s for n in nodes.values() for s in n.operands}
    sinks = [k for k in values[n_inputs:] if k not in consumed] or [values[-1]]
    acc = sinks[0]
    for s in sinks[1:]:  # fold dangling results into one output
        k = next(ids)
        nodes[k] = DfgNode(k, "add", (acc, s))
        acc = k
    k = next(ids)
    nodes[k] = DfgNode(k, "write", (acc,), port="ret", latency=0)
    g = DataFlowGraph("g", nodes, [(f"x{i}", SignalType("int16")) for i in range(n_inputs)],
                      [("ret", SignalType("int16"))])
    return infer_widths(g)


def random_constraints(rng: random.Random) -> ResourceConstraints:
    return ResourceConstraints({"addsub": rng.randint(1, 2), "mul": rng.randint(1, 2),
                                "cmp": 1})


def exhaustive_optimum(graph: DataFlowGraph, constraints: ResourceConstraints) -> int:
    """Minimum latency over all feasible schedules (unit-latency operations only).

    Breadth-first search over the set of finished operations; every subset of
    the ready operations that fits the per-class limits is tried each cycle.
    """
    ops = [n for n in graph if n.is_operation]
    assert all(n.latency == 1 for n in ops)
    op_ids = {n.id for n in ops}
    preds = {n.id: {s for s in n.operands if s in op_ids} for n in ops}
    if not ops:
        return 1
    frontier = {frozenset()}
    t = 0
    while True:
        t += 1
        nxt = set()
        for done in frontier:
            ready = [k for k in op_ids - done if preds[k] <= done]
            for r in range(1, len(ready) + 1):
                for subset in itertools.combinations(ready, r):
                    use: dict[str, int] = {}
                    for k in subset:
                        cls = constraints.class_of(graph.nodes[k])
                        use[cls] = use.get(cls, 0) + 1
                    if all(constraints.limit(c) is None or u <= constraints.limit(c)
                           for c, u in use.items()):
                        new = done | frozenset(subset)
                        if new == op_ids:
                            return t
                        nxt.add(new)
        frontier = nxt


CORPUS_SEED = 2024


def corpus(count=200):
    """Fixed scheduling corpus: random graphs of at most 12 operation nodes."""
    rng = random.Random(CORPUS_SEED)
    out = []
    while len(out) < count:
        g = random_dfg(rng, rng.randint(2, 9))
        if sum(n.is_operation for n in g) <= 12:
            out.append((g, random_constraints(rng)))
    return out


# acceptance result lines, echoed in the terminal summary by conftest
ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
