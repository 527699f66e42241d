"""Functional-unit allocation and binding for the three synthesis conditions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .cdfg import DataFlowGraph, DfgNode
from .errors import BinderError, MissingMacro, ShareConflict
from .frontend.ast import Signature
from .scheduler import Schedule

MODES = ("operator", "frra", "flat")
FRRA_OPS = frozenset({"add", "sub", "mul", "div", "cmp"})
KIND_OF_OP = {"add": "add", "sub": "add", "mul": "mul", "div": "div", "cmp": "cmp", "mux": "mux"}
SUPPORTED = {
    "add": frozenset({"add", "sub"}),
    "mul": frozenset({"mul"}),
    "div": frozenset({"div"}),
    "cmp": frozenset({"cmp"}),
    "mux": frozenset({"mux"}),
    "alu": FRRA_OPS,
}
BASIC_KINDS = frozenset({"add", "mul", "div", "cmp"})


@dataclass
class FunctionalUnit:
    id: int
    kind: str  # add | mul | div | cmp | mux | alu | macro:<name>
    width: int
    supported_ops: frozenset[str]
    signature: Signature | None = None
    latency: int = 1
    lut_cost: int | None = None
    register_bits: int | None = None

    @property
    def is_macro(self) -> bool:
        return self.kind.startswith("macro:")


@dataclass
class Binding:
    unit_of: dict[int, int]
    units: dict[int, FunctionalUnit]
    mode: str
    share_unit: dict[str, int] = field(default_factory=dict)

    def dump(self, schedule: Schedule) -> str:
        lines = [f"unit {u.id} {u.kind} w={u.width}" for u in self.units.values()]
        lines += [f"bind {nid} -> {self.unit_of[nid]} @{schedule.step_of[nid]}"
                  for nid in sorted(self.unit_of)]
        return "\n".join(lines) + "\n"

    def nodes_of(self, unit_id: int) -> list[int]:
        return sorted(n for n, u in self.unit_of.items() if u == unit_id)


def _op_kind(node: DfgNode, mode: str) -> str:
    if node.op == "macro":
        return f"macro:{node.func}"
    if mode == "frra" and node.op in FRRA_OPS:
        return "alu"
    return KIND_OF_OP[node.op]


def bind(graph: DataFlowGraph, schedule: Schedule, db=None, mode: str = "operator") -> Binding:
    """Bind every operation node of ``graph`` to a functional unit.

    ``operator``: macro nodes bind to database macros, fine-grained nodes share
    per-class units greedily. ``frra``: arithmetic nodes share reconfigurable
    ALUs. ``flat``: one dedicated unit per operation. The graph must already be
    inlined for ``frra`` and ``flat``.
    """
    if mode not in MODES:
        raise BinderError(f"unknown binding mode {mode!r}")
    units: dict[int, FunctionalUnit] = {}
    unit_of: dict[int, int] = {}
    busy: dict[int, list[tuple[int, int]]] = {}
    share_unit: dict[str, int] = {}

    def free(uid: int, start: int, end: int) -> bool:
        return all(end <= s or e <= start for s, e in busy[uid])

    def new_unit(node: DfgNode, kind: str) -> FunctionalUnit:
        uid = len(units)
        if kind.startswith("macro:"):
            block = db.lookup(node.signature) if db is not None else None
            if block is None:
                raise MissingMacro(f"no macro block registered for {node.signature}")
            unit = FunctionalUnit(uid, kind, node.signature.ret.width, frozenset({kind}),
                                  node.signature, block.latency_cycles, block.lut_cost,
                                  block.register_bits)
        else:
            unit = FunctionalUnit(uid, kind, node.width, SUPPORTED[kind])
        units[uid] = unit
        busy[uid] = []
        return unit

    order = sorted((n for n in graph if n.is_operation), key=lambda n: (schedule.step_of[n.id], n.id))
    for node in order:
        if mode != "operator" and node.op == "macro":
            raise BinderError(f"{mode} binding requires operator calls to be inlined "
                              f"(found macro:{node.func})")
        kind = _op_kind(node, mode)
        start = schedule.step_of[node.id]
        end = start + node.latency
        chosen = None
        share = node.share_name if node.op == "macro" else None
        if share is not None and share in share_unit:
            chosen = units[share_unit[share]]
            if chosen.kind != kind:
                raise ShareConflict(f"share name {share!r} spans different operators "
                                    f"({chosen.kind} and {kind})")
            if not free(chosen.id, start, end):
                raise ShareConflict(f"calls sharing {share!r} overlap at step {start}; "
                                    "reschedule with one instance per shared operator")
        elif mode != "flat":
            for unit in units.values():
                if unit.kind == kind and free(unit.id, start, end) and (
                        not unit.is_macro or unit.signature == node.signature):
                    chosen = unit
                    break
        if chosen is None:
            chosen = new_unit(node, kind)
        if share is not None:
            share_unit.setdefault(share, chosen.id)
        if mode == "operator" and node.op == "macro" and chosen.latency != node.latency:
            raise BinderError(f"node {node.id} latency {node.latency} disagrees with macro "
                              f"latency {chosen.latency}")
        if not chosen.is_macro:
            chosen.width = max(chosen.width, node.width)
        unit_of[node.id] = chosen.id
        busy[chosen.id].append((start, end))
    return Binding(unit_of, units, mode, share_unit)


def allocate(binding: Binding) -> list[tuple[str, int, int]]:
    """Per (kind, width) unit counts, sorted."""
    counts = Counter((u.kind, u.width) for u in binding.units.values())
    return sorted((kind, width, n) for (kind, width), n in counts.items())


def validate_binding(graph: DataFlowGraph, schedule: Schedule, binding: Binding) -> list[str]:
    """Independent check of overlap, class, width and share-name rules."""
    problems = []
    ops = {n.id for n in graph if n.is_operation}
    if set(binding.unit_of) != ops:
        problems.append("binding does not cover exactly the operation nodes")
    intervals: dict[int, list[tuple[int, int, int]]] = {}
    for nid, uid in sorted(binding.unit_of.items()):
        if nid not in graph.nodes or uid not in binding.units:
            problems.append(f"binding entry {nid}->{uid} references unknown node or unit")
            continue
        node, unit = graph.nodes[nid], binding.units[uid]
        op = node.opcode if node.op == "macro" else node.op
        if op not in unit.supported_ops:
            problems.append(f"node {nid} ({op}) bound to unit {uid} ({unit.kind}) lacking support")
        if node.width is not None and unit.width < node.width:
            problems.append(f"node {nid} width {node.width} exceeds unit {uid} width {unit.width}")
        if node.op == "macro" and unit.signature != node.signature:
            problems.append(f"node {nid} signature {node.signature} differs from unit {uid}")
        start = schedule.step_of[nid]
        intervals.setdefault(uid, []).append((start, start + node.latency, nid))
    for uid, spans in intervals.items():
        spans.sort()
        for (s1, e1, n1), (s2, e2, n2) in zip(spans, spans[1:]):
            if s2 < e1:
                problems.append(f"unit {uid} runs nodes {n1} and {n2} in overlapping cycles")
    shares: dict[str, set[int]] = {}
    for n in graph:
        if n.op == "macro" and n.share_name and n.id in binding.unit_of:
            shares.setdefault(n.share_name, set()).add(binding.unit_of[n.id])
    for name, uids in sorted(shares.items()):
        if len(uids) > 1:
            problems.append(f"share name {name!r} bound to {len(uids)} units")
    if binding.mode == "flat" and len(set(binding.unit_of.values())) != len(binding.unit_of):
        problems.append("flat binding shares a unit")
    return problems
