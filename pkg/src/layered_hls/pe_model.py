"""Four-layer processing-element configuration.

Each PE has an I/O layer (typed ports), a fine-grained FSMD slice (its static
context), a coarse-grained layer (macro units and reconfigurable ALUs with
their dynamic contexts) and a bypass layer linking it to neighbouring PEs in a
linear array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .binder import Binding
from .cdfg import DataFlowGraph
from .errors import PlacementError
from .netlist import source_token
from .scheduler import Schedule


@dataclass
class StaticContext:
    id: int
    fsm: list[list[tuple[int, int]]]  # per state: (unit id, node id) pairs starting there
    units: list[int]
    registers: list[int]


@dataclass
class DynamicContext:
    id: int
    register_set: tuple[tuple[str, int], ...]
    instruction_set: tuple[tuple[str, tuple[str, ...], str], ...]
    share_name: str | None = None
    members: tuple[int, ...] = ()  # node ids (macro call sites) or the ALU unit id


@dataclass
class PE:
    index: int
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    static_contexts: list[StaticContext] = field(default_factory=list)
    dynamic_contexts: list[DynamicContext] = field(default_factory=list)
    fine_units: list[int] = field(default_factory=list)
    coarse_units: list[int] = field(default_factory=list)
    nodes: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.static_contexts)

    @property
    def m(self) -> int:
        return len(self.dynamic_contexts)


@dataclass
class PEArray:
    pes: list[PE]
    bypass: list[tuple[int, int, int]]  # (source PE, destination PE, width)
    unmerged_contexts: int = 0

    @property
    def n(self) -> int:
        return sum(pe.n for pe in self.pes)

    @property
    def m(self) -> int:
        return sum(pe.m for pe in self.pes)


def read_placement(text: str) -> dict[int, int]:
    """Parse ``place <unit id> <pe index>`` lines."""
    placement: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "place":
            raise PlacementError(f"malformed placement line: {raw!r}", line=lineno, col=1)
        try:
            unit, pe = int(parts[1]), int(parts[2])
        except ValueError:
            raise PlacementError(f"malformed placement line: {raw!r}", line=lineno, col=1) from None
        if unit in placement:
            raise PlacementError(f"unit {unit} placed twice", line=lineno, col=1)
        placement[unit] = pe
    return placement


def build_pe_config(graph: DataFlowGraph, schedule: Schedule, binding: Binding,
                    placement: Mapping[int, int] | None = None,
                    num_pes: int | None = None) -> PEArray:
    """Assemble the PE array; units missing from ``placement`` go to PE 0."""
    placement = dict(placement or {})
    for uid, pe in placement.items():
        if uid not in binding.units:
            raise PlacementError(f"placement names unknown unit {uid}")
        if pe < 0 or (num_pes is not None and pe >= num_pes):
            raise PlacementError(f"unit {uid} placed on out-of-range PE {pe}")
    pe_of_unit = {uid: placement.get(uid, 0) for uid in binding.units}
    count = num_pes if num_pes is not None else max([0, *pe_of_unit.values()]) + 1
    pes = [PE(i) for i in range(count)]

    cons = graph.consumers()
    pe_of_node: dict[int, int] = {}
    for n in graph:
        if n.is_operation:
            pe_of_node[n.id] = pe_of_unit[binding.unit_of[n.id]]
    for n in graph:
        if n.op in ("read", "const"):
            users = sorted(c for c in cons[n.id] if c in pe_of_node)
            pe_of_node[n.id] = pe_of_node[users[0]] if users else 0
        elif n.op == "write":
            pe_of_node[n.id] = pe_of_node.get(n.operands[0], 0)
    for n in graph:
        pe = pes[pe_of_node[n.id]]
        pe.nodes.append(n.id)
        if n.op == "read":
            for c in cons[n.id]:
                user_pe = pes[pe_of_node[c]]
                if n.port not in user_pe.inputs:
                    user_pe.inputs.append(n.port)
        elif n.op == "write":
            pe.outputs.append(n.port)

    for uid, unit in binding.units.items():
        pe = pes[pe_of_unit[uid]]
        (pe.coarse_units if unit.is_macro or unit.kind == "alu" else pe.fine_units).append(uid)

    bypass = set()
    for n in graph:
        for src in n.operands:
            if graph.nodes[src].is_operation and n.is_operation:
                a, b = pe_of_node[src], pe_of_node[n.id]
                if a != b:
                    bypass.add((a, b, graph.nodes[src].width))

    for pe in pes:
        units = sorted(pe.fine_units + pe.coarse_units)
        if not units and not pe.nodes:
            continue
        fsm: list[list[tuple[int, int]]] = [[] for _ in range(schedule.total_steps)]
        regs = []
        for nid in pe.nodes:
            node = graph.nodes[nid]
            if node.is_operation:
                fsm[schedule.step_of[nid]].append((binding.unit_of[nid], nid))
                regs.append(nid)
        for state in fsm:
            state.sort()
        pe.static_contexts.append(StaticContext(0, fsm, units, sorted(regs)))

    unmerged = _dynamic_contexts(graph, schedule, binding, pes, pe_of_unit)
    for pe in pes:
        pe.inputs.sort()
        pe.outputs.sort()
    return PEArray(pes, sorted(bypass), unmerged)


def _dynamic_contexts(graph, schedule, binding, pes, pe_of_unit) -> int:
    """Create dynamic contexts per PE; returns the count before share-name merging."""
    raw: list[tuple[int, DynamicContext]] = []
    if binding.mode == "operator":
        for n in graph:
            if n.op != "macro":
                continue
            srcs = tuple(source_token(graph, s) for s in n.operands)
            ctx = DynamicContext(-1, ((f"r{n.id}", n.width),), ((n.opcode, srcs, f"r{n.id}"),),
                                 n.share_name, (n.id,))
            raw.append((pe_of_unit[binding.unit_of[n.id]], ctx))
    elif binding.mode == "frra":
        for uid, unit in binding.units.items():
            if unit.kind != "alu":
                continue
            nodes = sorted(binding.nodes_of(uid), key=lambda k: (schedule.step_of[k], k))
            instrs = tuple((graph.nodes[k].opcode,
                            tuple(source_token(graph, s) for s in graph.nodes[k].operands),
                            f"r{k}") for k in nodes)
            regs = tuple((f"r{k}", graph.nodes[k].width) for k in nodes)
            raw.append((pe_of_unit[uid], DynamicContext(-1, regs, instrs, None, (uid,))))
    merged: dict[tuple[int, str], DynamicContext] = {}
    for pe_index, ctx in raw:
        pe = pes[pe_index]
        if ctx.share_name is not None and (pe_index, ctx.share_name) in merged:
            first = merged[(pe_index, ctx.share_name)]
            first.members = first.members + ctx.members
            continue
        ctx.id = len(pe.dynamic_contexts)
        pe.dynamic_contexts.append(ctx)
        if ctx.share_name is not None:
            merged[(pe_index, ctx.share_name)] = ctx
    return len(raw)


def validate_adjacency(array: PEArray) -> list[tuple[int, int, int]]:
    """Bypass connections that do not join neighbouring PEs (empty when valid)."""
    return [b for b in array.bypass if abs(b[0] - b[1]) != 1]
