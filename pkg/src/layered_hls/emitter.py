"""Emit a synthesized design as an ``.fsmd`` netlist.

Every operation result lands in a register named after its dataflow node, so
values crossing state boundaries are always registered. Reads and constants
are wired straight into their consumers as ``p:`` / ``#`` sources.
"""

from __future__ import annotations

from typing import Mapping

from .binder import Binding
from .cdfg import DataFlowGraph
from .errors import ConsistencyError
from .estimator import CostModel, lut_cost
from .netlist import Netlist, NlOp, NlPort, NlState, NlUnit, parse_netlist, source_token
from .pe_model import PEArray
from .scheduler import Schedule


def build_netlist(array: PEArray, graph: DataFlowGraph, schedule: Schedule, binding: Binding, *,
                  name: str | None = None, model: CostModel | None = None,
                  macros: Mapping[str, Netlist | str] | None = None) -> Netlist:
    model = model or CostModel()
    macros = dict(macros or {})
    _check(array, graph, schedule, binding)
    nl = Netlist(name or graph.name)

    for uid in sorted(binding.units):
        u = binding.units[uid]
        lut = u.lut_cost if u.is_macro else lut_cost(u.kind, u.width, model)
        nl.units[uid] = NlUnit(uid, u.kind, u.width, lut, u.latency)
    for n in graph:
        if n.is_operation:
            nl.regs[n.id] = n.width
    for port, w in graph.input_ports().items():
        nl.ports.append(NlPort("in", port, w))
    for n in graph:
        if n.op == "write":
            nl.ports.append(NlPort("out", n.port, n.width, source_token(graph, n.operands[0])))

    nl.states = [NlState(k) for k in range(schedule.total_steps)]
    starts = sorted((schedule.step_of[n.id], binding.unit_of[n.id], n.id)
                    for n in graph if n.is_operation)
    alu_config: dict[int, str] = {}
    for step, uid, nid in starts:
        node = graph.nodes[nid]
        if nl.units[uid].kind == "alu" and alu_config.get(uid) != node.opcode:
            alu_config[uid] = node.opcode
            nl.states[step].reconf.append((uid, node.opcode))
        srcs = tuple(source_token(graph, s) for s in node.operands)
        nl.states[step].ops.append(NlOp(uid, node.opcode, node.width, nid, srcs))

    nl.bypass = list(array.bypass)
    for u in binding.units.values():
        if u.is_macro:
            fname = u.kind[6:]
            if fname not in macros:
                raise ConsistencyError(f"no netlist supplied for macro {fname!r}")
            sub = macros[fname]
            nl.macros[fname] = parse_netlist(sub) if isinstance(sub, str) else sub
    return nl


def emit(array: PEArray, graph: DataFlowGraph, schedule: Schedule, binding: Binding, *,
         name: str | None = None, model: CostModel | None = None,
         macros: Mapping[str, Netlist | str] | None = None) -> str:
    """Netlist text for one compilation; byte-deterministic in its inputs."""
    return build_netlist(array, graph, schedule, binding, name=name, model=model,
                         macros=macros).to_text()


def _check(array: PEArray, graph: DataFlowGraph, schedule: Schedule, binding: Binding) -> None:
    ops = {n.id for n in graph if n.is_operation}
    for nid, uid in binding.unit_of.items():
        if nid not in graph.nodes:
            raise ConsistencyError(f"binding references unknown node {nid}")
        if uid not in binding.units:
            raise ConsistencyError(f"node {nid} bound to unknown unit {uid}")
    missing = ops - set(binding.unit_of)
    if missing:
        raise ConsistencyError(f"operation nodes without a unit: {sorted(missing)}")
    if set(schedule.step_of) != set(graph.nodes):
        raise ConsistencyError("schedule does not cover the graph")
    placed = sorted(k for pe in array.pes for k in pe.nodes)
    if placed != sorted(graph.nodes):
        raise ConsistencyError("PE array does not place every graph node exactly once")
    for n in graph:
        if n.is_operation and schedule.step_of[n.id] + n.latency > schedule.total_steps:
            raise ConsistencyError(f"node {n.id} finishes after the last state")
