"""End-to-end synthesis: program -> dataflow graph -> schedule -> binding -> PEs -> netlist."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .binder import Binding, bind
from .cdfg import DataFlowGraph, build_cdfg
from .emitter import build_netlist
from .errors import MissingMacro, StaleMacro, SynthesisError
from .estimator import CostModel, ResourceReport, estimate
from .frontend.ast import BehaviorProgram
from .netlist import Netlist
from .pe_model import PEArray, build_pe_config
from .scheduler import ResourceConstraints, Schedule, default_constraints, list_schedule

MODES = ("operator", "frra", "flat")


@dataclass
class SynthesisResult:
    mode: str
    graph: DataFlowGraph
    schedule: Schedule
    binding: Binding
    array: PEArray
    netlist: Netlist
    report: ResourceReport

    @property
    def text(self) -> str:
        return self.netlist.to_text()


def synthesize(program: BehaviorProgram, mode: str = "operator", db=None, *,
               constraints: ResourceConstraints | None = None,
               limits: Mapping[str, int | None] | None = None,
               model: CostModel | None = None,
               placement: Mapping[int, int] | None = None, num_pes: int | None = None,
               benchmark: str = "") -> SynthesisResult:
    """Run the whole flow under one synthesis condition.

    ``operator`` keeps operator calls as macros resolved in ``db``; ``frra`` and
    ``flat`` elaborate them inline first.
    """
    if mode not in MODES:
        raise SynthesisError(f"unknown mode {mode!r} (choose from {', '.join(MODES)})")
    model = model or CostModel()
    graph = build_cdfg(program, inline_operators=(mode != "operator"))
    macro_funcs = sorted({n.func for n in graph if n.op == "macro"})
    if macro_funcs:
        _attach_macro_latencies(graph, program, db)
    constraints = constraints or default_constraints(mode)
    if limits:
        constraints = constraints.with_overrides(limits)
    schedule = list_schedule(graph, constraints)
    binding = bind(graph, schedule, db, mode)
    array = build_pe_config(graph, schedule, binding, placement, num_pes)
    macros = {f: synthesize_standalone(program, f, model=model).netlist for f in macro_funcs}
    netlist = build_netlist(array, graph, schedule, binding, model=model, macros=macros)
    report = estimate(netlist, model, condition=mode, benchmark=benchmark)
    return SynthesisResult(mode, graph, schedule, binding, array, netlist, report)


def _attach_macro_latencies(graph: DataFlowGraph, program: BehaviorProgram, db) -> None:
    from .macrodb import body_digest

    digests: dict[str, str] = {}
    for n in graph:
        if n.op != "macro":
            continue
        block = db.lookup(n.signature) if db is not None else None
        if block is None:
            raise MissingMacro(f"no macro block registered for {n.signature}; "
                               "run 'db register' on the defining source first")
        if n.func not in digests:
            digests[n.func] = body_digest(program.function(n.func), program)
        if digests[n.func] != block.body_digest:
            raise StaleMacro(f"database entry for {n.signature} was registered from a different "
                             "body; re-register it")
        n.latency = block.latency_cycles


def synthesize_standalone(program: BehaviorProgram, func: str, *,
                          model: CostModel | None = None) -> SynthesisResult:
    """Synthesize one operator body by itself with operator-mode sharing."""
    fn = program.function(func)
    if fn.ret.is_void:
        raise SynthesisError(f"operator {func!r} must return a value")
    return synthesize(program.with_entry(func), "operator", None, model=model, benchmark=func)


def register_operators(program: BehaviorProgram, db, model: CostModel | None = None,
                       *, replace: bool = True) -> list:
    from .macrodb import register_macro

    return [register_macro(db, f, model, program=program, replace=replace)
            for f in program.functions if f.is_operator]


def compare_conditions(benchmarks: Mapping[str, BehaviorProgram], db=None,
                       model: CostModel | None = None) -> list[ResourceReport]:
    """Synthesize every benchmark under every condition; rows in benchmark-major order.

    Operators missing from ``db`` (or all of them, when ``db`` is None) are
    registered into a private copy first.
    """
    from .macrodb import MacroDatabase, register_macro

    model = model or CostModel()
    work = MacroDatabase(dict(db.entries)) if db is not None else MacroDatabase()
    reports = []
    for name, program in benchmarks.items():
        for f in program.functions:
            if f.is_operator and work.lookup(f.signature) is None:
                register_macro(work, f, model, program=program)
        for mode in MODES:
            reports.append(synthesize(program, mode, work, model=model, benchmark=name).report)
    return reports
