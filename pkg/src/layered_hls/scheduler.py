"""Control-step assignment: ASAP and resource-constrained list scheduling.

Latency model: fine-grained operations take one cycle, macro nodes take the
latency recorded on the node (from the macro database), reads, constants and
writes take zero cycles and use no resources. No chaining.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .cdfg import DataFlowGraph, DfgNode
from .errors import CycleError, InfeasibleConstraint

ALU_CLASSES = ("addsub", "mul", "div", "cmp")
CLASS_OF_OP = {"add": "addsub", "sub": "addsub", "mul": "mul", "div": "div", "cmp": "cmp", "mux": "mux"}


@dataclass(frozen=True)
class ResourceConstraints:
    """Per-class instance limits; ``None`` means unlimited.

    Classes: ``addsub``, ``mul``, ``div``, ``cmp``, ``mux``, ``alu`` (used
    instead of the four arithmetic classes when ``fuse_alu`` is set) and
    ``macro:<function>`` for each operator. ``macro_default`` applies to
    operators without an explicit entry.
    """
    limits: Mapping[str, int | None] = field(default_factory=dict)
    fuse_alu: bool = False
    macro_default: int | None = None

    def __post_init__(self):
        for cls, n in self.limits.items():
            if n is not None and n < 1:
                raise InfeasibleConstraint(f"limit for {cls!r} must be >= 1, got {n}")
        if self.macro_default is not None and self.macro_default < 1:
            raise InfeasibleConstraint("macro_default must be >= 1")

    def class_of(self, node: DfgNode) -> str | None:
        if node.op == "macro":
            return f"macro:{node.func}"
        cls = CLASS_OF_OP.get(node.op)
        if cls in ALU_CLASSES and self.fuse_alu:
            return "alu"
        return cls

    def limit(self, cls: str) -> int | None:
        if cls in self.limits:
            return self.limits[cls]
        if cls.startswith("macro:"):
            return self.macro_default
        return None

    def with_overrides(self, overrides: Mapping[str, int | None]) -> "ResourceConstraints":
        limits = dict(self.limits)
        limits.update(overrides)
        return ResourceConstraints(limits, self.fuse_alu, self.macro_default)

    def describe(self) -> str:
        parts = [f"{k}={'inf' if v is None else v}" for k, v in sorted(self.limits.items())]
        parts.append(f"macro*={'inf' if self.macro_default is None else self.macro_default}")
        if self.fuse_alu:
            parts.append("fuse_alu")
        return " ".join(parts)


UNLIMITED = ResourceConstraints()


def default_constraints(mode: str) -> ResourceConstraints:
    """Allocation used by each synthesis condition unless overridden.

    operator: one instance per fine-grained class and per operator.
    frra: a single reconfigurable ALU.
    flat: unconstrained; every operation gets its own unit anyway.
    """
    if mode == "operator":
        return ResourceConstraints({"addsub": 1, "mul": 1, "div": 1, "cmp": 1}, macro_default=1)
    if mode == "frra":
        return ResourceConstraints({"alu": 1}, fuse_alu=True)
    if mode == "flat":
        return UNLIMITED
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class Schedule:
    step_of: dict[int, int]
    total_steps: int
    constraints: ResourceConstraints = UNLIMITED

    def dump(self) -> str:
        by_step: dict[int, list[int]] = defaultdict(list)
        for nid, step in self.step_of.items():
            by_step[step].append(nid)
        return "".join(f"step {k}: {' '.join(map(str, sorted(by_step[k])))}\n"
                       for k in sorted(by_step))


def _total(graph: DataFlowGraph, step_of: Mapping[int, int]) -> int:
    ends = [step_of[n.id] + n.latency for n in graph if n.is_operation]
    return max([1, *ends])


def _share_class(node: DfgNode) -> str | None:
    return f"share:{node.share_name}" if node.op == "macro" and node.share_name else None


def asap(graph: DataFlowGraph) -> Schedule:
    step_of: dict[int, int] = {}
    try:
        order = graph.topological()
    except ValueError as exc:
        raise CycleError(str(exc)) from None
    for k in order:
        n = graph.nodes[k]
        step_of[k] = max((step_of[s] + graph.nodes[s].latency for s in n.operands), default=0)
    return Schedule(step_of, _total(graph, step_of), UNLIMITED)


def priorities(graph: DataFlowGraph) -> dict[int, int]:
    """Longest latency-weighted path from each node to any sink, inclusive."""
    cons = graph.consumers()
    prio: dict[int, int] = {}
    for k in reversed(graph.topological()):
        n = graph.nodes[k]
        prio[k] = n.latency + max((prio[c] for c in cons[k]), default=0)
    return prio


def list_schedule(graph: DataFlowGraph, constraints: ResourceConstraints = UNLIMITED) -> Schedule:
    """Cycle-driven list scheduling with longest-path priority, ties by node id."""
    try:
        prio = priorities(graph)
    except ValueError as exc:
        raise CycleError(str(exc)) from None
    busy: dict[str, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    step_of: dict[int, int] = {}
    remaining = set(graph.nodes)
    preds_left = {n.id: len(set(n.operands)) for n in graph}
    cons = graph.consumers()
    ready_at: dict[int, int] = {n.id: 0 for n in graph if not n.operands}
    horizon = max(1, sum(max(n.latency, 1) for n in graph)) + 1

    def finish(k: int, t: int) -> None:
        step_of[k] = t
        remaining.discard(k)
        done = t + graph.nodes[k].latency
        for c in set(cons[k]):
            preds_left[c] -= 1
            ready_at[c] = max(ready_at.get(c, 0), done)

    t = 0
    while remaining:
        if t > horizon:
            raise InfeasibleConstraint("list scheduling made no progress")
        # zero-latency nodes never compete for resources; settle them first
        changed = True
        while changed:
            changed = False
            for k in sorted(remaining):
                n = graph.nodes[k]
                if not n.is_operation and preds_left[k] == 0 and ready_at[k] <= t:
                    finish(k, max(t, ready_at[k]) if n.operands else 0)
                    changed = True
        ready = [k for k in remaining
                 if preds_left[k] == 0 and ready_at[k] <= t and graph.nodes[k].is_operation]
        ready.sort(key=lambda k: (-prio[k], k))
        for k in ready:
            n = graph.nodes[k]
            classes = [c for c in (constraints.class_of(n), _share_class(n)) if c]
            span = range(t, t + n.latency)
            ok = True
            for cls in classes:
                limit = 1 if cls.startswith("share:") else constraints.limit(cls)
                if limit is not None and any(busy[cls][s] >= limit for s in span):
                    ok = False
                    break
            if ok:
                for cls in classes:
                    for s in span:
                        busy[cls][s] += 1
                finish(k, t)
        t += 1
    return Schedule(step_of, _total(graph, step_of), constraints)


def validate_schedule(graph: DataFlowGraph, schedule: Schedule) -> list[str]:
    """Independent feasibility check; returns human-readable violations."""
    problems = []
    if set(schedule.step_of) != set(graph.nodes):
        problems.append("schedule does not cover exactly the graph nodes")
        return problems
    for n in graph:
        for s in n.operands:
            need = schedule.step_of[s] + graph.nodes[s].latency
            if schedule.step_of[n.id] < need:
                problems.append(f"node {n.id} at step {schedule.step_of[n.id]} before operand {s} "
                                f"completes at {need}")
        if schedule.step_of[n.id] < 0:
            problems.append(f"node {n.id} has negative step")
    usage: dict[tuple[str, int], int] = defaultdict(int)
    for n in graph:
        if not n.is_operation:
            continue
        for cls in (schedule.constraints.class_of(n), _share_class(n)):
            if cls is None:
                continue
            for s in range(schedule.step_of[n.id], schedule.step_of[n.id] + n.latency):
                usage[(cls, s)] += 1
    for (cls, s), count in sorted(usage.items()):
        limit = 1 if cls.startswith("share:") else schedule.constraints.limit(cls)
        if limit is not None and count > limit:
            problems.append(f"class {cls} uses {count} > {limit} instances at step {s}")
    if schedule.total_steps != _total(graph, schedule.step_of):
        problems.append("total_steps does not match the latest completion")
    return problems
