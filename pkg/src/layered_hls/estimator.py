"""LUT and register cost estimation over emitted netlists.

The default cost model uses textbook cell counts as a proxy for FPGA LUTs:
ripple adders cost one LUT per bit, array multipliers ``w*w`` cells and array
dividers twice that. Everything is overridable from a config file with lines
``cost <op> = <expr>`` where ``<expr>`` uses integers, ``w`` (or ``S``/``T``
for the ``fsm`` entry), ``+``, ``*``, parentheses and ``ceil(<expr>/<int>)``.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from typing import Callable

from .binder import BASIC_KINDS, FRRA_OPS
from .errors import CostModelError, UnknownOp
from .netlist import Netlist, parse_netlist

DEFAULT_EXPRS = {
    "add": "w",
    "sub": "w",
    "cmp": "w",
    "mul": "w*w",
    "div": "2*w*w",
    "mux2": "ceil(w/2)",
    "alu_overhead": "2*ceil(w/2)",
    "fsm": "2*S+T",
}
RECONF_BITS = 3  # instruction word selecting one of the five ALU operations
CONDITIONS = ("operator", "frra", "flat")
CONDITION_LABELS = {"operator": "Operator", "frra": "Frra", "flat": "Flat"}


def _compile(expr: str, variables: tuple[str, ...]) -> Callable[..., int]:
    """Compile an arithmetic cost expression into a function of ``variables``."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError:
        raise CostModelError(f"cannot parse cost expression {expr!r}") from None

    def ev(node, env):
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and node.value >= 0:
            return node.value
        if isinstance(node, ast.Name) and node.id in variables:
            return env[node.id]
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Mult)):
            a, b = ev(node.left, env), ev(node.right, env)
            return a + b if isinstance(node.op, ast.Add) else a * b
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "ceil"
                and len(node.args) == 1 and not node.keywords
                and isinstance(node.args[0], ast.BinOp) and isinstance(node.args[0].op, ast.Div)
                and isinstance(node.args[0].right, ast.Constant)
                and isinstance(node.args[0].right.value, int) and node.args[0].right.value > 0):
            return math.ceil(ev(node.args[0].left, env) / node.args[0].right.value)
        raise CostModelError(f"unsupported construct in cost expression {expr!r}")

    def fn(*args):
        return ev(tree, dict(zip(variables, args)))

    fn(*([16] * len(variables)))  # reject bad syntax at load time
    return fn


@dataclass
class CostModel:
    exprs: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_EXPRS))

    def __post_init__(self):
        unknown = set(self.exprs) - set(DEFAULT_EXPRS)
        if unknown:
            raise UnknownOp(f"cost model has unknown entries: {', '.join(sorted(unknown))}")
        merged = dict(DEFAULT_EXPRS)
        merged.update(self.exprs)
        self.exprs = merged
        self._fns = {op: _compile(e, ("S", "T") if op == "fsm" else ("w",))
                     for op, e in self.exprs.items()}

    def op(self, name: str, w: int) -> int:
        if name not in self._fns or name == "fsm":
            raise UnknownOp(f"no cost function for {name!r}")
        return self._fns[name](w) if w > 0 else 0

    def fsm(self, states: int, transitions: int | None = None) -> int:
        if states == 0:
            return 0
        return self._fns["fsm"](states, states if transitions is None else transitions)

    def alu(self, w: int) -> int:
        """Reconfigurable ALU: widest primitive plus operand-steering per extra op."""
        core = max(self.op(o, w) for o in sorted(FRRA_OPS))
        return core + (len(FRRA_OPS) - 1) * self.op("alu_overhead", w)


def load_cost_model(text: str) -> CostModel:
    exprs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"cost\s+(\w+)\s*=\s*(.+)", line)
        if not m:
            raise CostModelError(f"malformed cost line: {raw!r}", line=lineno, col=1)
        if m.group(1) in exprs:
            raise CostModelError(f"cost for {m.group(1)!r} given twice", line=lineno, col=1)
        exprs[m.group(1)] = m.group(2).strip()
    try:
        return CostModel(exprs)
    except CostModelError as exc:
        raise CostModelError(exc.message, line=lineno, col=1) from None


def lut_cost(kind: str, width: int, model: CostModel | None = None) -> int:
    """LUT count of one unit of ``kind`` (``add``, ``mul``, ``alu``, ``mux`` ...)."""
    model = model or CostModel()
    if kind == "alu":
        return model.alu(width) if width > 0 else 0
    if kind == "mux":
        return model.op("mux2", width)
    if kind in ("add", "sub", "mul", "div", "cmp"):
        return model.op(kind, width)
    if kind.startswith("macro:"):
        raise UnknownOp("macro unit cost comes from its database entry")
    raise UnknownOp(f"unknown operation class {kind!r}")


@dataclass
class ResourceReport:
    condition: str
    benchmark: str
    lut_total: int
    lut_excl_basic: int
    register_bits: int
    macros: int
    cycles: int

    def row(self) -> str:
        return (f"{self.benchmark},{CONDITION_LABELS.get(self.condition, self.condition)},"
                f"{self.lut_total},{self.lut_excl_basic},{self.register_bits},{self.macros},"
                f"{self.cycles}")


def unit_lut(unit, model: CostModel) -> int:
    return unit.lut if unit.kind.startswith("macro:") else lut_cost(unit.kind, unit.width, model)


def _macro_regbits(netlist: Netlist, name: str) -> int:
    sub = netlist.macros.get(name)
    if sub is None:
        return 0
    return sum(sub.regs.values()) + RECONF_BITS * len(sub.reconf_events) + sum(
        _macro_regbits(sub, u.kind[6:]) for u in sub.units.values() if u.kind.startswith("macro:"))


def estimate(netlist: Netlist | str, model: CostModel | None = None, *,
             condition: str = "", benchmark: str = "") -> ResourceReport:
    """Cost a netlist: unit LUTs + controller + bypass steering; registers and contexts."""
    model = model or CostModel()
    if isinstance(netlist, str):
        netlist = parse_netlist(netlist)
    units = sum(unit_lut(u, model) for u in netlist.units.values())
    basic = sum(unit_lut(u, model) for u in netlist.units.values() if u.kind in BASIC_KINDS)
    control = model.fsm(len(netlist.states))
    bypass = sum(model.op("mux2", w) for _, _, w in netlist.bypass)
    total = units + control + bypass
    regbits = sum(netlist.regs.values()) + RECONF_BITS * len(netlist.reconf_events)
    regbits += sum(_macro_regbits(netlist, u.kind[6:])
                   for u in netlist.units.values() if u.kind.startswith("macro:"))
    macros = sum(1 for u in netlist.units.values() if u.kind.startswith("macro:"))
    return ResourceReport(condition, benchmark, total, total - basic, regbits, macros,
                          len(netlist.states))


CSV_HEADER = "benchmark,condition,lut_total,lut_excl_basic,regbits,macros,cycles"


def report_csv(reports: list[ResourceReport]) -> str:
    return "\n".join([CSV_HEADER, *(r.row() for r in reports)]) + "\n"


def report_dat(reports: list[ResourceReport]) -> str:
    """Gnuplot data: one row per benchmark, one column pair per condition."""
    benches = list(dict.fromkeys(r.benchmark for r in reports))
    cell = {(r.benchmark, r.condition): r for r in reports}
    head = "# benchmark " + " ".join(f"{CONDITION_LABELS[c]}_total {CONDITION_LABELS[c]}_excl"
                                     for c in CONDITIONS)
    lines = [head]
    for b in benches:
        vals = []
        for c in CONDITIONS:
            r = cell.get((b, c))
            vals += [str(r.lut_total), str(r.lut_excl_basic)] if r else ["NaN", "NaN"]
        lines.append(f"{b} {' '.join(vals)}")
    return "\n".join(lines) + "\n"


GNUPLOT_SCRIPT = """\
set terminal pngcairo size 800,500
set output 'figure4.png'
set style data histograms
set style histogram clustered gap 1
set style fill solid 0.8 border -1
set ylabel 'LUTs'
set key top left
plot 'figure4.dat' using 2:xtic(1) title 'Operator', \\
     '' using 4 title 'Frra', \\
     '' using 6 title 'Flat'
"""


def format_table(reports: list[ResourceReport]) -> str:
    rows = [CSV_HEADER.split(",")] + [r.row().split(",") for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in rows) + "\n"
