"""In-memory form of the ``.fsmd`` netlist and its line-oriented text syntax.

Grammar (one item per line, sections in this order)::

    fsmd v1 <name>
    fu <id> <kind> w=<w> lut=<n> lat=<n>
    reg <id> w=<w>
    port in <name> w=<w>
    port out <name> w=<w> src=<source>
    state <k>
    reconf <k> <alu id> <opcode>          (inside state k, before its ops)
    op <unit> <opcode> w=<w> <dst> <source>...
    bypass <src pe> <dst pe> w=<w>
    macrodef <name>                       (nested netlist, indented two spaces)
    endmacro

A source is ``r<id>`` (register), ``p:<port>`` or ``p:<port>/<w>`` (input
port, optionally truncated to ``w`` bits) or ``#<int>`` (constant).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import NetlistParseError

HEADER = "fsmd v1"


@dataclass
class NlUnit:
    id: int
    kind: str
    width: int
    lut: int
    latency: int


@dataclass
class NlOp:
    unit: int
    opcode: str
    width: int
    dst: int
    srcs: tuple[str, ...]


@dataclass
class NlState:
    index: int
    reconf: list[tuple[int, str]] = field(default_factory=list)
    ops: list[NlOp] = field(default_factory=list)


@dataclass
class NlPort:
    direction: str
    name: str
    width: int
    src: str | None = None


@dataclass
class Netlist:
    name: str
    units: dict[int, NlUnit] = field(default_factory=dict)
    regs: dict[int, int] = field(default_factory=dict)  # id -> width
    ports: list[NlPort] = field(default_factory=list)
    states: list[NlState] = field(default_factory=list)
    bypass: list[tuple[int, int, int]] = field(default_factory=list)
    macros: dict[str, "Netlist"] = field(default_factory=dict)

    @property
    def inputs(self) -> list[NlPort]:
        return [p for p in self.ports if p.direction == "in"]

    @property
    def outputs(self) -> list[NlPort]:
        return [p for p in self.ports if p.direction == "out"]

    @property
    def reconf_events(self) -> list[tuple[int, int, str]]:
        return [(s.index, alu, op) for s in self.states for alu, op in s.reconf]

    def to_text(self) -> str:
        return "\n".join(self._lines()) + "\n"

    def _lines(self) -> list[str]:
        out = [f"{HEADER} {self.name}"]
        out += [f"fu {u.id} {u.kind} w={u.width} lut={u.lut} lat={u.latency}"
                for u in sorted(self.units.values(), key=lambda u: u.id)]
        out += [f"reg {r} w={w}" for r, w in sorted(self.regs.items())]
        for p in self.ports:
            line = f"port {p.direction} {p.name} w={p.width}"
            out.append(line + (f" src={p.src}" if p.direction == "out" else ""))
        for s in self.states:
            out.append(f"state {s.index}")
            out += [f"reconf {s.index} {alu} {op}" for alu, op in s.reconf]
            out += [f"op {o.unit} {o.opcode} w={o.width} r{o.dst} {' '.join(o.srcs)}".rstrip()
                    for o in s.ops]
        out += [f"bypass {a} {b} w={w}" for a, b, w in self.bypass]
        for name in sorted(self.macros):
            out.append(f"macrodef {name}")
            out += ["  " + line for line in self.macros[name]._lines()]
            out.append("endmacro")
        return out


def source_token(graph, nid: int) -> str:
    """Netlist source naming the value of dataflow node ``nid``."""
    node = graph.nodes[nid]
    if node.op == "const":
        return f"#{node.value}"
    if node.op == "read":
        port_width = graph.input_ports()[node.port]
        return f"p:{node.port}" if node.width >= port_width else f"p:{node.port}/{node.width}"
    return f"r{nid}"


_KV = re.compile(r"^([a-z]+)=(\S*)$")
_SRC = re.compile(r"^(r\d+|p:[^\s/]+(/\d+)?|#-?\d+)$")


def _fail(msg: str, lineno: int):
    raise NetlistParseError(msg, line=lineno, col=1)


def _kv(token: str, key: str, lineno: int) -> str:
    m = _KV.match(token)
    if not m or m.group(1) != key:
        _fail(f"expected {key}=<value>, got {token!r}", lineno)
    return m.group(2)


def _int(text: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        _fail(f"bad {what} {text!r}", lineno)


def parse_netlist(text: str) -> Netlist:
    return _parse(text.splitlines(), 0)


def _parse(lines: list[str], offset: int) -> Netlist:
    if not lines or not lines[0].startswith(HEADER + " "):
        _fail(f"missing '{HEADER} <name>' header", offset + 1)
    head = lines[0].split()
    if len(head) != 3:
        _fail("malformed header", offset + 1)
    nl = Netlist(head[2])
    section = 0  # 0 fu, 1 reg, 2 port, 3 state, 4 bypass, 5 macrodef
    order = {"fu": 0, "reg": 1, "port": 2, "state": 3, "reconf": 3, "op": 3, "bypass": 4,
             "macrodef": 5}
    i = 1
    while i < len(lines):
        lineno = offset + i + 1
        raw = lines[i]
        parts = raw.split()
        i += 1
        if not parts:
            continue
        kw = parts[0]
        if kw not in order:
            _fail(f"unknown keyword {kw!r}", lineno)
        if order[kw] < section:
            _fail(f"{kw!r} line out of section order", lineno)
        section = order[kw]
        if kw == "fu":
            if len(parts) != 6:
                _fail("fu needs: id kind w= lut= lat=", lineno)
            uid = _int(parts[1], lineno, "unit id")
            if uid in nl.units:
                _fail(f"duplicate unit {uid}", lineno)
            nl.units[uid] = NlUnit(uid, parts[2], _int(_kv(parts[3], "w", lineno), lineno, "width"),
                                   _int(_kv(parts[4], "lut", lineno), lineno, "lut"),
                                   _int(_kv(parts[5], "lat", lineno), lineno, "latency"))
            if nl.units[uid].latency < 1:
                _fail("unit latency must be >= 1", lineno)
        elif kw == "reg":
            if len(parts) != 3:
                _fail("reg needs: id w=", lineno)
            rid = _int(parts[1], lineno, "register id")
            if rid in nl.regs:
                _fail(f"duplicate register {rid}", lineno)
            nl.regs[rid] = _int(_kv(parts[2], "w", lineno), lineno, "width")
        elif kw == "port":
            if len(parts) < 4 or parts[1] not in ("in", "out"):
                _fail("port needs: in|out name w=", lineno)
            width = _int(_kv(parts[3], "w", lineno), lineno, "width")
            if parts[1] == "in":
                if len(parts) != 4:
                    _fail("input port takes no source", lineno)
                nl.ports.append(NlPort("in", parts[2], width))
            else:
                if len(parts) != 5:
                    _fail("output port needs src=", lineno)
                nl.ports.append(NlPort("out", parts[2], width, _kv(parts[4], "src", lineno)))
        elif kw == "state":
            if len(parts) != 2:
                _fail("state needs an index", lineno)
            k = _int(parts[1], lineno, "state index")
            if k != len(nl.states):
                _fail(f"state {k} out of order (expected {len(nl.states)})", lineno)
            nl.states.append(NlState(k))
        elif kw == "reconf":
            if not nl.states or len(parts) != 4:
                _fail("reconf must follow a state line: reconf <state> <alu> <op>", lineno)
            if _int(parts[1], lineno, "state index") != nl.states[-1].index:
                _fail("reconf state does not match the enclosing state", lineno)
            if nl.states[-1].ops:
                _fail("reconf must precede the ops of its state", lineno)
            nl.states[-1].reconf.append((_int(parts[2], lineno, "unit id"), parts[3]))
        elif kw == "op":
            if not nl.states or len(parts) < 5:
                _fail("op must follow a state line: op <unit> <opcode> w= <dst> <src>...", lineno)
            dst = parts[4]
            if not re.fullmatch(r"r\d+", dst):
                _fail(f"op destination must be a register, got {dst!r}", lineno)
            nl.states[-1].ops.append(NlOp(_int(parts[1], lineno, "unit id"), parts[2],
                                          _int(_kv(parts[3], "w", lineno), lineno, "width"),
                                          int(dst[1:]), tuple(parts[5:])))
        elif kw == "bypass":
            if len(parts) != 4:
                _fail("bypass needs: src dst w=", lineno)
            nl.bypass.append((_int(parts[1], lineno, "PE index"), _int(parts[2], lineno, "PE index"),
                              _int(_kv(parts[3], "w", lineno), lineno, "width")))
        elif kw == "macrodef":
            if len(parts) != 2:
                _fail("macrodef needs a name", lineno)
            body = []
            start = i
            while i < len(lines) and lines[i].strip() != "endmacro":
                if not lines[i].startswith("  ") and lines[i].strip():
                    _fail("macro body lines must be indented by two spaces", offset + i + 1)
                body.append(lines[i][2:])
                i += 1
            if i >= len(lines):
                _fail("macrodef without endmacro", lineno)
            i += 1
            if parts[1] in nl.macros:
                _fail(f"duplicate macrodef {parts[1]!r}", lineno)
            nl.macros[parts[1]] = _parse(body, offset + start)
    _check(nl, offset)
    return nl


def _check(nl: Netlist, offset: int) -> None:
    inputs = {p.name: p.width for p in nl.inputs}

    def check_src(src: str, where: str):
        if not _SRC.match(src):
            _fail(f"bad source {src!r} in {where}", offset + 1)
        if src.startswith("r") and int(src[1:]) not in nl.regs:
            _fail(f"{where} reads undefined register {src}", offset + 1)
        if src.startswith("p:") and src[2:].split("/")[0] not in inputs:
            _fail(f"{where} reads undefined port {src}", offset + 1)

    for s in nl.states:
        for o in s.ops:
            where = f"state {s.index} op on unit {o.unit}"
            if o.unit not in nl.units:
                _fail(f"{where} uses undefined unit", offset + 1)
            if o.dst not in nl.regs:
                _fail(f"{where} writes undefined register r{o.dst}", offset + 1)
            for src in o.srcs:
                check_src(src, where)
            if o.opcode.startswith("macro:") and o.opcode[6:] not in nl.macros:
                _fail(f"{where} calls macro {o.opcode[6:]!r} with no macrodef", offset + 1)
        for alu, _ in s.reconf:
            if alu not in nl.units:
                _fail(f"reconf in state {s.index} names undefined unit {alu}", offset + 1)
    for p in nl.outputs:
        check_src(p.src, f"output port {p.name}")


def macro_occupancy(netlist: Netlist) -> dict[int, list[tuple[int, int]]]:
    """Cycle ranges ``[start, end)`` during which each macro unit is busy."""
    out: dict[int, list[tuple[int, int]]] = {}
    for s in netlist.states:
        for o in s.ops:
            unit = netlist.units[o.unit]
            if unit.kind.startswith("macro:"):
                out.setdefault(o.unit, []).append((s.index, s.index + unit.latency))
    return out


def unit_kind_counts(netlist: Netlist) -> Counter:
    return Counter(u.kind for u in netlist.units.values())
