"""Macro-block database: pre-synthesized operators reused during binding.

File format (UTF-8, one record per line, entries sorted by signature)::

    cyberdb v1
    macro name=conv params=int16[9],int16[9] ret=int16 latency=10 lut=302 regbits=288 digest=<hex> rev=0 sum=<hex>

``sum`` is a checksum of the rest of its record, so a damaged record fails to
load instead of silently changing a cost.
"""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
from dataclasses import dataclass, field, replace as with_fields
from pathlib import Path

from .errors import DatabaseIoError, DuplicateSignature, FormatError, SemanticError
from .frontend.ast import BehaviorProgram, FunctionDef, SignalType, Signature
from .frontend.printer import function_str
from .frontend.semantic import call_graph

HEADER = "cyberdb v1"
FIELDS = ("name", "params", "ret", "latency", "lut", "regbits", "digest", "rev", "sum")


@dataclass(frozen=True)
class MacroBlock:
    name: str
    param_types: tuple[SignalType, ...]
    return_type: SignalType
    latency_cycles: int
    lut_cost: int
    register_bits: int
    body_digest: str
    revision: int = 0

    def __post_init__(self):
        if self.latency_cycles < 1:
            raise FormatError(f"macro {self.name!r}: latency must be >= 1")
        if self.lut_cost < 0 or self.register_bits < 0:
            raise FormatError(f"macro {self.name!r}: costs must be non-negative")

    @property
    def signature(self) -> Signature:
        return Signature(self.name, self.param_types, self.return_type)

    def to_line(self) -> str:
        params = ",".join(map(str, self.param_types))
        body = (f"macro name={self.name} params={params} ret={self.return_type} "
                f"latency={self.latency_cycles} lut={self.lut_cost} regbits={self.register_bits} "
                f"digest={self.body_digest} rev={self.revision}")
        return f"{body} sum={_record_sum(body)}"


def _record_sum(body: str) -> str:
    return hashlib.sha256(body.encode()).hexdigest()[:8]


@dataclass
class MacroDatabase:
    entries: dict[Signature, MacroBlock] = field(default_factory=dict)
    version: int = 1

    def lookup(self, signature: Signature) -> MacroBlock | None:
        return self.entries.get(signature)

    def add(self, block: MacroBlock, *, replace: bool = True) -> MacroBlock:
        old = self.entries.get(block.signature)
        if old is not None and old.body_digest == block.body_digest:
            return old
        if old is not None:
            if not replace:
                raise DuplicateSignature(f"{block.signature} is already registered with a "
                                         "different body")
            block = with_fields(block, revision=old.revision + 1)
        self.entries[block.signature] = block
        return block

    def sorted_entries(self) -> list[MacroBlock]:
        return [self.entries[s] for s in sorted(self.entries, key=Signature.sort_key)]

    def to_text(self) -> str:
        return "\n".join([HEADER, *(b.to_line() for b in self.sorted_entries())]) + "\n"


def lookup(db: MacroDatabase, signature: Signature) -> MacroBlock | None:
    return db.lookup(signature)


def body_digest(func: FunctionDef, program: BehaviorProgram | None = None) -> str:
    """Hash of the function body and every helper it transitively calls."""
    funcs = {func.name: func}
    if program is not None:
        funcs.update({f.name: f for f in program.functions})
    graph = call_graph(list(funcs.values()))
    seen, stack = set(), [func.name]
    while stack:
        name = stack.pop()
        if name in seen:
            continue
        seen.add(name)
        stack.extend(graph.get(name, ()))
    text = "\n".join(function_str(_strip_pragmas(funcs[n])) for n in sorted(seen))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _strip_pragmas(func: FunctionDef) -> FunctionDef:
    return FunctionDef(func.name, func.params, func.ret, func.body, ())


def register_macro(db: MacroDatabase, func: FunctionDef, cost_model=None, *,
                   program: BehaviorProgram | None = None, replace: bool = True) -> MacroBlock:
    """Synthesize ``func`` on its own and store its cost and latency in ``db``."""
    from .pipeline import synthesize_standalone

    if not func.is_operator:
        raise SemanticError(f"{func.name!r} has no 'func = operator' pragma")
    program = program or BehaviorProgram((func,), func.name)
    result = synthesize_standalone(program, func.name, model=cost_model)
    block = MacroBlock(func.name, tuple(p.type for p in func.params), func.ret,
                       max(1, result.report.cycles), result.report.lut_total,
                       result.report.register_bits, body_digest(func, program))
    return db.add(block, replace=replace)


# ---------------------------------------------------------------------------
# persistence

_LINE = re.compile(r"^macro(?: [a-z]+=\S*)+$")


def _parse_type(text: str, lineno: int) -> SignalType:
    try:
        t = SignalType.parse(text)
    except Exception:
        raise FormatError(f"bad type {text!r}", line=lineno, col=1) from None
    if t.is_void:
        raise FormatError("void is not a valid macro type here", line=lineno, col=1)
    return t


def parse_db(text: str) -> MacroDatabase:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    else:
        raise FormatError("file does not end with a newline (truncated?)", line=len(lines), col=1)
    if not lines or lines[0] != HEADER:
        got = lines[0] if lines else ""
        raise FormatError(f"expected header {HEADER!r}, got {got!r}", line=1, col=1)
    db = MacroDatabase()
    for lineno, line in enumerate(lines[1:], 2):
        if not _LINE.match(line):
            raise FormatError(f"malformed record: {line!r}", line=lineno, col=1)
        pairs = [p.split("=", 1) for p in line.split()[1:]]
        keys = [k for k, _ in pairs]
        if keys != list(FIELDS):
            raise FormatError(f"record fields must be {' '.join(FIELDS)}", line=lineno, col=1)
        rec = dict(pairs)
        body = line.rsplit(" sum=", 1)[0]
        if rec["sum"] != _record_sum(body):
            raise FormatError("record checksum mismatch", line=lineno, col=1)
        if not re.fullmatch(r"[A-Za-z_]\w*", rec["name"]):
            raise FormatError(f"bad macro name {rec['name']!r}", line=lineno, col=1)
        if not re.fullmatch(r"[0-9a-f]{16}", rec["digest"]):
            raise FormatError(f"bad digest {rec['digest']!r}", line=lineno, col=1)
        nums = {}
        for key in ("latency", "lut", "regbits", "rev"):
            if not re.fullmatch(r"0|[1-9]\d*", rec[key]):
                raise FormatError(f"{key} must be a non-negative integer, got {rec[key]!r}",
                                  line=lineno, col=1)
            nums[key] = int(rec[key])
        params = tuple(_parse_type(t, lineno) for t in rec["params"].split(",")) if rec["params"] else ()
        try:
            block = MacroBlock(rec["name"], params, _parse_type(rec["ret"], lineno), nums["latency"],
                               nums["lut"], nums["regbits"], rec["digest"], nums["rev"])
        except FormatError as exc:
            raise FormatError(exc.message, line=lineno, col=1) from None
        if block.signature in db.entries:
            raise FormatError(f"duplicate entry for {block.signature}", line=lineno, col=1)
        db.entries[block.signature] = block
    if db.to_text() != text:
        raise FormatError("entries are not in canonical sorted form", line=1, col=1)
    return db


def save(db: MacroDatabase, path: str | os.PathLike) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    data = db.to_text().encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise DatabaseIoError(f"cannot write {path}: {exc.strerror}") from None


def load(path: str | os.PathLike) -> MacroDatabase:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatabaseIoError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise FormatError(f"{path} is not UTF-8 text", line=1, col=1) from None
    return parse_db(text)
