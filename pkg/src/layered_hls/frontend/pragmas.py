"""Recognition of ``/* Cyber ... */`` directive comments."""

from __future__ import annotations

import re

from ..errors import PragmaError
from .ast import Pos, Pragma

_CYBER = re.compile(r"\s*Cyber(?![A-Za-z0-9_])")
_FUNC = re.compile(r"\s*Cyber\s+func\s*=\s*operator\s*")
_SHARE = re.compile(r"\s*Cyber\s+share\s+name\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*")


def is_cyber_comment(body: str) -> bool:
    """True when the text between ``/*`` and ``*/`` opens with the ``Cyber`` keyword."""
    return _CYBER.match(body) is not None


def parse_directive(body: str, pos: Pos) -> Pragma:
    """Decode the body of a Cyber comment (the text between the delimiters)."""
    if _FUNC.fullmatch(body):
        return Pragma(Pragma.FUNC_OPERATOR)
    m = _SHARE.fullmatch(body)
    if m:
        return Pragma(Pragma.SHARE_NAME, m.group(1))
    raise PragmaError(f"malformed Cyber directive {body.strip()!r}", line=pos.line, col=pos.col)


def extract_pragmas(source: str) -> list[tuple[Pos, Pragma]]:
    """Return every Cyber directive in ``source`` in order of appearance.

    Block comments that do not start with ``Cyber`` are skipped, as is
    anything inside ``//`` line comments.
    """
    out: list[tuple[Pos, Pragma]] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            col += j - i
            i = j
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise PragmaError("unterminated comment", line=line, col=col)
            body = source[i + 2:end]
            pos = Pos(line, col)
            if is_cyber_comment(body):
                out.append((pos, parse_directive(body, pos)))
            text = source[i:end + 2]
            nl = text.count("\n")
            if nl:
                line += nl
                col = len(text) - text.rfind("\n")
            else:
                col += len(text)
            i = end + 2
            continue
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1
        i += 1
    return out
