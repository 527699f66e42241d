from __future__ import annotations

from dataclasses import dataclass

from ..errors import DslSyntaxError
from .ast import TYPE_KINDS, Pos, Pragma
from .pragmas import is_cyber_comment, parse_directive

KEYWORDS = {"if", "else", "for", "return", *TYPE_KINDS}

# longest first so that "<=" wins over "<"
PUNCT = ("++", "--", "+=", "-=", "<=", ">=", "==", "!=",
         "(", ")", "{", "}", "[", "]", ";", ",", "=", "+", "-", "*", "/", "<", ">")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", "kw", "punct", "pragma", "eof"
    text: str
    pos: Pos
    pragma: Pragma | None = None

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(count: int) -> None:
        nonlocal i, line, col
        chunk = source[i:i + count]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = count - chunk.rfind("\n")
        else:
            col += count
        i += count

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f\v":
            advance(1)
            continue
        pos = Pos(line, col)
        if source.startswith("//", i):
            j = source.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise DslSyntaxError("unterminated comment", line=pos.line, col=pos.col)
            body = source[i + 2:end]
            if not is_cyber_comment(body):
                raise DslSyntaxError(
                    "block comments are reserved for Cyber directives; use // comments",
                    line=pos.line, col=pos.col)
            tokens.append(Token("pragma", source[i:end + 2], pos, parse_directive(body, pos)))
            advance(end + 2 - i)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                raise DslSyntaxError("malformed integer literal", line=pos.line, col=pos.col)
            tokens.append(Token("int", source[i:j], pos))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, pos))
            advance(j - i)
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                tokens.append(Token("punct", p, pos))
                advance(len(p))
                break
        else:
            raise DslSyntaxError(f"unexpected character {ch!r}", line=pos.line, col=pos.col)
    tokens.append(Token("eof", "", Pos(line, col)))
    return tokens
