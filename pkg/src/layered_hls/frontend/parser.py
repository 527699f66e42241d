"""Recursive-descent parser for ``.cyb`` sources (grammar: docs/grammar.md)."""

from __future__ import annotations

from ..errors import DslSyntaxError, PragmaError
from .ast import (
    TYPE_KINDS, Assign, BehaviorProgram, BinOp, Block, Call, Decl, Expr, ExprStmt, For,
    FunctionDef, If, Index, IntLit, Neg, Param, Pos, Pragma, Return, SignalType, VarRef,
)
from .lexer import Token, tokenize
from .semantic import check_program

REL = ("<", "<=", ">", ">=", "==", "!=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # token helpers

    def peek(self, k: int = 0) -> Token:
        tok = self.toks[min(self.i + k, len(self.toks) - 1)]
        if tok.kind == "pragma":
            raise PragmaError("Cyber directive is not adjacent to a function definition",
                              line=tok.pos.line, col=tok.pos.col)
        return tok

    def next(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "kw") and tok.text == text

    def expect(self, *texts: str) -> Token:
        tok = self.peek()
        if tok.kind in ("punct", "kw") and tok.text in texts:
            self.i += 1
            return tok
        self.fail(tok, [repr(t) for t in texts])

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(tok, ["identifier"])
        self.i += 1
        return tok

    def expect_int(self) -> Token:
        tok = self.peek()
        if tok.kind != "int":
            self.fail(tok, ["integer literal"])
        self.i += 1
        return tok

    @staticmethod
    def fail(tok: Token, expected: list[str]):
        raise DslSyntaxError(f"unexpected {tok.describe()}", line=tok.pos.line,
                             col=tok.pos.col, expected=tuple(expected))

    # top level

    def program(self) -> list[FunctionDef]:
        funcs = []
        while True:
            pending: list[Pragma] = []
            while self.toks[self.i].kind == "pragma":
                pending.append(self.toks[self.i].pragma)
                self.i += 1
            tok = self.toks[self.i]
            if tok.kind == "eof":
                if pending:
                    last = self.toks[self.i - 1]
                    raise PragmaError("Cyber directive is not followed by a function definition",
                                      line=last.pos.line, col=last.pos.col)
                return funcs
            funcs.append(self.function(tuple(pending)))

    def type_name(self) -> tuple[str, Pos]:
        tok = self.peek()
        if tok.kind == "kw" and tok.text in TYPE_KINDS:
            self.i += 1
            return tok.text, tok.pos
        self.fail(tok, list(TYPE_KINDS))

    def array_suffix(self) -> int | None:
        if not self.at("["):
            return None
        self.next()
        tok = self.expect_int()
        self.expect("]")
        n = int(tok.text)
        if n < 1:
            raise DslSyntaxError("array length must be at least 1", line=tok.pos.line, col=tok.pos.col)
        return n

    def signal_type(self, kind: str, pos: Pos, array_len: int | None) -> SignalType:
        if kind == "void" and array_len is not None:
            raise DslSyntaxError("void cannot be an array", line=pos.line, col=pos.col)
        return SignalType(kind, array_len)

    def function(self, pragmas: tuple[Pragma, ...]) -> FunctionDef:
        kind, pos = self.type_name()
        name = self.expect_ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pkind, ppos = self.type_name()
                pname = self.expect_ident()
                params.append(Param(pname.text, self.signal_type(pkind, ppos, self.array_suffix()), ppos))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        body = self.block()
        return FunctionDef(name.text, tuple(params), SignalType(kind), body, pragmas, pos)

    # statements

    def block(self) -> Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self.fail(self.peek(), ["'}'"])
            stmts.append(self.statement())
        self.expect("}")
        return Block(tuple(stmts), start.pos)

    def as_block(self, stmt) -> Block:
        return stmt if isinstance(stmt, Block) else Block((stmt,), stmt.pos)

    def statement(self):
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "{":
            return self.block()
        if tok.kind == "kw":
            if tok.text in TYPE_KINDS:
                return self.declaration()
            if tok.text == "if":
                return self.if_stmt()
            if tok.text == "for":
                return self.for_stmt()
            if tok.text == "return":
                self.next()
                value = None if self.at(";") else self.expr()
                self.expect(";")
                return Return(value, tok.pos)
        if tok.kind == "ident":
            nxt = self.peek(1)
            if nxt.kind == "punct" and nxt.text == "(":
                call = self.primary()
                self.expect(";")
                return ExprStmt(call, tok.pos)
            self.next()
            index = None
            if self.at("["):
                self.next()
                index = self.expr()
                self.expect("]")
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return Assign(tok.text, index, value, tok.pos)
        self.fail(tok, ["statement"])

    def declaration(self) -> Decl:
        kind, pos = self.type_name()
        name = self.expect_ident()
        stype = self.signal_type(kind, pos, self.array_suffix())
        init = None
        if self.at("="):
            self.next()
            if self.at("{"):
                self.next()
                items = [self.expr()]
                while self.at(","):
                    self.next()
                    items.append(self.expr())
                self.expect("}")
                init = tuple(items)
            else:
                init = self.expr()
        self.expect(";")
        return Decl(stype, name.text, init, pos)

    def if_stmt(self) -> If:
        tok = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.as_block(self.statement())
        orelse = None
        if self.at("else"):
            self.next()
            orelse = self.as_block(self.statement())
        return If(cond, then, orelse, tok.pos)

    def for_stmt(self) -> For:
        tok = self.expect("for")
        self.expect("(")
        var = self.expect_ident()
        self.expect("=")
        init = self.expr()
        self.expect(";")
        cvar = self.expect_ident()
        rel = self.expect(*REL).text
        bound = self.expr()
        self.expect(";")
        uvar = self.expect_ident()
        op = self.expect("++", "--", "+=", "-=")
        if op.text in ("++", "--"):
            step_op, step = ("+=" if op.text == "++" else "-="), IntLit(1, op.pos)
        else:
            step_op, step = op.text, self.expr()
        self.expect(")")
        body = self.as_block(self.statement())
        for other in (cvar, uvar):
            if other.text != var.text:
                raise DslSyntaxError(f"loop header must use induction variable {var.text!r} throughout",
                                     line=other.pos.line, col=other.pos.col)
        return For(var.text, init, rel, bound, step_op, step, body, tok.pos)

    # expressions

    def expr(self) -> Expr:
        left = self.additive()
        tok = self.peek()
        if tok.kind == "punct" and tok.text in REL:
            self.next()
            right = self.additive()
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.text in REL:
                raise DslSyntaxError("comparisons do not chain", line=nxt.pos.line, col=nxt.pos.col)
            return BinOp(tok.text, left, right, tok.pos)
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.peek().kind == "punct" and self.peek().text in ("+", "-"):
            tok = self.next()
            left = BinOp(tok.text, left, self.multiplicative(), tok.pos)
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.peek().kind == "punct" and self.peek().text in ("*", "/"):
            tok = self.next()
            left = BinOp(tok.text, left, self.unary(), tok.pos)
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            tok = self.next()
            operand = self.unary()
            if isinstance(operand, IntLit):
                return IntLit(-operand.value, tok.pos)
            return Neg(operand, tok.pos)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.text), tok.pos)
        if tok.kind == "ident":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.next()
                        args.append(self.expr())
                self.expect(")")
                return Call(tok.text, tuple(args), tok.pos)
            if self.at("["):
                self.next()
                idx = self.expr()
                self.expect("]")
                return Index(tok.text, idx, tok.pos)
            return VarRef(tok.text, tok.pos)
        if tok.kind == "punct" and tok.text == "(":
            self.next()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(tok, ["expression"])


def parse_functions(source: str) -> list[FunctionDef]:
    """Parse without semantic validation or entry resolution."""
    return _Parser(tokenize(source)).program()


def parse(source: str, entry: str | None = None) -> BehaviorProgram:
    """Parse and validate a ``.cyb`` source into a :class:`BehaviorProgram`.

    The entry function is ``entry`` when given, otherwise a function named
    ``top``, otherwise the single function no other function calls.
    """
    funcs = parse_functions(source)
    return check_program(funcs, entry)
