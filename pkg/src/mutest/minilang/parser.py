"""Lexer and recursive-descent parser for MiniLang."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    PRECEDENCE,
    Assign,
    Binary,
    Block,
    BoolLit,
    Break,
    Call,
    Continue,
    Expr,
    ExprStmt,
    FunctionDef,
    If,
    IntLit,
    Let,
    Paren,
    Return,
    Span,
    Stmt,
    StrLit,
    SubjectModule,
    Unary,
    Var,
    While,
)

KEYWORDS = {"fn", "let", "if", "else", "while", "return", "break", "continue", "true", "false"}
INT64_MAX = 2**63 - 1

# Longest match first.
PUNCT = ("<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "%", "<", ">", "!", "=",
         "(", ")", "{", "}", ",", ";")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class ParseError(Exception):
    """Syntax error with a 1-based position and the set of expected tokens."""

    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset(),
                 path: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class StructureError(ParseError):
    """Well-formed syntax that violates a structural rule."""


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "str", "ident", "kw", "op", "eof"
    text: str
    start: int
    end: int
    line: int
    col: int
    end_line: int
    end_col: int


def tokenize(text: str, path: str = "") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(upto: int) -> tuple[int, int]:
        nonlocal line, col
        for ch in text[i:upto]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        return line, col

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(i + 1)
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            advance(j)
            i = j
            continue
        start, sline, scol = i, line, col
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            kind = "int"
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            kind = "kw" if text[i:j] in KEYWORDS else "ident"
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string literal", sline, scol, path=path)
                if text[j] == "\\":
                    if j + 1 >= n or text[j + 1] not in _ESCAPES:
                        raise ParseError("invalid escape in string literal", sline, scol, path=path)
                    j += 1
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", sline, scol, path=path)
            j += 1
            kind = "str"
        else:
            for p in PUNCT:
                if text.startswith(p, i):
                    j = i + len(p)
                    kind = "op"
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", sline, scol, path=path)
        eline, ecol = advance(j)
        tokens.append(Token(kind, text[start:j], start, j, sline, scol, eline, ecol))
        i = j
    tokens.append(Token("eof", "", n, n, line, col, line, col))
    return tokens


def _decode_string(raw: str) -> str:
    out = []
    i = 1
    while i < len(raw) - 1:
        ch = raw[i]
        if ch == "\\":
            out.append(_ESCAPES[raw[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str, path: str, allow_loop_control: bool = False):
        self.text = text
        self.path = path
        self.tokens = tokenize(text, path)
        self.pos = 0
        self.loop_depth = 1 if allow_loop_control else 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, expected: set[str] | frozenset[str]) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        exp = ", ".join(sorted(expected))
        return ParseError(f"unexpected {found}, expected one of: {exp}", t.line, t.col,
                          frozenset(expected), self.path)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error({text})
        return self.next()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error({"identifier"})
        return self.next()

    def span(self, first: Token, last: Token) -> Span:
        return Span(first.line, first.col, last.end_line, last.end_col, first.start, last.end)

    def node_span(self, first: Span, last: Span) -> Span:
        return Span(first.start_line, first.start_col, last.end_line, last.end_col, first.start, last.end)

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    # -- grammar ------------------------------------------------------------

    def module(self) -> SubjectModule:
        functions: list[FunctionDef] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if not self.at("fn"):
                raise self.error({"fn"})
            first = self.tok
            fn = self.function()
            if fn.name in seen:
                raise StructureError(f"duplicate function name {fn.name!r}", first.line, first.col,
                                     path=self.path)
            seen.add(fn.name)
            functions.append(fn)
        eof = self.tok
        span = Span(1, 1, eof.line, eof.col, 0, len(self.text))
        return SubjectModule(tuple(functions), source_text=self.text, path=self.path, span=span)

    def function(self) -> FunctionDef:
        first = self.expect("fn")
        name = self.expect_ident().text
        self.expect("(")
        params: list[str] = []
        if not self.at(")"):
            while True:
                if self.tok.kind != "ident":
                    raise self.error({"identifier", ")"} if not params else {"identifier"})
                ptok = self.next()
                if ptok.text in params:
                    raise StructureError(f"duplicate parameter {ptok.text!r}", ptok.line, ptok.col,
                                         path=self.path)
                params.append(ptok.text)
                if self.at(","):
                    self.next()
                    continue
                if not self.at(")"):
                    raise self.error({",", ")"})
                break
        self.expect(")")
        body = self.block()
        return FunctionDef(name, tuple(params), body, self.span(first, self.prev))

    def block(self) -> Block:
        first = self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error({"}"})
            stmts.append(self.statement())
        self.next()
        return Block(tuple(stmts), self.span(first, self.prev))

    def statement(self) -> Stmt:
        first = self.tok
        if self.at("let"):
            self.next()
            name = self.expect_ident().text
            self.expect("=")
            value = self.expression()
            self.expect(";")
            return Let(name, value, self.span(first, self.prev))
        if self.at("if"):
            return self.if_statement()
        if self.at("while"):
            self.next()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.loop_depth += 1
            try:
                body = self.block()
            finally:
                self.loop_depth -= 1
            return While(cond, body, self.span(first, self.prev))
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return Return(value, self.span(first, self.prev))
        if self.at("break") or self.at("continue"):
            kw = self.next()
            if self.loop_depth == 0:
                raise StructureError(f"{kw.text!r} outside of a loop", kw.line, kw.col, path=self.path)
            self.expect(";")
            cls = Break if kw.text == "break" else Continue
            return cls(self.span(first, self.prev))
        nxt = self.tokens[self.pos + 1]
        if first.kind == "ident" and nxt.kind == "op" and nxt.text == "=":
            self.next()
            self.next()
            value = self.expression()
            self.expect(";")
            return Assign(first.text, value, self.span(first, self.prev))
        expr = self.expression()
        self.expect(";")
        return ExprStmt(expr, self.span(first, self.prev))

    def if_statement(self) -> If:
        first = self.expect("if")
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        then = self.block()
        orelse: Block | If | None = None
        if self.at("else"):
            self.next()
            orelse = self.if_statement() if self.at("if") else self.block()
        return If(cond, then, orelse, self.span(first, self.prev))

    def expression(self, min_prec: int = 1) -> Expr:
        left = self.unary()
        while True:
            t = self.tok
            prec = PRECEDENCE.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.next()
            right = self.expression(prec + 1)
            left = Binary(t.text, left, right, self.node_span(left.span, right.span))

    def unary(self) -> Expr:
        if self.at("-") or self.at("!"):
            first = self.next()
            operand = self.unary()
            return Unary(first.text, operand, Span(first.line, first.col, operand.span.end_line,
                                                   operand.span.end_col, first.start, operand.span.end))
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.next()
            value = int(t.text)
            if value > INT64_MAX:
                raise ParseError("integer literal out of range", t.line, t.col, path=self.path)
            return IntLit(value, self.span(t, t))
        if t.kind == "str":
            self.next()
            return StrLit(_decode_string(t.text), self.span(t, t))
        if self.at("true") or self.at("false"):
            self.next()
            return BoolLit(t.text == "true", self.span(t, t))
        if t.kind == "ident":
            self.next()
            if self.at("("):
                self.next()
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.expression())
                    while self.at(","):
                        self.next()
                        args.append(self.expression())
                self.expect(")")
                return Call(t.text, tuple(args), self.span(t, self.prev))
            return Var(t.text, self.span(t, t))
        if self.at("("):
            self.next()
            inner = self.expression()
            self.expect(")")
            return Paren(inner, self.span(t, self.prev))
        raise self.error({"expression"})

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error({"end of input"})


def parse_source(text: str, path: str = "") -> SubjectModule:
    """Parse a whole ``.mini`` file into a :class:`SubjectModule`."""
    return _Parser(text, path).module()


def parse_expression(text: str) -> Expr:
    p = _Parser(text, "")
    expr = p.expression()
    p.finish()
    return expr


def parse_statement(text: str, in_loop: bool = True) -> Stmt:
    p = _Parser(text, "", allow_loop_control=in_loop)
    stmt = p.statement()
    p.finish()
    return stmt


def parse_function(text: str) -> FunctionDef:
    p = _Parser(text, "")
    fn = p.function()
    p.finish()
    return fn


def try_parse(text: str, path: str = "") -> Optional[SubjectModule]:
    try:
        return parse_source(text, path)
    except ParseError:
        return None
