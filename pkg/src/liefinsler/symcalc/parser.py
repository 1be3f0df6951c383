"""Recursive-descent parser for the scalar expression grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := NUMBER | IDENT | '(' expr ')' | FUNC '(' expr ')'

``FUNC`` is one of sqrt, exp, log, sin, cos; ``IDENT`` is ``x1..xm`` or
``y1..yn``.  Unary minus binds looser than ``^`` (``-x1^2`` is ``-(x1^2)``).
Errors carry the byte offset of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .expr import FUNCS, Expr, add, const, div, func, mul, neg, power, var

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class ParseError(ValueError):
    """Malformed expression text; ``offset`` is a byte offset into the input."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte {offset}")


class UnknownIdentifier(ParseError):
    pass


class IndexRange(ParseError):
    pass


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    offset: int


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            toks.append(_Tok("end", "", _byte_offset(text, pos)))
            return toks
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()


_IDENT = re.compile(r"([xy])([0-9]+)$")


class _Parser:
    def __init__(self, text: str, dims: tuple[int, int]):
        self.text = text
        self.m, self.n = dims
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def _error(self, message: str, cls=ParseError) -> ParseError:
        return cls(message, self.tok.offset, self.text)

    def _expect(self, op: str) -> None:
        if self.tok.kind != "op" or self.tok.text != op:
            found = self.tok.text or "end of input"
            raise self._error(f"expected {op!r}, found {found!r}")
        self.k += 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self._error(f"unexpected token {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.k += 1
            rhs = self.term()
            e = add(e, rhs) if op == "+" else add(e, neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op, at = self.tok.text, self.tok.offset
            self.k += 1
            rhs = self.factor()
            if op == "*":
                e = mul(e, rhs)
            else:
                try:
                    e = div(e, rhs)
                except ZeroDivisionError:
                    raise ParseError("division by constant zero", at, self.text) from None
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.k += 1
            return neg(self.factor())
        at = self.tok.offset
        b = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.k += 1
            x = self.factor()
            try:
                return power(b, x)
            except (ZeroDivisionError, ValueError) as exc:
                raise ParseError(str(exc), at, self.text) from None
        return b

    def base(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.k += 1
            return const(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.k += 1
            e = self.expr()
            self._expect(")")
            return e
        if tok.kind == "name":
            if tok.text in FUNCS:
                self.k += 1
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                try:
                    return func(tok.text, arg)
                except ValueError as exc:
                    raise ParseError(str(exc), tok.offset, self.text) from None
            m = _IDENT.match(tok.text)
            if m is None:
                raise self._error(f"unknown identifier {tok.text!r}", UnknownIdentifier)
            space, idx = m.group(1), int(m.group(2))
            bound = self.m if space == "x" else self.n
            if idx < 1 or idx > bound:
                raise self._error(
                    f"index out of range: {tok.text!r} (allowed {space}1..{space}{bound})",
                    IndexRange,
                )
            self.k += 1
            return var(space, idx - 1)
        found = tok.text or "end of input"
        raise self._error(f"unexpected token {found!r}")


def parse_expr(text: str, dims: tuple[int, int]) -> Expr:
    """Parse ``text`` into an expression over ``x1..xm, y1..yn`` with ``dims = (m, n)``."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, dims).parse()
