"""Recursive-descent parser for the scalar field language.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | 'i' | 'x1'..'x4' | func '(' expr ')' | '(' expr ')' | '-' base
    func   := sin | cos | exp | ln | sqrt

Whitespace is insignificant.  The exponent may carry a sign (``x1^-2``).
"""
from __future__ import annotations

import re

from . import expr as E
from .expr import Expr, FieldLangError

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_VARIABLES = {"x1": 0, "x2": 1, "x3": 2, "x4": 3}


class ParseError(FieldLangError):
    """Syntax or name error; ``offset`` is the byte offset into the source."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        self.text = text
        super().__init__(f"{message} at offset {self.offset}")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, self.text, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            found = tok[1] or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}", tok)
        return tok

    def parse(self) -> Expr:
        result = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}")
        return result

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.term()
            left = E.add(left, right) if op == "+" else E.sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            right = self.factor()
            left = E.mul(left, right) if op == "*" else E.div(left, right)
        return left

    def factor(self) -> Expr:
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] in ("+", "-"):
                sign = -1 if self.take()[1] == "-" else 1
            tok = self.take()
            if tok[0] != "number" or not tok[1].isdigit():
                raise self.error("exponent must be an integer", tok)
            return E.power(base, sign * int(tok[1]))
        return base

    def base(self) -> Expr:
        tok = self.take()
        kind, value, _ = tok
        if kind == "number":
            return E.const(float(value))
        if value == "-":
            return E.neg(self.base())
        if value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "name":
            if value == "i":
                return E.I
            if value in _VARIABLES:
                return E.Var(_VARIABLES[value])
            if value in E.FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise self.error(f"arity mismatch: {value} takes exactly one argument")
                self.expect(")")
                return E.func(value, arg)
            raise self.error(f"unknown identifier {value!r}", tok)
        found = value or "end of input"
        raise self.error(f"unexpected {found!r}", tok)


def parse_scalar_expr(text: str) -> Expr:
    """Parse ``text`` into a canonical expression tree.

    >>> str(parse_scalar_expr("x1^2 + sin(x4)"))
    'x1^2 + sin(x4)'
    """
    if not isinstance(text, str):
        raise TypeError("expression source must be a string")
    return _Parser(text).parse()
