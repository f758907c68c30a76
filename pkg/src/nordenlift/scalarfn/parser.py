"""Recursive-descent parser for coefficient expressions in ``t``.

Grammar (``^`` is right associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 't' | NAME '(' expr (',' expr)* ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from typing import List, NamedTuple

from ..errors import ParseError
from .core import Constant, Expression, ScalarFn, T, Unary

_FUNCTIONS = {"sqrt": 1, "exp": 1, "log": 1}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


class Token(NamedTuple):
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def tokenize(src: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            pos = len(src)
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", len(src[:bad].encode("utf-8")))
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(src.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def offset(self, tok: Token) -> int:
        # byte offset, not character offset
        return len(self.src[: tok.offset].encode("utf-8")) if tok.kind != "end" else tok.offset

    def expect(self, text: str) -> Token:
        tok = self.tok
        if tok.kind != "op" or tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {found}", self.offset(tok))
        return self.advance()

    def parse(self) -> ScalarFn:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.offset(self.tok))
        return node

    def expr(self) -> ScalarFn:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self) -> ScalarFn:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            node = node * rhs if op == "*" else node / rhs
        return node

    def unary(self) -> ScalarFn:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            operand = self.unary()
            if op == "+":
                return operand
            if isinstance(operand, Constant):
                return Constant(-operand.value)
            return -operand
        return self.power()

    def power(self) -> ScalarFn:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return base ** self.unary()
        return base

    def atom(self) -> ScalarFn:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Constant(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == "t":
                return T
            if tok.text not in _FUNCTIONS:
                raise ParseError(f"unknown identifier {tok.text!r}", self.offset(tok))
            self.expect("(")
            args = [self.expr()]
            while self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            if len(args) != _FUNCTIONS[tok.text]:
                raise ParseError(
                    f"{tok.text} takes {_FUNCTIONS[tok.text]} argument(s), got {len(args)}",
                    self.offset(tok),
                )
            return Unary(tok.text, args[0])
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(f"unexpected {found}", self.offset(tok))


def parse_expr(src: str, t_max: float = math.inf) -> Expression:
    """Parse ``src`` into an evaluable :class:`Expression`.

    >>> parse_expr("sqrt(1+2*t)").jet(1.5)
    Jet(2, 0.5)
    """
    return Expression(src, _Parser(src).parse(), t_max=t_max)
