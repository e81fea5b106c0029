"""Recursive-descent parser for the expression grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := base ('^' ['-'] integer)?
    base   := number | ident | func '(' expr ')' | '(' expr ')'

Unary signs and negative integer exponents extend the minimal grammar so that
every tree the printer emits can be read back.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Optional

from ..errors import ExprSyntaxError, UnknownFunction, UnknownVariable
from . import nodes as n

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: Optional[frozenset]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ExprSyntaxError(f"{msg}, found {what}", _byte_offset(self.text, tok[2]))

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] != "op":
            self.fail(f"expected {value!r}")
        return self.take()

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = n.add(e, rhs) if op == "+" else n.sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = n.mul(e, rhs) if op == "*" else n.div(e, rhs)
        return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return n.neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        b = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-" and self.peek()[0] == "op":
                self.take()
                sign = -1
            t = self.peek()
            if t[0] != "number" or not t[1].isdigit():
                self.fail("expected integer exponent")
            self.take()
            return n.power(b, sign * int(t[1]))
        return b

    def base(self):
        tok = self.peek()
        kind, val, _ = tok
        if kind == "number":
            self.take()
            return n.Num(Fraction(val))
        if kind == "ident":
            self.take()
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if val not in n.FUNCTIONS:
                    raise UnknownFunction(f"unknown function {val!r}", offset=_byte_offset(self.text, tok[2]))
                self.take()
                arg = self.expr()
                self.expect(")")
                return n.Call(val, arg)
            if self.variables is not None and val not in self.variables:
                raise UnknownVariable(f"unknown variable {val!r}", offset=_byte_offset(self.text, tok[2]))
            return n.Var(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected number, identifier or '('")


def parse(text: str, variables: Optional[Iterable[str]] = None) -> n.Expression:
    """Parse ``text`` into an expression tree.

    If ``variables`` is given, identifiers outside it raise
    :class:`~foldkit.errors.UnknownVariable`.
    """
    allowed = frozenset(variables) if variables is not None else None
    return _Parser(text, allowed).parse()
