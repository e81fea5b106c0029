"""Expression trees.

Nodes are immutable and compare structurally. The module-level builders
(:func:`add`, :func:`mul`, ...) fold operations whose operands are all
numeric constants; every tree built by the parser goes through them, so a
canonical tree never contains e.g. ``Div(Num(1), Num(3))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

FUNCTIONS = ("sqrt", "sin", "cos", "exp", "log")


class Expression:
    """Base class of all expression nodes."""

    __slots__ = ()

    # Building with Python operators, used by the constructors in ``models``.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return power(self, k)

    def variables(self) -> frozenset:
        out = set()
        _collect_vars(self, out)
        return frozenset(out)

    def __str__(self):
        from .printer import to_text

        return to_text(self)


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expression):
    value: Fraction


@dataclass(frozen=True)
class Var(Expression):
    name: str


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exp: int


@dataclass(frozen=True)
class Call(Expression):
    fn: str
    arg: Expression


def _collect_vars(e, out):
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        _collect_vars(e.left, out)
        _collect_vars(e.right, out)
    elif isinstance(e, (Neg, Call)):
        _collect_vars(e.arg, out)
    elif isinstance(e, Pow):
        _collect_vars(e.base, out)


def as_expr(x) -> Expression:
    if isinstance(x, Expression):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a numeric constant")
    if isinstance(x, (int, Fraction)):
        return Num(Fraction(x))
    if isinstance(x, float):
        return Num(Fraction(x))
    if isinstance(x, str):
        from .parser import parse

        return parse(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expression")


def num(x) -> Num:
    return Num(Fraction(x))


def var(name: str) -> Var:
    return Var(name)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return Div(a, b)


def power(a, k: int):
    if not isinstance(k, int) or isinstance(k, bool):
        raise TypeError("exponent must be an integer")
    if isinstance(a, Num) and not (a.value == 0 and k < 0):
        return Num(a.value**k)
    return Pow(a, k)


def call(fn: str, a):
    if fn not in FUNCTIONS:
        from ..errors import UnknownFunction

        raise UnknownFunction(f"unknown function {fn!r}")
    return Call(fn, a)


# Identity-aware builders for generated code (derivatives, pullbacks). The
# parser never uses these, so parsed trees keep their exact shape.
ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def _is(e, v):
    return isinstance(e, Num) and e.value == v


def s_add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(b, Neg):
        return s_sub(a, b.arg)
    return add(a, b)


def s_sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return s_neg(b)
    if isinstance(b, Neg):
        return s_add(a, b.arg)
    return sub(a, b)


def s_neg(a):
    if isinstance(a, Neg):
        return a.arg
    return neg(a)


def s_mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return s_neg(b)
    if _is(b, -1):
        return s_neg(a)
    return mul(a, b)


def s_div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return div(a, b)


def s_pow(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    return power(a, k)


def s_sum(terms):
    out = ZERO
    for t in terms:
        out = s_add(out, t)
    return out


def substitute(e: Expression, mapping: Mapping[str, Expression]) -> Expression:
    """Replace variables by expressions (simultaneously)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exp)
    builder = {Add: add, Sub: sub, Mul: mul, Div: div}[type(e)]
    return builder(substitute(e.left, mapping), substitute(e.right, mapping))
