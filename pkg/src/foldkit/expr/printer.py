"""Canonical text form of expression trees (inverse of the parser)."""
from __future__ import annotations

from .nodes import Add, Call, Div, Mul, Neg, Num, Pow, Sub, Var

_ATOM = 5


def _prec(e) -> int:
    if isinstance(e, (Add, Sub)):
        return 1
    if isinstance(e, (Mul, Div)):
        return 2
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return _ATOM


def _num(v) -> str:
    if v.denominator == 1:
        return str(v.numerator) if v >= 0 else f"({v.numerator})"
    return f"({v.numerator}/{v.denominator})"


def _wrap(e, cond: bool) -> str:
    s = to_text(e)
    return f"({s})" if cond else s


def to_text(e) -> str:
    if isinstance(e, Num):
        return _num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_text(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _prec(e.arg) < 3)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _prec(e.base) < _ATOM)}^{e.exp}"
    op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    return _wrap(e.left, _prec(e.left) < p) + op + _wrap(e.right, _prec(e.right) <= p)
