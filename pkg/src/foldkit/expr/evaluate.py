"""Evaluation of expression trees.

Trees are compiled once to a Python closure; the closure is generic over the
number type (float, :class:`Fraction`, :class:`Dual`, :class:`HyperDual`).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from ..errors import DomainError, UnknownVariable
from .dual import FUNCTION_IMPLS
from .nodes import Add, Call, Div, Mul, Neg, Num, Pow, Sub, Var


class NotExact(Exception):
    """Raised when exact evaluation meets a transcendental function."""


def _exact_fn(name):
    def apply(x):
        if name == "sqrt" and isinstance(x, Fraction) and x >= 0:
            p, q = x.numerator, x.denominator
            rp, rq = _isqrt_exact(p), _isqrt_exact(q)
            if rp is not None and rq is not None:
                return Fraction(rp, rq)
        raise NotExact(name)

    return apply


def _isqrt_exact(k):
    import math

    r = math.isqrt(k)
    return r if r * r == k else None


_EXACT_IMPLS = {name: _exact_fn(name) for name in FUNCTION_IMPLS}


def _emit(e, names, consts, exact):
    if isinstance(e, Num):
        consts.append(e.value if exact else float(e.value))
        return f"_c[{len(consts) - 1}]"
    if isinstance(e, Var):
        if e.name not in names:
            raise UnknownVariable(f"variable {e.name!r} not bound")
        return f"_x[{names[e.name]}]"
    if isinstance(e, Neg):
        return f"(-{_emit(e.arg, names, consts, exact)})"
    if isinstance(e, Call):
        return f"_f_{e.fn}({_emit(e.arg, names, consts, exact)})"
    if isinstance(e, Pow):
        return f"_pow({_emit(e.base, names, consts, exact)}, {e.exp})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    return f"({_emit(e.left, names, consts, exact)} {op} {_emit(e.right, names, consts, exact)})"


def _pow(x, k):
    return x**k


@lru_cache(maxsize=4096)
def compile_expr(e, variables: tuple, exact: bool = False):
    names = {v: i for i, v in enumerate(variables)}
    consts: list = []
    body = _emit(e, names, consts, exact)
    impls = _EXACT_IMPLS if exact else FUNCTION_IMPLS
    ns = {f"_f_{k}": v for k, v in impls.items()}
    ns["_c"] = consts
    ns["_pow"] = _pow
    code = compile(f"lambda _x: {body}", "<expr>", "eval")
    fn = eval(code, ns)

    def run(xs):
        try:
            return fn(xs)
        except ZeroDivisionError as exc:
            raise DomainError("division by zero") from exc
        except OverflowError as exc:
            raise DomainError("overflow") from exc
        except ValueError as exc:
            raise DomainError(str(exc)) from exc

    return run


def evaluate(e, env: Mapping[str, object]):
    """Evaluate ``e`` with variables bound by ``env`` (double precision)."""
    variables = tuple(sorted(e.variables()))
    missing = [v for v in variables if v not in env]
    if missing:
        raise UnknownVariable(f"unbound variables {missing}")
    return compile_expr(e, variables)([env[v] for v in variables])


def evaluate_at(e, variables: Sequence[str], point):
    """Evaluate ``e`` at ``point`` given in the order of ``variables``."""
    return compile_expr(e, tuple(variables))(point)


def evaluate_exact(e, variables: Sequence[str], point):
    """Exact rational evaluation; raises :class:`NotExact` for sin/cos/exp/log
    and for square roots of non-squares."""
    pt = [Fraction(x) for x in point]
    return compile_expr(e, tuple(variables), True)(pt)
