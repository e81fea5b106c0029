"""Vector-valued expressions, forward-mode derivatives and symbolic ``d/dx``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from .dual import Dual, HyperDual
from .evaluate import compile_expr
from .nodes import (
    ONE,
    ZERO,
    Add,
    Call,
    Div,
    Expression,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    as_expr,
    s_add,
    s_div,
    s_mul,
    s_neg,
    s_pow,
    s_sub,
    s_sum,
)
from .nodes import Call as _Call


def diff(e: Expression, x: str) -> Expression:
    """Symbolic partial derivative of ``e`` with respect to variable ``x``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == x else ZERO
    if x not in e.variables():
        return ZERO
    if isinstance(e, Neg):
        return s_neg(diff(e.arg, x))
    if isinstance(e, Add):
        return s_add(diff(e.left, x), diff(e.right, x))
    if isinstance(e, Sub):
        return s_sub(diff(e.left, x), diff(e.right, x))
    if isinstance(e, Mul):
        return s_add(s_mul(diff(e.left, x), e.right), s_mul(e.left, diff(e.right, x)))
    if isinstance(e, Div):
        du, dv = diff(e.left, x), diff(e.right, x)
        return s_div(s_sub(s_mul(du, e.right), s_mul(e.left, dv)), s_pow(e.right, 2))
    if isinstance(e, Pow):
        return s_mul(s_mul(Num(e.exp), s_pow(e.base, e.exp - 1)), diff(e.base, x))
    if isinstance(e, Call):
        u, du = e.arg, diff(e.arg, x)
        outer = {
            "sqrt": lambda: s_div(ONE, s_mul(Num(2), e)),
            "sin": lambda: _Call("cos", u),
            "cos": lambda: s_neg(_Call("sin", u)),
            "exp": lambda: e,
            "log": lambda: s_div(ONE, u),
        }[e.fn]()
        return s_mul(outer, du)
    raise TypeError(type(e))


@dataclass(frozen=True)
class VectorExpression:
    """A map R^vars -> R^components given by one expression per component."""

    components: tuple
    vars: tuple

    def __init__(self, components: Sequence, vars: Sequence[str]):
        object.__setattr__(self, "components", tuple(as_expr(c) for c in components))
        object.__setattr__(self, "vars", tuple(vars))
        free = set().union(*(c.variables() for c in self.components)) if self.components else set()
        extra = free - set(self.vars)
        if extra:
            from ..errors import UnknownVariable

            raise UnknownVariable(f"variables {sorted(extra)} not among {list(self.vars)}")

    @property
    def shape(self):
        return (len(self.components), len(self.vars))

    def _fns(self):
        return [compile_expr(c, self.vars) for c in self.components]

    def _point(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (len(self.vars),):
            raise DimensionMismatch(f"point has shape {p.shape}, expected ({len(self.vars)},)")
        return p

    def __call__(self, p) -> np.ndarray:
        p = self._point(p)
        xs = [float(v) for v in p]
        return np.array([float(f(xs)) for f in self._fns()])

    def jacobian(self, p) -> np.ndarray:
        return jacobian(self, p)

    def second_derivative(self, p, u, v) -> np.ndarray:
        return second_derivative(self, p, u, v)

    def diff(self, x: str) -> "VectorExpression":
        return VectorExpression([diff(c, x) for c in self.components], self.vars)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _duals(p):
    n = len(p)
    eye = np.eye(n)
    return [Dual(p[j], eye[j]) for j in range(n)]


def jacobian(f: VectorExpression, p) -> np.ndarray:
    """Jacobian matrix (components x vars) of ``f`` at ``p`` by dual numbers."""
    p = f._point(p)
    xs = _duals(p)
    n = len(p)
    rows = []
    for fn in f._fns():
        out = fn(xs)
        rows.append(out.grad if isinstance(out, Dual) else np.zeros(n))
    return np.array(rows).reshape(len(f.components), n)


def value_and_jacobian(f: VectorExpression, p):
    p = f._point(p)
    xs = _duals(p)
    n = len(p)
    vals, rows = [], []
    for fn in f._fns():
        out = fn(xs)
        if isinstance(out, Dual):
            vals.append(out.val)
            rows.append(out.grad)
        else:
            vals.append(float(out))
            rows.append(np.zeros(n))
    return np.array(vals), np.array(rows).reshape(len(f.components), n)


def gradient(e: Expression, variables: Sequence[str], p) -> tuple:
    """Value and gradient of a scalar expression."""
    vals, jac = value_and_jacobian(VectorExpression([e], variables), p)
    return vals[0], jac[0]


def second_derivative(f: VectorExpression, p, u, v) -> np.ndarray:
    """``D^2 f_p(u, v)`` computed with hyper-dual numbers."""
    p = f._point(p)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != p.shape or v.shape != p.shape:
        raise DimensionMismatch("direction vectors must match the point dimension")
    xs = [HyperDual(p[j], u[j], v[j], 0.0) for j in range(len(p))]
    out = []
    for fn in f._fns():
        r = fn(xs)
        out.append(r.d if isinstance(r, HyperDual) else 0.0)
    return np.array(out)


def hessian(e: Expression, variables: Sequence[str], p) -> np.ndarray:
    f = VectorExpression([e], variables)
    n = len(variables)
    eye = np.eye(n)
    h = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            h[i, j] = h[j, i] = second_derivative(f, p, eye[i], eye[j])[0]
    return h


def jacobian_derivatives(f: VectorExpression, p) -> np.ndarray:
    """Array ``T`` with ``T[k, i, j] = d/dx_k (df_i/dx_j)`` at ``p``."""
    p = f._point(p)
    m, n = f.shape
    eye = np.eye(n)
    t = np.empty((n, m, n))
    for k in range(n):
        for j in range(k, n):
            col = second_derivative(f, p, eye[j], eye[k])
            t[k, :, j] = col
            t[j, :, k] = col
    return t


def det_expr(m) -> Expression:
    """Determinant of a square matrix of expressions (Laplace expansion)."""
    n = len(m)
    if n == 0:
        return ONE
    if n == 1:
        return m[0][0]
    terms = []
    for j in range(n):
        if isinstance(m[0][j], Num) and m[0][j].value == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = s_mul(m[0][j], det_expr(minor))
        terms.append(t if j % 2 == 0 else s_neg(t))
    return s_sum(terms)


def pfaffian_expr(m) -> Expression:
    """Pfaffian of an antisymmetric matrix of expressions, expanded along row 0.

    Normalized so that the standard block form ``[[0, 1], [-1, 0]]`` has
    Pfaffian ``1``.
    """
    n = len(m)
    if n == 0:
        return ONE
    terms = []
    for j in range(1, n):
        if isinstance(m[0][j], Num) and m[0][j].value == 0:
            continue
        keep = [k for k in range(n) if k not in (0, j)]
        sub = [[m[a][b] for b in keep] for a in keep]
        t = s_mul(m[0][j], pfaffian_expr(sub))
        terms.append(t if j % 2 == 1 else s_neg(t))
    return s_sum(terms)
