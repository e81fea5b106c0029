"""Forward-mode automatic differentiation.

:class:`Dual` carries a value and a gradient vector (one pass gives a full
Jacobian row). :class:`HyperDual` carries ``a + b e1 + c e2 + d e1 e2`` with
``e1**2 = e2**2 = 0``; seeding ``e1`` with ``u`` and ``e2`` with ``v`` makes
``d`` the bilinear second derivative in directions ``u, v``.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError


def _check_sqrt(a):
    if a < 0:
        raise DomainError(f"sqrt of negative number {a!r}")


def _check_log(a):
    if a <= 0:
        raise DomainError(f"log of non-positive number {a!r}")


class Dual:
    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad):
        self.val = float(val)
        self.grad = grad

    @staticmethod
    def _lift(x, like):
        if isinstance(x, Dual):
            return x
        return Dual(x, np.zeros_like(like.grad))

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val + o.val, self.grad + o.grad)
        return Dual(self.val + o, self.grad)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val - o.val, self.grad - o.grad)
        return Dual(self.val - o, self.grad)

    def __rsub__(self, o):
        return Dual(o - self.val, -self.grad)

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val * o.val, self.val * o.grad + o.val * self.grad)
        return Dual(self.val * o, self.grad * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            if o.val == 0:
                raise DomainError("division by zero")
            q = self.val / o.val
            return Dual(q, (self.grad - q * o.grad) / o.val)
        if o == 0:
            raise DomainError("division by zero")
        return Dual(self.val / o, self.grad / o)

    def __rtruediv__(self, o):
        if self.val == 0:
            raise DomainError("division by zero")
        q = o / self.val
        return Dual(q, -q / self.val * self.grad)

    def __pow__(self, k: int):
        if k == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        if self.val == 0 and k < 0:
            raise DomainError("negative power of zero")
        return Dual(self.val**k, k * self.val ** (k - 1) * self.grad)

    def _chain(self, f, df):
        return Dual(f, df * self.grad)

    def sqrt(self):
        _check_sqrt(self.val)
        r = math.sqrt(self.val)
        if r == 0:
            if np.any(self.grad != 0):
                raise DomainError("sqrt is not differentiable at 0")
            return Dual(0.0, self.grad.copy())
        return self._chain(r, 0.5 / r)

    def sin(self):
        return self._chain(math.sin(self.val), math.cos(self.val))

    def cos(self):
        return self._chain(math.cos(self.val), -math.sin(self.val))

    def exp(self):
        e = math.exp(self.val)
        return self._chain(e, e)

    def log(self):
        _check_log(self.val)
        return self._chain(math.log(self.val), 1.0 / self.val)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"


class HyperDual:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b=0.0, c=0.0, d=0.0):
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)
        self.d = float(d)

    def __add__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
        return HyperDual(self.a + o, self.b, self.c, self.d)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
        return HyperDual(self.a - o, self.b, self.c, self.d)

    def __rsub__(self, o):
        return HyperDual(o - self.a, -self.b, -self.c, -self.d)

    def __neg__(self):
        return HyperDual(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(
                self.a * o.a,
                self.a * o.b + self.b * o.a,
                self.a * o.c + self.c * o.a,
                self.a * o.d + self.b * o.c + self.c * o.b + self.d * o.a,
            )
        return HyperDual(self.a * o, self.b * o, self.c * o, self.d * o)

    __rmul__ = __mul__

    def _inv(self):
        if self.a == 0:
            raise DomainError("division by zero")
        return self._apply(1.0 / self.a, -1.0 / self.a**2, 2.0 / self.a**3)

    def __truediv__(self, o):
        if isinstance(o, HyperDual):
            return self * o._inv()
        if o == 0:
            raise DomainError("division by zero")
        return HyperDual(self.a / o, self.b / o, self.c / o, self.d / o)

    def __rtruediv__(self, o):
        return self._inv() * o

    def __pow__(self, k: int):
        if k == 0:
            return HyperDual(1.0)
        if self.a == 0 and k < 0:
            raise DomainError("negative power of zero")
        a = self.a
        f = a**k
        df = k * a ** (k - 1) if k != 0 else 0.0
        d2f = k * (k - 1) * a ** (k - 2) if k not in (0, 1) else 0.0
        return self._apply(f, df, d2f)

    def _apply(self, f, df, d2f):
        return HyperDual(f, df * self.b, df * self.c, df * self.d + d2f * self.b * self.c)

    def sqrt(self):
        _check_sqrt(self.a)
        r = math.sqrt(self.a)
        if r == 0:
            if self.b or self.c or self.d:
                raise DomainError("sqrt is not differentiable at 0")
            return HyperDual(0.0)
        return self._apply(r, 0.5 / r, -0.25 / (r * self.a))

    def sin(self):
        s, c = math.sin(self.a), math.cos(self.a)
        return self._apply(s, c, -s)

    def cos(self):
        s, c = math.sin(self.a), math.cos(self.a)
        return self._apply(c, -s, -c)

    def exp(self):
        e = math.exp(self.a)
        return self._apply(e, e, e)

    def log(self):
        _check_log(self.a)
        return self._apply(math.log(self.a), 1.0 / self.a, -1.0 / self.a**2)

    def __repr__(self):
        return f"HyperDual({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


def _float_fn(name):
    fn = getattr(math, name)
    check = {"sqrt": _check_sqrt, "log": _check_log}.get(name)

    def apply(x):
        if hasattr(x, name):
            return getattr(x, name)()
        x = float(x)
        if check:
            check(x)
        return fn(x)

    apply.__name__ = name
    return apply


FUNCTION_IMPLS = {name: _float_fn(name) for name in ("sqrt", "sin", "cos", "exp", "log")}
