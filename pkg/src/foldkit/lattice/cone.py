"""Primitive vectors, unimodular bases and unimodular cones."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import List, Sequence, Tuple

from ..errors import DimensionMismatch, NotUnimodular, RankDeficient, ZeroVector
from .snf import Matrix, det, rank, smith_normal_form, to_matrix


def is_primitive(v: Sequence[int]) -> bool:
    v = [int(x) for x in v]
    if not any(v):
        raise ZeroVector("the zero vector has no primitivity")
    return reduce(gcd, (abs(x) for x in v)) == 1


def is_unimodular_basis(b: Sequence[Sequence[int]]) -> bool:
    """True iff the rows of ``b`` are a Z-basis of a saturated sublattice,
    i.e. the Smith normal form of ``b`` is ``[I_k | 0]``.

    Raises :class:`RankDeficient` when the rows are dependent over Q.
    """
    b = to_matrix(b)
    if not b:
        return True
    k, n = len(b), len(b[0])
    if k > n:
        raise RankDeficient(f"{k} rows in rank-{n} lattice")
    s = smith_normal_form(b)
    if s.rank < k:
        raise RankDeficient("rows are linearly dependent over Q")
    return all(f == 1 for f in s.invariant_factors)


def extend_to_basis(b: Sequence[Sequence[int]], n: int = None) -> Matrix:
    """Complete the rows of ``b`` to an n x n integer matrix of determinant +-1.

    The added rows span a lattice complement of the one spanned by ``b``.
    """
    b = to_matrix(b)
    if not b:
        if n is None:
            raise DimensionMismatch("ambient rank required for an empty basis")
        return [[int(i == j) for j in range(n)] for i in range(n)]
    n = len(b[0])
    try:
        ok = is_unimodular_basis(b)
    except RankDeficient as exc:
        raise NotUnimodular(str(exc)) from exc
    if not ok:
        raise NotUnimodular(f"Smith normal form of {b} is not [I | 0]")
    # U B V = [I | 0]  =>  B = U^{-1} (first k rows of V^{-1}); the remaining
    # rows of V^{-1} complete it.
    s = smith_normal_form(b)
    k = len(b)
    full = [row[:] for row in b] + [row[:] for row in s.V_inv[k:]]
    assert abs(det(full)) == 1
    return full


def dual_basis(b: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    """Rows ``b*_i`` spanning the row space of ``b`` with ``<b*_i, b_j> = d_ij``."""
    b = to_matrix(b)
    k = len(b)
    if k == 0:
        return []
    gram = [[Fraction(sum(x * y for x, y in zip(b[i], b[j]))) for j in range(k)] for i in range(k)]
    inv = _invert(gram)
    n = len(b[0])
    return [[sum(inv[i][j] * b[j][c] for j in range(k)) for c in range(n)] for i in range(k)]


def _invert(m):
    n = len(m)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def to_fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class UnimodularCone:
    """``{eta : <eta - apex, v_i> >= 0 for all i}`` with the ``v_i`` a Z-basis
    of the integral lattice of a subtorus.

    ``normals`` may be empty; the cone is then the whole space (the chart of
    an interior point).
    """

    normals: Tuple[Tuple[int, ...], ...]
    apex: Tuple[Fraction, ...]
    n: int = field(default=None)

    def __post_init__(self):
        normals = tuple(tuple(int(x) for x in row) for row in self.normals)
        apex = tuple(to_fraction(x) for x in self.apex)
        n = self.n if self.n is not None else len(apex)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "n", n)
        if len(apex) != n or any(len(v) != n for v in normals):
            raise DimensionMismatch("normals and apex must live in the same rank")
        for v in normals:
            if not is_primitive(v):
                raise NotUnimodular(f"normal {v} is not primitive")
        if normals and not is_unimodular_basis(normals):
            raise NotUnimodular(f"normals {normals} are not a Z-basis of a subtorus lattice")

    @property
    def k(self) -> int:
        return len(self.normals)

    def pairings(self, eta) -> List[Fraction]:
        eta = [to_fraction(x) for x in eta]
        if len(eta) != self.n:
            raise DimensionMismatch(f"point of dimension {len(eta)} in rank-{self.n} cone")
        d = [e - a for e, a in zip(eta, self.apex)]
        return [sum(x * y for x, y in zip(d, v)) for v in self.normals]


def cone_contains(cone: UnimodularCone, eta) -> Tuple[bool, Tuple[int, ...]]:
    """Exact membership test.

    Returns ``(member, facets)`` where ``facets`` holds the (0-based) indices
    ``i`` with ``<eta - apex, v_i> = 0``.
    """
    p = cone.pairings(eta)
    return all(x >= 0 for x in p), tuple(i for i, x in enumerate(p) if x == 0)


def lattice_rank(b) -> int:
    return rank(to_matrix(b))
