"""Exact integer linear algebra: Smith normal form with transforms.

Matrices are lists of lists of Python ints, so entries never overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import List, Sequence

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def to_matrix(rows) -> Matrix:
    out = [[int(x) for x in row] for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(cols)] for i in range(len(a))]


def transpose(a: Matrix, ncols: int = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def det(a: Matrix) -> int:
    """Exact determinant (fraction-free Bareiss elimination)."""
    n = len(a)
    if n == 0:
        return 1
    m = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(a: Matrix) -> int:
    """Rank over Q."""
    m = [[Fraction(x) for x in row] for row in a]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return r


@dataclass
class SmithForm:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular.

    ``D`` is diagonal with non-negative entries ``d_1 | d_2 | ... | d_r``;
    ``U_inv`` and ``V_inv`` are the exact inverses.
    """

    D: Matrix
    U: Matrix
    V: Matrix
    U_inv: Matrix
    V_inv: Matrix
    rank: int

    @property
    def invariant_factors(self) -> List[int]:
        return [self.D[i][i] for i in range(self.rank)]


def smith_normal_form(a: Sequence[Sequence[int]]) -> SmithForm:
    a = to_matrix(a)
    m = len(a)
    n = len(a[0]) if m else 0
    d = [row[:] for row in a]
    u, u_inv = identity(m), identity(m)
    v, v_inv = identity(n), identity(n)

    # Row op r_i <- r_i + c*r_j is left multiplication by E; U <- E U and
    # U_inv <- U_inv E^{-1} (a column op on U_inv). Column ops mirror this.
    def row_add(i, j, c):
        if c == 0:
            return
        d[i] = [x + c * y for x, y in zip(d[i], d[j])]
        u[i] = [x + c * y for x, y in zip(u[i], u[j])]
        for row in u_inv:
            row[j] -= c * row[i]

    def row_swap(i, j):
        if i == j:
            return
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]
        for row in u_inv:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        d[i] = [-x for x in d[i]]
        u[i] = [-x for x in u[i]]
        for row in u_inv:
            row[i] = -row[i]

    def col_add(i, j, c):
        # c_i <- c_i + c*c_j
        if c == 0:
            return
        for row in d:
            row[i] += c * row[j]
        for row in v:
            row[i] += c * row[j]
        v_inv[j] = [x - c * y for x, y in zip(v_inv[j], v_inv[i])]

    def col_swap(i, j):
        if i == j:
            return
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        v_inv[i], v_inv[j] = v_inv[j], v_inv[i]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        row_swap(t, best[0])
        col_swap(t, best[1])
        while True:
            done = True
            for i in range(t + 1, m):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    row_add(i, t, -q)
                    if d[i][t] != 0:
                        row_swap(i, t)
                        done = False
            for j in range(t + 1, n):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    col_add(j, t, -q)
                    if d[t][j] != 0:
                        col_swap(j, t)
                        done = False
            if not done:
                continue
            # divisibility: the pivot must divide the whole trailing block
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % d[t][t] != 0),
                None,
            )
            if bad is None:
                break
            row_add(t, bad[0], 1)
        if d[t][t] < 0:
            row_neg(t)
        t += 1
    return SmithForm(d, u, v, u_inv, v_inv, t)


def gcd_of_maximal_minors(b: Sequence[Sequence[int]]) -> int:
    """gcd of all k x k minors of a k x n matrix (0 when rank < k)."""
    b = to_matrix(b)
    k = len(b)
    n = len(b[0]) if k else 0
    g = 0
    for cols in combinations(range(n), k):
        g = gcd(g, det([[row[c] for c in cols] for row in b]))
    return abs(g)


def kernel_basis(a: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Z-basis of {x in Z^ncols : a x = 0}, as columns of the returned matrix."""
    if not a:
        return identity(ncols)
    s = smith_normal_form(a)
    return [row[s.rank:] for row in s.V]
