import itertools
from fractions import Fraction
from math import gcd

import numpy as np
import pytest

from foldkit.errors import DimensionMismatch, NotUnimodular, RankDeficient, ZeroVector
from foldkit.lattice import (
    UnimodularCone,
    cone_contains,
    det,
    dual_basis,
    extend_to_basis,
    gcd_of_maximal_minors,
    is_primitive,
    is_unimodular_basis,
    kernel_basis,
    smith_normal_form,
)
from foldkit.lattice.snf import matmul


def minors_oracle(rows):
    """gcd of maximal minors by brute-force cofactor expansion."""
    k, n = len(rows), len(rows[0])

    def d(m):
        if len(m) == 1:
            return m[0][0]
        return sum((-1) ** j * m[0][j] * d([r[:j] + r[j + 1:] for r in m[1:]]) for j in range(len(m)))

    g = 0
    for cols in itertools.combinations(range(n), k):
        g = gcd(g, d([[r[c] for c in cols] for r in rows]))
    return g


def test_primitive_vectors():
    assert is_primitive((1, 2))
    assert not is_primitive((2, 4))
    assert is_primitive((0, 0, -1))
    with pytest.raises(ZeroVector):
        is_primitive((0, 0))


def test_unimodular_examples():
    assert is_unimodular_basis([(1, 0, 0), (0, 1, 0)])
    assert not is_unimodular_basis([(2, 0), (0, 1)])
    assert is_unimodular_basis([(1, 1), (1, 2)])
    with pytest.raises(RankDeficient):
        is_unimodular_basis([(1, 2), (2, 4)])


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_unimodularity_matches_minor_oracle_exhaustively(shape):
    k, n = shape
    for entries in itertools.product(range(-3, 4), repeat=k * n):
        rows = [list(entries[i * n:(i + 1) * n]) for i in range(k)]
        g = minors_oracle(rows)
        if g == 0:
            with pytest.raises((RankDeficient, ZeroVector)):
                is_unimodular_basis(rows)
        else:
            assert is_unimodular_basis(rows) == (g == 1), rows


def test_extend_to_basis_examples():
    assert extend_to_basis([(1, 0)]) == [[1, 0], [0, 1]]
    full = extend_to_basis([(1, 1)])
    assert full[0] == [1, 1] and abs(det(full)) == 1
    with pytest.raises(NotUnimodular):
        extend_to_basis([(2, 0)])


def test_extensions_are_unimodular_on_random_bases():
    rng = np.random.default_rng(5)
    done = 0
    while done < 200:
        k, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        if k > n:
            continue
        rows = rng.integers(-5, 6, (k, n)).tolist()
        if minors_oracle(rows) != 1:
            continue
        full = extend_to_basis(rows, n)
        assert full[:k] == rows
        assert abs(det(full)) == 1
        done += 1


def test_smith_normal_form_factorization():
    a = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    s = smith_normal_form(a)
    assert s.invariant_factors == [2, 6, 12]
    assert matmul(matmul(s.U, a), s.V) == s.D


def test_gcd_of_maximal_minors_and_kernel():
    assert gcd_of_maximal_minors([[2, 0], [0, 1]]) == 2
    assert gcd_of_maximal_minors([[1, 1], [1, 2]]) == 1
    ker = kernel_basis([[1, 2, 3]], 3)
    assert len(ker) == 3 and len(ker[0]) == 2
    for j in range(2):
        assert ker[0][j] + 2 * ker[1][j] + 3 * ker[2][j] == 0


def test_dual_basis_pairs_to_identity():
    rows = [[1, 1, 0], [0, 1, 1]]
    duals = dual_basis(rows)
    for i, r in enumerate(rows):
        for j, w in enumerate(duals):
            assert sum(Fraction(a) * b for a, b in zip(r, w)) == (1 if i == j else 0)


def test_cone_contains_examples():
    c = UnimodularCone([(1, 0), (0, 1)], ["0", "0"])
    assert cone_contains(c, [0, 3]) == (True, (0,))
    assert cone_contains(c, [0, 0]) == (True, (0, 1))
    assert cone_contains(c, [-1, 1])[0] is False
    assert cone_contains(c, ["1/3", "2/3"]) == (True, ())
    with pytest.raises(DimensionMismatch):
        cone_contains(c, [1, 2, 3])


def test_cone_rejects_bad_normals():
    with pytest.raises(NotUnimodular):
        UnimodularCone([(2, 0)], [0, 0])
    with pytest.raises(NotUnimodular):
        UnimodularCone([(1, 1), (1, -1)], [0, 0])
