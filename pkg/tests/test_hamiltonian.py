import numpy as np
import pytest

from foldkit.errors import DimensionMismatch
from foldkit.form import FormField
from foldkit.hamiltonian import (
    CONTAINED,
    FOLDED,
    NOT_FREE,
    NOT_REGULAR,
    SYMPLECTIC,
    TRANSVERSE,
    MomentMap,
    TorusAction,
    classify_zero_level,
    lie_derivative_matrix,
    verify_hamiltonian,
    weighted_moment,
)
from foldkit.lattice import cone_contains, UnimodularCone
from foldkit.sampling import Domain

V4 = ("x1", "x2", "x3", "x4")
ROT = TorusAction.from_exprs([["0", "0", "-x4", "x3"]], V4)
PTS = np.random.default_rng(1).uniform(-1, 1, (20, 4))


def test_rotation_moment_passes():
    s = FormField({"2,3": "1"}, V4)
    rep = verify_hamiltonian(s, ROT, MomentMap.from_exprs(["(x3^2+x4^2)/2"], V4), PTS)
    assert rep.passed and rep.contraction_residual < 1e-12


def test_wrong_moment_fails():
    s = FormField({"2,3": "1"}, V4)
    rep = verify_hamiltonian(s, ROT, MomentMap.from_exprs(["x3"], V4), PTS)
    assert not rep.passed
    assert rep.contraction_residual >= np.max(np.abs(PTS[:, 3])) - 1e-12


def test_zero_action_constant_moment():
    s = FormField({"2,3": "1"}, V4)
    zero = TorusAction.from_exprs([["0", "0", "0", "0"]], V4)
    assert verify_hamiltonian(s, zero, MomentMap.from_exprs(["5"], V4), PTS).passed


def test_dimension_checks():
    s = FormField({"2,3": "1"}, V4)
    with pytest.raises(DimensionMismatch):
        verify_hamiltonian(s, ROT, MomentMap.from_exprs(["x1", "x2"], V4), PTS)


def test_lie_derivative_of_invariant_form_vanishes():
    s = FormField({"0,1": "x1", "2,3": "1"}, V4)
    for p in PTS[:5]:
        assert np.max(np.abs(lie_derivative_matrix(s, ROT.generators[0], p))) < 1e-14


def test_weighted_moment_examples():
    np.testing.assert_allclose(weighted_moment([[1, 0], [0, 1]], [1, 2j]), [1, 4])
    np.testing.assert_allclose(weighted_moment([[1, 0], [0, 1]], [0, 0]), [0, 0])
    np.testing.assert_allclose(weighted_moment([[1, 1]], [2**0.5]), [2, 2])
    with pytest.raises(DimensionMismatch):
        weighted_moment([[1, 0]], [1, 1])


def test_weighted_moment_lands_in_weight_cone():
    cone = UnimodularCone([(1, 0), (0, 1)], [0, 0])
    rng = np.random.default_rng(4)
    for z in rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2)):
        assert cone_contains(cone, weighted_moment([[1, 0], [0, 1]], z).tolist())[0]


def test_rotation_level_crosses_fold():
    s = FormField({"0,1": "x1", "2,3": "1"}, V4)
    mu = MomentMap.from_exprs(["(x3^2+x4^2)/2-1"], V4)
    rep = classify_zero_level(
        s, ROT, mu, [[0.3, 0, 1, 1], [-0.4, 0.2, 1.2, 0.5]], domain=Domain(V4, [(-1, 1), (-1, 1), (-2, 2), (-2, 2)])
    )
    assert (rep.verdict, rep.reduced_form) == (TRANSVERSE, FOLDED)


def test_sphere_equator_level_is_the_fold():
    vs = ("y", "z")
    x = "sqrt(1-y^2-z^2)"
    s = FormField({"0,1": f"z/{x}"}, vs)
    action = TorusAction.from_exprs([[f"-{x}", "0"]], vs)
    mu = MomentMap.from_exprs([f"-(({x})^2+y^2)/2+1/2"], vs)
    assert verify_hamiltonian(s, action, mu, [[0.1, 0.2], [0.3, -0.4]]).passed
    rep = classify_zero_level(s, action, mu, [[0.1, 0.0], [-0.3, 0.01]], domain=Domain(vs, [(-0.7, 0.7)] * 2))
    assert (rep.verdict, rep.reduced_form) == (CONTAINED, SYMPLECTIC)


def test_singular_level_is_not_regular():
    vc = ("r", "th", "x", "y")
    s = FormField({"3,1": "r-1", "0,1": "y", "2,3": "1", "2,0": "1"}, vc)
    rep = classify_zero_level(
        s, TorusAction.from_exprs([["0", "1", "0", "0"]], vc), MomentMap.from_exprs(["y*(r-1)"], vc), [[1, 0, 0, 0]]
    )
    assert rep.verdict == NOT_REGULAR


def test_fixed_points_are_not_free():
    s = FormField({"0,1": "1", "2,3": "1"}, V4)
    mu = MomentMap.from_exprs(["(x3^2+x4^2)/2"], V4)
    rep = classify_zero_level(s, ROT, mu, [[0.1, 0.2, 0.0, 0.0]])
    assert rep.verdict in (NOT_FREE, NOT_REGULAR)
