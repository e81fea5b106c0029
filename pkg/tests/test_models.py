import numpy as np
import pytest

from foldkit.errors import (
    AnnihilatorNotRank1,
    DimensionMismatch,
    InputError,
    NonPositivePairing,
    NotOnLevelSet,
    OutsideCone,
)
from foldkit.expr import evaluate_at
from foldkit.form import FormField, pfaffian, verify_folded
from foldkit.hamiltonian import verify_hamiltonian
from foldkit.lattice import UnimodularCone, cone_contains
from foldkit.models import (
    BundleChart,
    CutChart,
    LevelPoint,
    canonical_form,
    canonical_kernel,
    coupling_hamiltonian,
    cut_moment,
    cut_section_and_alpha,
    cut_transition,
    folded_cotangent_form,
    minimal_coupling,
)
from foldkit.sampling import Domain

FOLD = BundleChart(["x", "t"], ["th1", "th2"], ["x", "t^2"])
TWISTED = BundleChart(["x", "t"], ["th1", "th2"], ["x", "t^2"], A=[["0", "x", "1", "0"], ["0", "0", "0", "1"]])
RNG = np.random.default_rng(0)


def box(vars):
    return Domain(tuple(vars), [(-1, 1)] * len(vars))


def test_canonical_form_of_model_fold():
    s = canonical_form(FOLD)
    p = [0.3, -0.4, 1.0, 2.0]
    expected = np.zeros((4, 4))
    expected[0, 2], expected[1, 3] = 1, 2 * p[1]
    np.testing.assert_allclose(s.matrix(p), expected - expected.T)
    data = verify_folded(s, box(s.vars))
    assert data.folded
    assert all(abs(q[1]) < 1e-8 for q in data.fold_points)


def test_canonical_form_of_embedding_is_symplectic():
    s = canonical_form(BundleChart(["x", "y"], ["a", "b"], ["x", "y"]))
    assert not verify_folded(s, box(s.vars)).folded


def test_basic_term_keeps_fold():
    beta = FormField({"0,1": "1"}, ["x", "t"])
    s0, s1 = canonical_form(FOLD), canonical_form(FOLD, beta)
    for p in RNG.uniform(-1, 1, (20, 4)):
        assert pfaffian(s0, p) == pytest.approx(pfaffian(s1, p), abs=1e-12)


def test_canonical_forms_are_hamiltonian():
    for B in (FOLD, TWISTED):
        rep = verify_hamiltonian(canonical_form(B), B.action(), B.moment(), RNG.uniform(-1, 1, (20, 4)))
        assert rep.passed and rep.contraction_residual < 1e-12


def test_connection_check():
    assert TWISTED.check_connection(RNG.uniform(-1, 1, (5, 4))) == 0
    with pytest.raises(InputError):
        BundleChart(["x", "t"], ["a", "b"], ["x", "t"], A=[["0", "0", "a", "0"], ["0", "0", "0", "1"]])


def test_kernel_frame_of_model_fold():
    k = canonical_kernel(FOLD, [0.3, 0.0, 0.1, 0.2])
    np.testing.assert_allclose(k.vertical, [0, 0, 0, 1])
    np.testing.assert_allclose(k.horizontal, [0, 1, 0, 0])
    assert k.pairing == pytest.approx(2.0)
    assert k.residual < 1e-9


def test_kernel_frame_with_curved_connection():
    k = canonical_kernel(TWISTED, [0.3, 0.0, 0.1, 0.2])
    assert k.residual < 1e-9
    assert np.linalg.matrix_rank(np.array(k.frame)) == 2
    assert abs(k.horizontal[1]) > 0.5  # transverse to t = 0


def test_annihilator_must_be_a_line():
    with pytest.raises(AnnihilatorNotRank1):
        canonical_kernel(FOLD, [0.3, 0.5, 0, 0])
    B = BundleChart(["x", "t"], ["a", "b"], ["x^2", "t^2"])
    with pytest.raises(AnnihilatorNotRank1):
        canonical_kernel(B, [0, 0, 0, 0])


def test_cotangent_model():
    s1 = folded_cotangent_form(1)
    assert s1.vars == ("t", "p")
    assert evaluate_at(s1.coeffs[0][1], s1.vars, [0.5, 0]) == -0.5
    s2 = folded_cotangent_form(2)
    assert s2.vars == ("x1", "t", "p1", "p2")
    assert verify_folded(s2, box(s2.vars)).folded
    X = np.array([0, 0, 0, 1.0])
    assert np.all(s2.contract(X, [0.2, 0.0, 0.3, 0.4]) == 0)


def test_minimal_coupling():
    base = FormField({"0,1": "x1"}, ["x1", "x2"])
    om = minimal_coupling(base, 1)
    assert om.vars == ("x1", "x2", "th", "eta")
    for p in RNG.uniform(-1, 1, (10, 4)):
        assert pfaffian(om, p) == pytest.approx(p[0])
    action, moment = coupling_hamiltonian(om, ["th"], ["eta"])
    assert verify_hamiltonian(om, action, moment, RNG.uniform(-1, 1, (10, 4))).contraction_residual == 0
    np.testing.assert_allclose(om.contract([0, 0, 1, 0], [0.1, 0.2, 0.3, 0.4]), [0, 0, 0, 1])


def test_minimal_coupling_over_symplectic_base():
    om = minimal_coupling(FormField({"0,1": "1"}, ["q", "p"]), 1)
    assert not verify_folded(om, box(om.vars)).folded


def test_minimal_coupling_with_curved_connection():
    base = FormField({"0,1": "x1"}, ["x1", "x2"])
    om = minimal_coupling(base, 1, A=[["x2", "0", "1"]])
    action, moment = coupling_hamiltonian(om, ["th"], ["eta"])
    assert verify_hamiltonian(om, action, moment, RNG.uniform(-1, 1, (10, 4))).passed


QUAD = BundleChart(["x", "y"], ["th1", "th2"], ["x", "y"])
CORNER = CutChart(UnimodularCone([(1, 0), (0, 1)], [0, 0]), QUAD, [0, 0])
EDGE = CutChart(UnimodularCone([(1, 0)], [0, 1]), QUAD, [0, 1])
INTERIOR = CutChart(UnimodularCone([], [1, 1], 2), QUAD, [1, 1])


def test_cut_moment_examples():
    np.testing.assert_allclose(cut_moment(CORNER, [0, 0, 0, 0], [0, 0]), [0, 0])
    assert cut_moment(CORNER, [4, 1, 0, 0], [2, 0])[0] == 0
    assert cut_moment(CORNER, [-1, 1, 0, 0], [0, 0])[0] != 0
    with pytest.raises(DimensionMismatch):
        cut_moment(CORNER, [0, 0, 0, 0], [0])


def test_section_examples():
    line = BundleChart(["s"], ["a"], ["s"])
    C = CutChart(UnimodularCone([(1,)], [0]), line, [0])
    assert cut_section_and_alpha(C, [0, 0]).z[0] == 0
    assert cut_section_and_alpha(EDGE, [9, 5, 0, 0]).z[0] == 3
    with pytest.raises(OutsideCone):
        cut_section_and_alpha(CORNER, [-1, 1, 0, 0])


def test_section_lands_on_level_set():
    for p in np.column_stack([RNG.uniform(0, 3, (100, 2)), RNG.uniform(0, 6, (100, 2))]):
        a = cut_section_and_alpha(CORNER, p)
        assert np.max(np.abs(cut_moment(CORNER, p, a.z))) < 1e-12
        psi = QUAD.psi(p[:2])
        assert cone_contains(CORNER.cone, psi.tolist())[0]


def test_transitions_commute_with_sections():
    for p in np.column_stack([RNG.uniform(0.01, 3, (50, 2)), RNG.uniform(0, 6, (50, 2))]):
        a1, a2, a3 = (cut_section_and_alpha(C, p) for C in (CORNER, EDGE, INTERIOR))
        assert np.max(np.abs(cut_transition(EDGE, CORNER, a2).z - a1.z)) < 1e-10
        assert np.max(np.abs(cut_transition(INTERIOR, EDGE, a3).z - a2.z)) < 1e-10
        loop = cut_transition(INTERIOR, CORNER, cut_transition(EDGE, INTERIOR, cut_transition(CORNER, EDGE, a1)))
        assert np.max(np.abs(loop.z - a1.z)) < 1e-10


def test_transition_permutes_equal_normals():
    swapped = CutChart(UnimodularCone([(0, 1), (1, 0)], [0, 0]), QUAD, [0, 0])
    a = cut_section_and_alpha(CORNER, [1, 4, 0, 0])
    np.testing.assert_allclose(cut_transition(CORNER, swapped, a).z, a.z[::-1])


def test_transition_errors():
    with pytest.raises(NotOnLevelSet):
        cut_transition(EDGE, CORNER, LevelPoint(np.array([1.0, 1, 0, 0]), np.array([0j])))
    a = cut_section_and_alpha(EDGE, [1, 0, 0, 0])
    with pytest.raises(NonPositivePairing):
        cut_transition(EDGE, CORNER, a)
