import numpy as np
import pytest

from foldkit.errors import (
    DegenerateVanishing,
    KernelTooLarge,
    NotClosed,
    NotInKernel,
    NotTransverse,
    OddDimension,
    Unsolvable,
)
from foldkit.expr import VectorExpression
from foldkit.form import (
    FormField,
    exterior_derivative_is_zero,
    induced_orientation,
    one_form_d,
    pfaffian,
    pfaffian_value,
    pullback,
    solve_contraction,
    verify_folded,
)
from foldkit.models import folded_cotangent_form
from foldkit.sampling import Domain

V4 = ["x1", "x2", "x3", "x4"]
FS3 = FormField({"0,1": "x1", "2,3": "1"}, V4)


def box(vars, r=1.0):
    return Domain(tuple(vars), [(-r, r)] * len(vars))


def test_structural_antisymmetry():
    s = FormField({"1,0": "x1"}, ["x1", "x2"])
    assert str(s.coeffs[0][1]) == "-x1"
    assert np.all((FS3 - FS3).matrix([0.3, 1, 2, 3]) == 0)


def test_closedness():
    pts = np.random.default_rng(0).uniform(-1, 1, (10, 4))
    assert exterior_derivative_is_zero(FS3, pts).max_residual == 0
    assert exterior_derivative_is_zero(FormField({"0,1": "x2"}, ["x1", "x2"]), pts[:, :2]).closed
    rep = exterior_derivative_is_zero(FormField({"0,1": "x3"}, V4), pts)
    assert not rep.closed and rep.max_residual == pytest.approx(1.0)


def test_exterior_derivative_squares_to_zero():
    s = one_form_d(["x2*sin(x3)", "x1^2*x4", "exp(x1*x2)", "x3"], V4)
    pts = np.random.default_rng(1).uniform(-1, 1, (10, 4))
    assert exterior_derivative_is_zero(s, pts).closed


def test_pfaffian_examples():
    assert pfaffian(FS3, [0.7, 0, 0, 0]) == pytest.approx(0.7)
    std = FormField({"0,1": "1", "2,3": "1"}, V4)
    assert pfaffian(std, [3, 1, 4, 1]) == 1
    with pytest.raises(OddDimension):
        pfaffian(FormField({"0,1": "1"}, ["a", "b", "c"]), [0, 0, 0])


def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(2)
    for n in (2, 4, 6):
        for _ in range(50):
            a = rng.normal(size=(n, n))
            a = a - a.T
            pf = pfaffian_value(a.tolist())
            assert pf**2 == pytest.approx(np.linalg.det(a), rel=1e-9)


def test_pullback_of_area_form():
    area = FormField({"0,1": "1"}, ["u", "v"])
    s = pullback(area, ["x", "y^2"], ["x", "y"])
    assert pfaffian(s, [0.3, 0.5]) == pytest.approx(1.0)


def test_fs3_is_folded_with_expected_frame():
    data = verify_folded(FS3, box(V4))
    assert data.folded and data.fold_points
    for p, (kt, kn) in zip(data.fold_points, data.kernel_frames):
        assert abs(p[0]) < 1e-8
        np.testing.assert_allclose(np.abs(kt), [0, 1, 0, 0], atol=1e-9)
        np.testing.assert_allclose(np.abs(kn), [1, 0, 0, 0], atol=1e-9)


def test_fs3_in_six_dimensions():
    V6 = [f"x{i}" for i in range(1, 7)]
    s = FormField({"0,1": "x1", "2,3": "1", "4,5": "1"}, V6)
    data = verify_folded(s, box(V6))
    assert data.folded and all(abs(p[0]) < 1e-8 for p in data.fold_points)


def test_cylinder_form():
    s = FormField({"0,1": "2*t"}, ["t", "th"])
    data = verify_folded(s, Domain(("t", "th"), [(-1, 1), (0, 6.28)]))
    assert data.folded and all(abs(p[0]) < 1e-8 for p in data.fold_points)


@pytest.mark.parametrize("n", [1, 2])
def test_cotangent_model_is_folded(n):
    s = folded_cotangent_form(n)
    assert verify_folded(s, box(s.vars)).folded


def test_symplectic_form_has_no_fold():
    s = FormField({"0,1": "1", "2,3": "1"}, V4)
    assert not verify_folded(s, box(V4)).folded


def test_rejections():
    with pytest.raises(DegenerateVanishing):
        verify_folded(FormField({"0,1": "x1^2", "2,3": "1"}, V4), box(V4))
    with pytest.raises(NotClosed):
        verify_folded(FormField({"0,1": "x3", "2,3": "1"}, V4), box(V4))
    with pytest.raises(KernelTooLarge):
        verify_folded(FormField({"0,2": "x2", "1,2": "x1", "0,3": "1"}, V4), box(V4))


def test_orientation_examples():
    z = [0, 0.2, 0.3, 0.4]
    assert induced_orientation(FS3, z, [0, 1, 0, 0], [1, 0, 0, 0]) == 1
    assert induced_orientation(FS3, z, [0, -1, 0, 0], [1, 0, 0, 0]) == -1
    assert induced_orientation(FS3, z, [0, 1, 0, 0], [-1, 0, 0, 0]) == 1


def test_orientation_with_nonconstant_extensions():
    z = [0, 0.2, 0.3, 0.4]
    w_field = VectorExpression(["1 + x1*x3", "x1^2", "x1*x2", "0"], V4)
    v_field = VectorExpression(["x1*x4", "1 + x1", "x1", "0"], V4)
    assert induced_orientation(FS3, z, [0, 1, 0, 0], [1, 0, 0, 0], v_field, w_field) == 1


def test_orientation_input_checks():
    z = [0, 0, 0, 0]
    with pytest.raises(NotInKernel):
        induced_orientation(FS3, z, [0, 0, 1, 0], [1, 0, 0, 0])
    with pytest.raises(NotTransverse):
        induced_orientation(FS3, z, [0, 1, 0, 0], [0, 1, 0, 0])


def test_contraction_examples():
    s = FormField({"0,1": "x1"}, ["x1", "x2"])
    sol = solve_contraction(s, ["x1", "0"], [0.5, 0.2])
    np.testing.assert_allclose(sol.X, [0, -1])
    assert sol.residual < 1e-10 and not sol.on_fold
    with pytest.raises(Unsolvable) as info:
        solve_contraction(s, ["1", "0"], [0.0, 0.0])
    assert abs(info.value.pairing) > 0
    sol = solve_contraction(s, ["0", "0"], [0.0, 0.3])
    assert np.all(sol.X == 0)
    sol = solve_contraction(s, ["x1", "0"], [0.0, 0.3])
    assert sol.on_fold and sol.residual < 1e-10


def test_contraction_at_fold_depends_on_kernel_pairing():
    rng = np.random.default_rng(9)
    for _ in range(40):
        p = np.array([0.0, *rng.uniform(-1, 1, 3)])
        good = [0.0, 0.0, *rng.normal(size=2)]
        sol = solve_contraction(FS3, [float(c) for c in good], p)
        assert sol.residual < 1e-10
        bad = list(good)
        bad[int(rng.integers(0, 2))] += rng.choice([-1, 1]) * rng.uniform(0.1, 2)
        with pytest.raises(Unsolvable):
            solve_contraction(FS3, [float(c) for c in bad], p)
