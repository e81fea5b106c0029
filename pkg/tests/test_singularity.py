import time

import numpy as np
import pytest

from foldkit.errors import KernelNotTransverse
from foldkit.expr import VectorExpression
from foldkit.io import load_map
from foldkit.sampling import Domain
from foldkit.singularity import (
    IS_FOLD,
    INCONCLUSIVE,
    NOT_FOLD,
    chi_morse_check,
    fold_factorization,
    is_fold_map,
    jacobian_determinant,
)

from .conftest import data_path

PLANE = Domain(("x", "y"), [(-1, 1), (-1, 1)])


def test_standard_fold():
    cert = is_fold_map(VectorExpression(["x", "y^2"], ["x", "y"]), PLANE)
    assert cert.verdict == IS_FOLD
    assert cert.fold_points
    for p, m, k in zip(cert.fold_points, cert.transversality_margins, cert.kernel_vectors):
        assert abs(p[1]) < 1e-8
        assert m == pytest.approx(2.0)
        assert abs(abs(k[1]) - 1) < 1e-9


def test_cubic_is_not_a_fold():
    cert = is_fold_map(VectorExpression(["x", "y^3"], ["x", "y"]), PLANE)
    assert cert.verdict == NOT_FOLD


def test_fold_on_half_plane_boundary_is_rejected():
    f, dom = load_map(data_path("halfplane_map.json"))
    cert = is_fold_map(f, dom)
    assert cert.verdict == NOT_FOLD
    assert "boundary" in cert.reason


def test_sphere_chart():
    f, dom = load_map(data_path("sphere_chart.json"))
    cert = is_fold_map(f, dom)
    assert cert.verdict == IS_FOLD
    assert all(abs(p[1]) < 1e-8 for p in cert.fold_points)
    det = jacobian_determinant(f)
    assert str(det)  # symbolic determinant is available


def test_no_singular_points():
    cert = is_fold_map(VectorExpression(["x", "y"], ["x", "y"]), PLANE)
    assert cert.verdict == NOT_FOLD and not cert.fold_points


def test_certificate_is_reproducible():
    f = VectorExpression(["x", "y^2 + x*y"], ["x", "y"])
    a = is_fold_map(f, PLANE, seed=4).to_dict()
    b = is_fold_map(f, PLANE, seed=4).to_dict()
    assert a == b


def test_invariance_under_shear():
    # (x, y) -> (x + 2y, y) has determinant one
    f = VectorExpression(["x + 2*y", "y^2"], ["x", "y"])
    g = VectorExpression(["x", "(y - x/3)^2"], ["x", "y"])
    assert is_fold_map(f, PLANE).verdict == IS_FOLD
    assert is_fold_map(g, PLANE).verdict == IS_FOLD


def test_factorization_of_model_fold():
    fac = fold_factorization(VectorExpression(["x", "t^2"], ["x", "t"]), [0.0, 0.0])
    assert fac.node_residual == 0.0
    for v in fac.F_at_fold:
        np.testing.assert_allclose(np.abs(v), [0, 1], atol=1e-12)


def test_factorization_with_varying_coefficient():
    fac = fold_factorization(VectorExpression(["x", "t^2 + t^2*x"], ["x", "t"]), [0.0, 0.0])
    assert fac.node_residual < 1e-10
    x = (fac.origin + fac.frame @ [0.5, 0.0])[0]
    k = fac.frame[1, 1]
    assert fac.F(0.5, 0.0)[1] == pytest.approx((1 + x) * k**2)


def test_factorization_limit_error_shrinks_fast():
    f = VectorExpression(["x", "t^2*exp(x*t)"], ["x", "t"])
    coarse = fold_factorization(f, [0.0, 0.0], radius=0.4)
    fine = fold_factorization(f, [0.0, 0.0], radius=0.2)
    assert fine.limit_error < coarse.limit_error / 8


def test_factorization_of_cubic_fails():
    with pytest.raises(KernelNotTransverse):
        fold_factorization(VectorExpression(["x", "t^3"], ["x", "t"]), [0.0, 0.0])


def test_chi_morse_examples():
    rep = chi_morse_check("s^2/2", "1")
    assert rep.is_morse and rep.critical_points == pytest.approx([1.0])
    assert not chi_morse_check("s", "1").is_morse
    rep = chi_morse_check("s^2/2", "0")
    assert rep.is_morse and rep.critical_points == pytest.approx([0.0], abs=1e-12)


def test_fixtures_run_quickly():
    for name in ["plane_fold.json", "plane_cusp.json", "halfplane_map.json", "sphere_chart.json"]:
        f, dom = load_map(data_path(name))
        t = time.perf_counter()
        is_fold_map(f, dom)
        assert time.perf_counter() - t < 1.0
