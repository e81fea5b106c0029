import numpy as np
import pytest

from foldkit.errors import DomainError, ExprSyntaxError, UnknownFunction, UnknownVariable
from foldkit.expr import (
    VectorExpression,
    det_expr,
    diff,
    evaluate,
    evaluate_at,
    evaluate_exact,
    gradient,
    hessian,
    jacobian,
    parse,
    pfaffian_expr,
    second_derivative,
    to_text,
)


def test_parse_and_evaluate_polynomial():
    e = parse("x1*x1 + 2")
    assert evaluate(e, {"x1": 3}) == 11


def test_sphere_chart_component_at_origin():
    e = parse("sqrt(1 - y^2 - z^2)")
    assert evaluate_at(e, ["y", "z"], [0, 0]) == 1.0


def test_syntax_error_reports_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x1 +* 2")
    assert info.value.offset == 4


@pytest.mark.parametrize("text", ["(x", "x +", "2 ^ y", ")", "x y"])
def test_malformed_inputs_raise(text):
    with pytest.raises(ExprSyntaxError):
        parse(text)


def test_unknown_function_and_variable():
    with pytest.raises(UnknownFunction):
        parse("tan(x)")
    with pytest.raises(UnknownVariable):
        parse("x + y", ["x"])


def test_round_trip_of_canonical_text():
    for text in ["x^2 + sin(y)", "-(a - b)/c", "exp(log(x))*3/4", "x^-2"]:
        e = parse(text)
        assert parse(to_text(e)) == e
        assert to_text(parse(to_text(e))) == to_text(e)


def test_constants_are_exact():
    assert evaluate_exact(parse("x/3 + 1"), ["x"], [1]) == pytest.approx(4 / 3)
    assert str(evaluate_exact(parse("x/3 + 1"), ["x"], [1])) == "4/3"


def test_domain_errors():
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(x)"), {"x": -1})
    with pytest.raises(DomainError):
        evaluate(parse("log(x)"), {"x": 0})
    with pytest.raises(DomainError):
        evaluate(parse("1/x"), {"x": 0})


def test_jacobian_examples():
    f = VectorExpression(["x", "y^2"], ["x", "y"])
    np.testing.assert_allclose(jacobian(f, [1, 3]), [[1, 0], [0, 6]])
    g = VectorExpression(["sqrt(1 - y^2 - z^2)", "y"], ["y", "z"])
    J = jacobian(g, [0, 0])
    np.testing.assert_allclose(J, [[0, 0], [1, 0]], atol=0)
    assert np.linalg.det(J) == 0


def test_jacobian_matches_central_differences():
    f = VectorExpression(["x", "y^2"], ["x", "y"])
    rng = np.random.default_rng(3)
    h = 1e-5
    for p in rng.uniform(-2, 2, (20, 2)):
        fd = np.column_stack([(f(p + h * e) - f(p - h * e)) / (2 * h) for e in np.eye(2)])
        np.testing.assert_allclose(jacobian(f, p), fd, rtol=1e-6, atol=1e-8)


def test_second_derivatives():
    f = VectorExpression(["x", "y^2"], ["x", "y"])
    np.testing.assert_allclose(second_derivative(f, [0, 0], [0, 1], [0, 1]), [0, 2])
    g = VectorExpression(["x", "y^3"], ["x", "y"])
    np.testing.assert_allclose(second_derivative(g, [0, 0], [0, 1], [0, 1]), [0, 0])
    h = VectorExpression(["sin(x*y) + x^3*y", "exp(x - y)"], ["x", "y"])
    u, v = np.array([0.3, -1.2]), np.array([2.0, 0.5])
    p = [0.4, 0.7]
    np.testing.assert_allclose(second_derivative(h, p, u, v), second_derivative(h, p, v, u), atol=1e-10)


def test_gradient_and_hessian():
    val, grad = gradient(parse("x^2*y"), ["x", "y"], [1, 2])
    assert val == 2
    np.testing.assert_allclose(grad, [4, 1])
    np.testing.assert_allclose(hessian(parse("x^2*y"), ["x", "y"], [1, 2]), [[4, 2], [2, 0]])


def test_symbolic_diff_agrees_with_forward_mode():
    e = parse("x*sin(y) + exp(x*y)/(1 + x^2)")
    p = [0.3, -0.8]
    _, grad = gradient(e, ["x", "y"], p)
    assert evaluate_at(diff(e, "x"), ["x", "y"], p) == pytest.approx(grad[0], rel=1e-12)
    assert evaluate_at(diff(e, "y"), ["x", "y"], p) == pytest.approx(grad[1], rel=1e-12)


def test_symbolic_det_and_pfaffian():
    m = [[parse("a"), parse("b")], [parse("c"), parse("d")]]
    assert evaluate(det_expr(m), {"a": 1, "b": 2, "c": 3, "d": 4}) == -2
    s = [[parse("0"), parse("1")], [parse("-1"), parse("0")]]
    assert evaluate(pfaffian_expr(s), {}) == 1


def test_evaluation_is_repeatable():
    e = parse("sin(x)^3 + cos(y)/3")
    a = evaluate(e, {"x": 0.123, "y": 4.56})
    b = evaluate(e, {"x": 0.123, "y": 4.56})
    assert a == b
