"""Scalar expressions: parsing, printing, evaluation and differentiation."""
from .calculus import (
    VectorExpression,
    det_expr,
    diff,
    gradient,
    hessian,
    jacobian,
    jacobian_derivatives,
    pfaffian_expr,
    second_derivative,
    value_and_jacobian,
)
from .dual import Dual, HyperDual
from .evaluate import NotExact, evaluate, evaluate_at, evaluate_exact
from .nodes import (
    FUNCTIONS,
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
    substitute,
)
from .parser import parse
from .printer import to_text

__all__ = [
    "Add", "Call", "Div", "Dual", "Expression", "FUNCTIONS", "HyperDual", "Mul",
    "Neg", "NotExact", "Num", "Pow", "Sub", "Var", "VectorExpression", "as_expr",
    "det_expr", "diff", "evaluate", "evaluate_at", "evaluate_exact", "gradient", "hessian",
    "jacobian", "jacobian_derivatives", "parse", "pfaffian_expr", "second_derivative", "substitute",
    "to_text", "value_and_jacobian",
]
