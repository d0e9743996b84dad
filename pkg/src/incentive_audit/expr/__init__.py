"""Symbolic cost-function expressions: parsing, calculus, structure checks."""

from .nodes import (
    DIV_GUARD,
    Abs,
    Const,
    Expression,
    ExpressionError,
    Neg,
    NonDifferentiableError,
    Number,
    Power,
    Product,
    SafeDiv,
    Sum,
    UnboundVariableError,
    Var,
    absval,
    add,
    as_expression,
    const,
    diff,
    evaluate,
    has_guarded_division,
    is_smooth,
    mul,
    neg,
    power,
    safediv,
    substitute,
    structural_variables,
    to_text,
    var,
)
from .parser import ParseError, UnknownVariable, parse
from .polynomial import (
    Polynomial,
    as_polynomial,
    dependencies,
    expand,
    hessian,
    separable_decomposition,
    structurally_equal,
)

__all__ = [
    "DIV_GUARD",
    "Abs",
    "Const",
    "Expression",
    "ExpressionError",
    "Neg",
    "NonDifferentiableError",
    "Number",
    "ParseError",
    "Polynomial",
    "Power",
    "Product",
    "SafeDiv",
    "Sum",
    "UnboundVariableError",
    "UnknownVariable",
    "Var",
    "absval",
    "add",
    "as_expression",
    "as_polynomial",
    "const",
    "dependencies",
    "diff",
    "evaluate",
    "expand",
    "has_guarded_division",
    "hessian",
    "is_smooth",
    "mul",
    "neg",
    "parse",
    "power",
    "safediv",
    "separable_decomposition",
    "structural_variables",
    "structurally_equal",
    "substitute",
    "to_text",
    "var",
]
