"""Scalar and 2x2 matrix field expressions over a 4-chart."""
from .calculus import (
    ChartBox,
    compile_exprs,
    conjugate,
    evaluate,
    numeric_partial,
    richardson_central,
    symbolic_partial,
    validate,
)
from .expr import (
    EvaluationError,
    Expr,
    FieldLangError,
    I,
    X1,
    X2,
    X3,
    X4,
    const,
    cos,
    exp,
    ln,
    sin,
    sqrt,
)
from .matrix import MatrixField2, matrix_sum
from .parser import ParseError, parse_scalar_expr
from .printer import to_text

eval_expr = evaluate

__all__ = [
    "ChartBox",
    "EvaluationError",
    "Expr",
    "FieldLangError",
    "I",
    "MatrixField2",
    "ParseError",
    "X1",
    "X2",
    "X3",
    "X4",
    "compile_exprs",
    "conjugate",
    "const",
    "cos",
    "eval_expr",
    "evaluate",
    "exp",
    "ln",
    "matrix_sum",
    "numeric_partial",
    "parse_scalar_expr",
    "richardson_central",
    "sin",
    "sqrt",
    "symbolic_partial",
    "to_text",
    "validate",
]
