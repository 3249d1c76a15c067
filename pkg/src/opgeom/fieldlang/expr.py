"""Expression trees for scalar fields over a 4-dimensional chart.

Nodes are immutable.  All construction goes through the smart constructors
(``add``, ``mul``, ...) which fold constants and drop neutral elements, so a
tree built here is already in canonical form and prints to text that parses
back to an equal tree.

Derived fields (adjugates, inverse frames, ...) are built as DAGs that share
subtrees.  Never hash or compare those structurally; the evaluator and the
differentiator memoise by node identity instead.
"""
from __future__ import annotations

import cmath
import math
import operator
from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")

Number = Union[int, float, complex]


class FieldLangError(ValueError):
    """Base class for expression language errors."""


class EvaluationError(FieldLangError):
    """Raised on a domain violation (division by zero, ln/sqrt branch cut)."""


@dataclass(frozen=True)
class Expr:
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)

    def __str__(self):
        from .printer import to_text

        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: complex


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based; printed as x1..x4


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


ZERO = Const(0j)
ONE = Const(1 + 0j)
I = Const(1j)
X1, X2, X3, X4 = (Var(k) for k in range(4))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, complex)):
        return const(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def const(value: Number) -> Const:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise FieldLangError(f"non-finite constant {value!r}")
    return Const(z)


def var(index: int) -> Var:
    if index not in (0, 1, 2, 3):
        raise FieldLangError(f"coordinate index {index} outside 0..3")
    return Var(index)


def is_const(e: Expr, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def _fold(op, *values):
    """Folded constant, or None when the result would not be finite."""
    try:
        z = complex(op(*values))
    except (OverflowError, ZeroDivisionError, EvaluationError):
        return None
    if math.isfinite(z.real) and math.isfinite(z.imag):
        return Const(z)
    return None


def _both_const(a: Expr, b: Expr) -> bool:
    return isinstance(a, Const) and isinstance(b, Const)


def add(a: Expr, b: Expr) -> Expr:
    if _both_const(a, b) and (c := _fold(operator.add, a.value, b.value)) is not None:
        return c
    if is_const(a, 0):
        return b
    if is_const(b, 0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _both_const(a, b) and (c := _fold(operator.sub, a.value, b.value)) is not None:
        return c
    if is_const(b, 0):
        return a
    if is_const(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _both_const(a, b) and (c := _fold(operator.mul, a.value, b.value)) is not None:
        return c
    if is_const(a, 0) or is_const(b, 0):
        return ZERO
    if is_const(a, 1):
        return b
    if is_const(b, 1):
        return a
    if is_const(a, -1):
        return neg(b)
    if is_const(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and b.value == 0:
        return Div(a, b)  # left for evaluation to reject
    if _both_const(a, b) and (c := _fold(operator.truediv, a.value, b.value)) is not None:
        return c
    if is_const(a, 0):
        return ZERO
    if is_const(b, 1):
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and not (a.value == 0 and n < 0):
        folded = _fold(operator.pow, a.value, n)
        if folded is not None:
            return folded
    return Pow(a, n)


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise FieldLangError(f"unknown function {name!r}")
    if isinstance(a, Const):
        folded = _fold(apply_function, name, a.value)
        if folded is not None:
            return folded
    return Func(name, a)


def sin(a) -> Expr:
    return func("sin", as_expr(a))


def cos(a) -> Expr:
    return func("cos", as_expr(a))


def exp(a) -> Expr:
    return func("exp", as_expr(a))


def ln(a) -> Expr:
    return func("ln", as_expr(a))


def sqrt(a) -> Expr:
    return func("sqrt", as_expr(a))


def _on_cut(z: complex, closed: bool) -> bool:
    return z.imag == 0 and (z.real <= 0 if closed else z.real < 0)


def safe_ln(z: complex) -> complex:
    if _on_cut(z, closed=True):
        raise EvaluationError(f"ln of non-positive real {z.real!r}")
    return cmath.log(z)


def safe_sqrt(z: complex) -> complex:
    if _on_cut(z, closed=False):
        raise EvaluationError(f"sqrt of negative real {z.real!r}")
    return cmath.sqrt(z)


def apply_function(name: str, z: complex) -> complex:
    if name == "sin":
        return cmath.sin(z)
    if name == "cos":
        return cmath.cos(z)
    if name == "exp":
        return cmath.exp(z)
    if name == "ln":
        return safe_ln(z)
    if name == "sqrt":
        return safe_sqrt(z)
    raise FieldLangError(f"unknown function {name!r}")


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, Func):
        return (e.arg,)
    return ()


def count_nodes(e: Expr) -> int:
    """Number of distinct nodes (by identity) reachable from ``e``."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(children(node))
    return len(seen)
