"""Evaluation, differentiation and sampling for field expressions."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as E
from .expr import (
    Add,
    Const,
    Div,
    EvaluationError,
    Expr,
    FieldLangError,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    children,
    safe_ln,
    safe_sqrt,
)

_RUNTIME = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "exp": cmath.exp,
    "ln": safe_ln,
    "sqrt": safe_sqrt,
}


def _topological(roots: Sequence[Expr]) -> list[Expr]:
    order: list[Expr] = []
    seen: set[int] = set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
                continue
            stack.append((node, True))
            for child in children(node):
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def compile_exprs(exprs: Sequence[Expr]) -> Callable[[Sequence[float]], list[complex]]:
    """Compile several expressions into one function of a point.

    Shared subtrees are evaluated once.  The returned function raises
    :class:`EvaluationError` on domain violations.
    """
    order = _topological(exprs)
    names: dict[int, str] = {}
    consts: list[complex] = []
    lines = []
    for k, node in enumerate(order):
        name = f"t{k}"
        names[id(node)] = name
        if isinstance(node, Const):
            consts.append(node.value)
            rhs = f"c[{len(consts) - 1}]"
        elif isinstance(node, Var):
            rhs = f"x{node.index}"
        elif isinstance(node, Add):
            rhs = f"{names[id(node.left)]} + {names[id(node.right)]}"
        elif isinstance(node, Sub):
            rhs = f"{names[id(node.left)]} - {names[id(node.right)]}"
        elif isinstance(node, Mul):
            rhs = f"{names[id(node.left)]} * {names[id(node.right)]}"
        elif isinstance(node, Div):
            rhs = f"{names[id(node.left)]} / {names[id(node.right)]}"
        elif isinstance(node, Pow):
            rhs = f"{names[id(node.base)]} ** ({node.exponent})"
        elif isinstance(node, Neg):
            rhs = f"-{names[id(node.arg)]}"
        elif isinstance(node, Func):
            rhs = f"{node.name}({names[id(node.arg)]})"
        else:
            raise TypeError(f"not an expression node: {node!r}")
        lines.append(f"    {name} = {rhs}")
    result = ", ".join(names[id(e)] for e in exprs)
    source = (
        "def _field(x):\n"
        "    x0, x1, x2, x3 = complex(x[0]), complex(x[1]), complex(x[2]), complex(x[3])\n"
        + "\n".join(lines)
        + f"\n    return [{result}]\n"
    )
    namespace = dict(_RUNTIME, c=consts)
    exec(compile(source, "<opgeom-field>", "exec"), namespace)
    raw = namespace["_field"]

    def evaluate(x):
        try:
            values = raw(x)
        except ZeroDivisionError as exc:
            raise EvaluationError(f"division by zero at x={tuple(x)}") from exc
        except OverflowError as exc:
            raise EvaluationError(f"overflow at x={tuple(x)}") from exc
        for v in values:
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise EvaluationError(f"non-finite value at x={tuple(x)}")
        return values

    return evaluate


def evaluate(e: Expr, x: Sequence[float]) -> complex:
    """Evaluate one expression at a point (compiles on every call)."""
    return compile_exprs([e])(x)[0]


def symbolic_partial(e: Expr, alpha: int, memo: dict | None = None) -> Expr:
    """Exact partial derivative with respect to coordinate ``alpha`` (0-based).

    ``memo`` may be shared between calls on related trees with the same
    ``alpha`` so that common subtrees are differentiated once.
    """
    if alpha not in (0, 1, 2, 3):
        raise FieldLangError(f"coordinate index {alpha} outside 0..3")
    if memo is None:
        memo = {}
    for node in _topological([e]):
        key = id(node)
        if key in memo:
            continue
        memo[key] = (node, _derivative_step(node, alpha, memo))
    return memo[id(e)][1]


def _d(memo, node):
    return memo[id(node)][1]


def _derivative_step(node: Expr, alpha: int, memo: dict) -> Expr:
    if isinstance(node, Const):
        return E.ZERO
    if isinstance(node, Var):
        return E.ONE if node.index == alpha else E.ZERO
    if isinstance(node, Add):
        return E.add(_d(memo, node.left), _d(memo, node.right))
    if isinstance(node, Sub):
        return E.sub(_d(memo, node.left), _d(memo, node.right))
    if isinstance(node, Mul):
        u, v = node.left, node.right
        return E.add(E.mul(_d(memo, u), v), E.mul(u, _d(memo, v)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        du, dv = _d(memo, u), _d(memo, v)
        if isinstance(dv, Const) and dv.value == 0:
            return E.div(du, v)
        return E.div(E.sub(E.mul(du, v), E.mul(u, dv)), E.power(v, 2))
    if isinstance(node, Pow):
        db = _d(memo, node.base)
        n = node.exponent
        return E.mul(E.mul(E.const(n), E.power(node.base, n - 1)), db)
    if isinstance(node, Neg):
        return E.neg(_d(memo, node.arg))
    if isinstance(node, Func):
        u = node.arg
        du = _d(memo, u)
        if isinstance(du, Const) and du.value == 0:
            return E.ZERO
        if node.name == "sin":
            outer = E.func("cos", u)
        elif node.name == "cos":
            outer = E.neg(E.func("sin", u))
        elif node.name == "exp":
            outer = node
        elif node.name == "ln":
            return E.div(du, u)
        elif node.name == "sqrt":
            return E.div(du, E.mul(E.const(2), node))
        else:
            raise FieldLangError(f"unknown function {node.name!r}")
        return E.mul(outer, du)
    raise TypeError(f"not an expression node: {node!r}")


def conjugate(e: Expr, memo: dict | None = None) -> Expr:
    """Complex conjugate of ``e`` for real coordinates.

    Uses conj(f(z)) = f(conj z), valid for every function in the language
    away from the ln/sqrt branch cut on the negative real axis.
    """
    if memo is None:
        memo = {}
    for node in _topological([e]):
        key = id(node)
        if key in memo:
            continue
        memo[key] = (node, _conj_step(node, memo))
    return memo[id(e)][1]


def _conj_step(node: Expr, memo: dict) -> Expr:
    c = lambda n: memo[id(n)][1]  # noqa: E731
    if isinstance(node, Const):
        return Const(node.value.conjugate()) if node.value.imag else node
    if isinstance(node, Var):
        return node
    if isinstance(node, Add):
        return E.add(c(node.left), c(node.right))
    if isinstance(node, Sub):
        return E.sub(c(node.left), c(node.right))
    if isinstance(node, Mul):
        return E.mul(c(node.left), c(node.right))
    if isinstance(node, Div):
        return E.div(c(node.left), c(node.right))
    if isinstance(node, Pow):
        return E.power(c(node.base), node.exponent)
    if isinstance(node, Neg):
        return E.neg(c(node.arg))
    if isinstance(node, Func):
        return E.func(node.name, c(node.arg))
    raise TypeError(f"not an expression node: {node!r}")


def default_step(x: Sequence[float], alpha: int) -> float:
    return 1e-4 * (1.0 + abs(float(x[alpha])))


def richardson_central(f: Callable, x: Sequence[float], alpha: int, h: float | None = None):
    """Central difference in direction ``alpha`` with one Richardson step.

    ``f`` maps a point to a number or a numpy array.
    """
    if h is None:
        h = default_step(x, alpha)
    base = np.asarray(x, dtype=float)
    unit = np.zeros(4)
    unit[alpha] = 1.0

    def central(step):
        return (np.asarray(f(base + step * unit)) - np.asarray(f(base - step * unit))) / (2 * step)

    coarse = central(h)
    fine = central(h / 2)
    return (4 * fine - coarse) / 3


def numeric_partial(e: Expr, x: Sequence[float], alpha: int, h: float | None = None) -> complex:
    """Finite-difference oracle for :func:`symbolic_partial`."""
    fn = compile_exprs([e])
    return complex(richardson_central(lambda y: fn(y)[0], x, alpha, h))


@dataclass(frozen=True)
class ChartBox:
    """Coordinate box on which fields are sampled; sampling is seeded."""

    lo: tuple[float, float, float, float] = (-1.0, -1.0, -1.0, -1.0)
    hi: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    seed: int = 0
    sample_count: int = 200

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 4 or len(hi) != 4:
            raise FieldLangError("chart bounds need four components")
        if not all(a < b for a, b in zip(lo, hi)):
            raise FieldLangError("chart requires lo < hi componentwise")
        if self.sample_count < 1:
            raise FieldLangError("sample_count must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def points(self, n: int | None = None, stream: int = 0, margin: float = 0.05) -> np.ndarray:
        """``n`` points drawn uniformly from the box shrunk by ``margin`` of its width.

        The margin keeps finite-difference stencils inside the box.
        """
        n = self.sample_count if n is None else n
        lo, hi = np.array(self.lo), np.array(self.hi)
        width = hi - lo
        return self.rng(stream).uniform(lo + margin * width, hi - margin * width, size=(n, 4))

    def contains(self, x: Sequence[float]) -> bool:
        return all(a <= v <= b for a, v, b in zip(self.lo, x, self.hi))


def validate(e: Expr, box: ChartBox, n: int | None = None) -> None:
    """Reject expressions that fail to evaluate anywhere on sampled points."""
    fn = compile_exprs([e])
    for x in box.points(n, stream=999, margin=0.0):
        try:
            fn(x)
        except EvaluationError as exc:
            raise EvaluationError(f"{e}: {exc}") from exc
