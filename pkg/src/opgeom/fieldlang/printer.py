"""Canonical text form of expressions.

Precedence levels: 0 sum, 1 product, 2 power, 3 unary minus, 4 atom.
Right operands of binary operators are parenthesised at equal precedence so
that the left-associative parser rebuilds the same tree.
"""
from __future__ import annotations

from .expr import Add, Const, Div, Expr, Func, Mul, Neg, Pow, Sub, Var


def _real_text(r: float) -> str:
    if r == int(r) and abs(r) < 1e15:
        return str(int(r))
    return repr(float(r))


def _const(z: complex) -> tuple[str, int]:
    re, im = z.real, z.imag
    if im == 0:
        text = _real_text(re)
        return text, (3 if re < 0 else 4)
    if abs(im) == 1:
        imag = "i" if im > 0 else "-i"
        imag_level = 4 if im > 0 else 3
    else:
        imag = _real_text(im) + "*i"
        imag_level = 1
    if re == 0:
        return imag, imag_level
    sign = " + " if im > 0 else " - "
    mag = "i" if abs(im) == 1 else _real_text(abs(im)) + "*i"
    return _real_text(re) + sign + mag, 0


def _render(e: Expr, memo: dict) -> tuple[str, int]:
    key = id(e)
    if key in memo:
        return memo[key]
    if isinstance(e, Const):
        out = _const(e.value)
    elif isinstance(e, Var):
        out = (f"x{e.index + 1}", 4)
    elif isinstance(e, Func):
        out = (f"{e.name}({_render(e.arg, memo)[0]})", 4)
    elif isinstance(e, Neg):
        out = ("-" + _wrap(e.arg, 3, memo), 3)
    elif isinstance(e, Pow):
        out = (f"{_wrap(e.base, 4, memo)}^{e.exponent}", 2)
    elif isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        out = (_wrap(e.left, 0, memo) + op + _wrap(e.right, 1, memo), 0)
    elif isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        out = (_wrap(e.left, 1, memo) + op + _wrap(e.right, 2, memo), 1)
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


def _wrap(e: Expr, min_level: int, memo: dict) -> str:
    text, level = _render(e, memo)
    if level < min_level:
        return f"({text})"
    return text


def to_text(e: Expr) -> str:
    return _render(e, {})[0]
