"""2x2 complex matrix-valued fields with expression entries."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import expr as E
from .calculus import ChartBox, compile_exprs, conjugate, richardson_central, symbolic_partial
from .expr import Expr, as_expr
from .parser import parse_scalar_expr


@dataclass(frozen=True, eq=False)
class MatrixField2:
    """Row-major entries ``(m11, m12, m21, m22)``.

    Equality is identity; use :meth:`structurally_equal` to compare trees.
    """

    entries: tuple[Expr, Expr, Expr, Expr]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(as_expr(e) for e in self.entries)
        if len(entries) != 4:
            raise ValueError("a 2x2 matrix field needs four entries")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows) -> "MatrixField2":
        """Build from ``[[a, b], [c, d]]`` of strings, numbers or expressions."""
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValueError("expected a 2x2 nested list")
        flat = [rows[0][0], rows[0][1], rows[1][0], rows[1][1]]
        return cls(tuple(parse_scalar_expr(v) if isinstance(v, str) else as_expr(v) for v in flat))

    @classmethod
    def constant(cls, matrix) -> "MatrixField2":
        m = np.asarray(matrix, dtype=complex)
        return cls(tuple(E.const(v) for v in m.ravel()))

    @classmethod
    def scalar(cls, s) -> "MatrixField2":
        s = parse_scalar_expr(s) if isinstance(s, str) else as_expr(s)
        return cls((s, E.ZERO, E.ZERO, s))

    @classmethod
    def identity(cls) -> "MatrixField2":
        return cls.scalar(E.ONE)

    @classmethod
    def zero(cls) -> "MatrixField2":
        return cls.scalar(E.ZERO)

    def rows(self) -> list[list[str]]:
        a, b, c, d = (str(e) for e in self.entries)
        return [[a, b], [c, d]]

    def structurally_equal(self, other: "MatrixField2") -> bool:
        return all(a == b for a, b in zip(self.entries, other.entries))

    @property
    def is_constant(self) -> bool:
        return all(isinstance(e, E.Const) for e in self.entries)

    # algebra

    def __add__(self, other: "MatrixField2") -> "MatrixField2":
        return MatrixField2(tuple(E.add(a, b) for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MatrixField2") -> "MatrixField2":
        return MatrixField2(tuple(E.sub(a, b) for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "MatrixField2":
        return MatrixField2(tuple(E.neg(a) for a in self.entries))

    def __matmul__(self, other: "MatrixField2") -> "MatrixField2":
        a, b, c, d = self.entries
        p, q, r, s = other.entries
        return MatrixField2(
            (
                E.add(E.mul(a, p), E.mul(b, r)),
                E.add(E.mul(a, q), E.mul(b, s)),
                E.add(E.mul(c, p), E.mul(d, r)),
                E.add(E.mul(c, q), E.mul(d, s)),
            )
        )

    def scale(self, s) -> "MatrixField2":
        s = as_expr(s)
        return MatrixField2(tuple(E.mul(s, a) for a in self.entries))

    def dagger(self) -> "MatrixField2":
        if "dagger" not in self._cache:
            memo: dict = {}
            a, b, c, d = (conjugate(e, memo) for e in self.entries)
            self._cache["dagger"] = MatrixField2((a, c, b, d))
        return self._cache["dagger"]

    def adj(self) -> "MatrixField2":
        """Matrix adjugate ``[[d, -b], [-c, a]]``."""
        a, b, c, d = self.entries
        return MatrixField2((d, E.neg(b), E.neg(c), a))

    def det(self) -> Expr:
        a, b, c, d = self.entries
        return E.sub(E.mul(a, d), E.mul(b, c))

    def trace(self) -> Expr:
        return E.add(self.entries[0], self.entries[3])

    def partial(self, alpha: int) -> "MatrixField2":
        key = ("partial", alpha)
        if key not in self._cache:
            memo: dict = {}
            self._cache[key] = MatrixField2(tuple(symbolic_partial(e, alpha, memo) for e in self.entries))
        return self._cache[key]

    # evaluation

    @cached_property
    def _value_fn(self):
        return compile_exprs(self.entries)

    @cached_property
    def _jet_fn(self):
        exprs = list(self.entries)
        for alpha in range(4):
            exprs.extend(self.partial(alpha).entries)
        return compile_exprs(exprs)

    def at(self, x: Sequence[float]) -> np.ndarray:
        return np.array(self._value_fn(x), dtype=complex).reshape(2, 2)

    def jet(self, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Value and exact first derivatives; ``d[alpha]`` is the x^alpha partial."""
        values = np.array(self._jet_fn(x), dtype=complex)
        return values[:4].reshape(2, 2), values[4:].reshape(4, 2, 2)

    def fd_partials(self, x: Sequence[float], h: float | None = None) -> np.ndarray:
        """Finite-difference oracle for the derivatives returned by :meth:`jet`."""
        return np.stack([richardson_central(self.at, x, alpha, h) for alpha in range(4)])

    def validate(self, box: ChartBox, n: int | None = None) -> None:
        for x in box.points(n, stream=999, margin=0.0):
            self.at(x)


def matrix_sum(fields: Sequence[MatrixField2]) -> MatrixField2:
    total = MatrixField2.zero()
    for f in fields:
        total = total + f
    return total
