"""First-order 2x2 operators ``L = P^a d/dx^a + Q`` and their symbols.

The coefficient form ``(P, Q, rho)`` is canonical; full, principal and
subprincipal symbols are derived from it.  ``rho`` is the positive density
of the inner product, so the formal adjoint and the subprincipal symbol both
carry ``grad ln rho`` terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .checks import CheckReport, ResidualTracker
from .fieldlang import ChartBox, MatrixField2, compile_exprs, parse_scalar_expr, symbolic_partial
from .fieldlang import expr as E
from .fieldlang.expr import Expr, as_expr
from .geometry import TOL_DEGENERATE, TOL_HERM, dagger, frame_from_matrices, max_norm

HALF = E.const(0.5)


class OperatorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RawOperator:
    P: tuple[MatrixField2, MatrixField2, MatrixField2, MatrixField2]
    Q: MatrixField2
    rho: Expr = E.ONE
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.P) != 4:
            raise OperatorError("need four coefficient matrices P^1..P^4")
        object.__setattr__(self, "P", tuple(self.P))
        rho = parse_scalar_expr(self.rho) if isinstance(self.rho, str) else as_expr(self.rho)
        object.__setattr__(self, "rho", rho)

    @cached_property
    def sigma_fields(self) -> tuple[MatrixField2, ...]:
        """Pauli matrix fields ``sigma^a = i P^a``."""
        return tuple(p.scale(E.I) for p in self.P)

    @cached_property
    def log_rho_gradient(self) -> tuple[Expr, ...]:
        return tuple(E.div(symbolic_partial(self.rho, a), self.rho) for a in range(4))

    @cached_property
    def subprincipal_field(self) -> MatrixField2:
        """``Q - 1/2 d_a P^a - 1/2 P^a (ln rho)_a`` as a field."""
        total = self.Q
        for a, p in enumerate(self.P):
            total = total - p.partial(a).scale(HALF) - p.scale(E.mul(HALF, self.log_rho_gradient[a]))
        return total

    @cached_property
    def _rho_jet(self):
        return compile_exprs([self.rho] + list(self.log_rho_gradient))

    def rho_at(self, x) -> float:
        return self._rho_jet(x)[0].real

    def log_rho_gradient_at(self, x) -> np.ndarray:
        return np.array(self._rho_jet(x)[1:], dtype=complex)

    def coefficient_jets(self, x):
        """``P[a]``, ``dP[g, a]`` and ``Q`` at ``x``."""
        values, derivs = zip(*(p.jet(x) for p in self.P))
        return np.stack(values), np.stack(derivs, axis=1), self.Q.at(x)

    def validate(self, box: ChartBox, n: int | None = None) -> None:
        rho_fn = compile_exprs([self.rho])
        for x in box.points(n, stream=998, margin=0.0):
            r = rho_fn(x)[0]
            if abs(r.imag) > TOL_HERM or r.real <= 0:
                raise OperatorError(f"density must be positive real, got {r} at {tuple(x)}")
            for p in self.P:
                p.at(x)
            self.Q.at(x)


def full_symbol(op: RawOperator, x, p) -> np.ndarray:
    """``i P^a(x) p_a + Q(x)``."""
    P = np.stack([m.at(x) for m in op.P])
    return 1j * np.einsum("a,aij->ij", np.asarray(p, dtype=float), P) + op.Q.at(x)


def sigma_at(op: RawOperator, x) -> np.ndarray:
    return np.stack([1j * m.at(x) for m in op.P])


def principal_symbol(op: RawOperator, x, p) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(p, dtype=float), sigma_at(op, x))


def subprincipal_symbol(op: RawOperator, x) -> np.ndarray:
    P, dP, Q = op.coefficient_jets(x)
    dlnrho = op.log_rho_gradient_at(x)
    return Q - 0.5 * np.einsum("aaij->ij", dP) - 0.5 * np.einsum("a,aij->ij", dlnrho, P)


def formal_adjoint(op: RawOperator) -> RawOperator:
    """Adjoint with respect to ``<v, w> = int w* v rho dx``."""
    P_hat = tuple(-p.dagger() for p in op.P)
    Q_hat = op.Q.dagger()
    for a, p in enumerate(op.P):
        pd = p.dagger()
        Q_hat = Q_hat - pd.partial(a) - pd.scale(op.log_rho_gradient[a])
    return RawOperator(P_hat, Q_hat, op.rho)


def reconstruct(
    sigma: Sequence[MatrixField2],
    csub: MatrixField2,
    rho=E.ONE,
    box: ChartBox | None = None,
) -> RawOperator:
    """Operator with Pauli matrices ``sigma`` and covariant subprincipal symbol ``csub``.

    ``P^a = -i sigma^a`` and ``Q = csub + f(sigma) + 1/2 d_a P^a + 1/2 P^a (ln rho)_a``.
    Degeneracy is checked on ``box`` when given, otherwise only for constant
    ``sigma``.
    """
    from .gauge import f_field

    sigma = tuple(sigma)
    if box is not None or all(s.is_constant for s in sigma):
        points = box.points(stream=997, margin=0.0) if box is not None else [np.zeros(4)]
        for x in points:
            det = frame_from_matrices(np.stack([s.at(x) for s in sigma])).det
            if abs(det) < TOL_DEGENERATE:
                raise OperatorError(f"degenerate Pauli matrices, |det e| = {abs(det):.3e} at {tuple(x)}")
    P = tuple(s.scale(E.const(-1j)) for s in sigma)
    skeleton = RawOperator(P, MatrixField2.zero(), rho)
    Q = csub + f_field(sigma)
    for a, p in enumerate(P):
        Q = Q + p.partial(a).scale(HALF) + p.scale(E.mul(HALF, skeleton.log_rho_gradient[a]))
    return RawOperator(P, Q, skeleton.rho)


def _vector_jet(v: Sequence[Expr]):
    v = [as_expr(e) for e in v]
    exprs = list(v)
    for a in range(4):
        memo: dict = {}
        exprs.extend(symbolic_partial(e, a, memo) for e in v)
    fn = compile_exprs(exprs)
    n = len(v)

    def jet(x):
        vals = np.array(fn(x), dtype=complex)
        return vals[:n], vals[n:].reshape(4, n)

    return jet


def apply(op: RawOperator, v: Sequence[Expr], x) -> np.ndarray:
    """``(L v)(x) = P^a(x) d_a v(x) + Q(x) v(x)`` with exact derivatives of ``v``."""
    value, dv = _vector_jet(v)(x)
    return apply_jet(op, value, dv, x)


def apply_jet(op: RawOperator, value: np.ndarray, dv: np.ndarray, x) -> np.ndarray:
    P = np.stack([m.at(x) for m in op.P])
    return np.einsum("aij,aj->i", P, dv) + op.Q.at(x) @ value


def hermiticity_residuals(op: RawOperator, x, p) -> tuple[float, float]:
    pr = principal_symbol(op, x, p)
    sub = subprincipal_symbol(op, x)
    return max_norm(pr - dagger(pr)), max_norm(sub - dagger(sub))


def check_selfadjoint(op: RawOperator, box: ChartBox, tol: float = TOL_HERM, p_per_x: int = 5) -> CheckReport:
    """Self-adjoint iff principal and subprincipal symbols are Hermitian."""
    tracker = ResidualTracker()
    rng = box.rng(stream=11)
    for x in box.points(stream=11):
        sub = subprincipal_symbol(op, x)
        tracker.add(max_norm(sub - dagger(sub)), x)
        sig = sigma_at(op, x)
        for _ in range(p_per_x):
            p = rng.normal(size=4)
            pr = np.einsum("a,aij->ij", p, sig)
            tracker.add(max_norm(pr - dagger(pr)), x, p)
        tracker.count()
    return CheckReport.from_tracker("selfadjoint", tracker, tol)


def check_nondegenerate(op: RawOperator, box: ChartBox, tol_degenerate: float = TOL_DEGENERATE) -> CheckReport:
    """Reports ``1/min|det e|`` against ``1/tol_degenerate`` over sampled points."""
    tracker = ResidualTracker()
    for x in box.points(stream=12):
        det = abs(frame_from_matrices(sigma_at(op, x)).det)
        tracker.add(np.inf if det == 0 else 1.0 / det, x)
        tracker.count()
    return CheckReport.from_tracker("nondegenerate", tracker, 1.0 / tol_degenerate, note="sampled; residual is 1/|det e|")


@dataclass(frozen=True)
class SymbolView:
    """All symbols of an operator evaluated at one ``(x, p)``."""

    full: np.ndarray
    prin: np.ndarray
    sub: np.ndarray
    csub: np.ndarray
    sigma: np.ndarray


def symbol_view(op: RawOperator, x, p) -> SymbolView:
    from .gauge import csub_at

    return SymbolView(
        full=full_symbol(op, x, p),
        prin=principal_symbol(op, x, p),
        sub=subprincipal_symbol(op, x),
        csub=csub_at(op, x),
        sigma=sigma_at(op, x),
    )
