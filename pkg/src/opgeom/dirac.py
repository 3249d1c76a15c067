"""Adjugate operator, the 4x4 Dirac operator and its geometric counterpart.

Two independent descriptions of the same operator are compared here: the
analytic one, assembled purely from the coefficients of ``L``, and the
traditional one, written with Pauli matrices, Christoffel symbols and the
spinor covariant derivative.  They are related by density rescalings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .checks import CheckReport, ResidualTracker
from .fieldlang import compile_exprs, parse_scalar_expr
from .fieldlang import expr as E
from .fieldlang.calculus import richardson_central
from .geometry import (
    METRIC_SPINOR,
    GeometrySnapshot,
    adj,
    christoffel_fd,
    dagger,
    frame_determinant_expr,
    geometry_at,
    lower_index,
    max_norm,
    metric_at,
    sigma_jet_fd,
    sigma_matrices,
)
from .gauge import GaugeField, csub_field, extract_A_at, f_anticommutation_residual, f_at, gl_transform
from .operator_core import OperatorError, RawOperator, _vector_jet, apply_jet, full_symbol, reconstruct

EYE2 = np.eye(2, dtype=complex)


def adjugate_operator(op: RawOperator) -> RawOperator:
    """``Adj L``: Pauli matrices and covariant subprincipal symbol both adjugated."""
    if "adjugate" not in op._cache:
        sigma = tuple(s.adj() for s in op.sigma_fields)
        op._cache["adjugate"] = reconstruct(sigma, csub_field(op).adj(), op.rho)
    return op._cache["adjugate"]


def _blocks(tl, tr, bl, br) -> np.ndarray:
    return np.block([[tl, tr], [bl, br]])


@dataclass(frozen=True, eq=False)
class BlockOperator4:
    """``[[L, m I], [m I, Adj L]]`` acting on 4-columns of scalar fields."""

    L: RawOperator
    adj_L: RawOperator
    m: float

    def full_symbol(self, x, p) -> np.ndarray:
        mass = self.m * EYE2
        return _blocks(full_symbol(self.L, x, p), mass, mass, full_symbol(self.adj_L, x, p))

    def rescaled_full_symbol(self, x, p) -> np.ndarray:
        """Full symbol of ``rho^{1/2} D rho^{-1/2}``."""
        grad = self.L.log_rho_gradient_at(x)
        shift = [
            -0.5 * np.einsum("a,aij->ij", grad, np.stack([q.at(x) for q in block.P]))
            for block in (self.L, self.adj_L)
        ]
        sym = self.full_symbol(x, p)
        sym[:2, :2] += shift[0]
        sym[2:, 2:] += shift[1]
        return sym

    def apply_jet(self, value: np.ndarray, dv: np.ndarray, x) -> np.ndarray:
        top = apply_jet(self.L, value[:2], dv[:, :2], x) + self.m * value[2:]
        bottom = apply_jet(self.adj_L, value[2:], dv[:, 2:], x) + self.m * value[:2]
        return np.concatenate([top, bottom])

    def apply(self, v: Sequence, x) -> np.ndarray:
        value, dv = _vector_jet(v)(x)
        return self.apply_jet(value, dv, x)


def assemble_dirac(op: RawOperator, m: float) -> BlockOperator4:
    if m < 0:
        raise OperatorError(f"mass must be non-negative, got {m}")
    return BlockOperator4(op, adjugate_operator(op), float(m))


# spin connection and the traditional operator


@dataclass(frozen=True)
class SpinConnectionTerm:
    """``omega[a]`` and ``omega_tilde[a]``, so that ``nabla_a = d_a + omega[a]``."""

    omega: np.ndarray
    omega_tilde: np.ndarray


def _covariant_sigma(sig, dsig, christoffel) -> np.ndarray:
    # cov[a, b] = (sigma^b)_{x^a} + Gamma^b_{ac} sigma^c
    return dsig + np.einsum("bac,cij->abij", christoffel, sig)


def _spin_connection(sig, dsig, g_cov, christoffel) -> SpinConnectionTerm:
    tilde, dtilde = adj(sig), adj(dsig)
    omega = -0.25 * np.einsum("bij,abjk->aik", lower_index(g_cov, tilde), _covariant_sigma(sig, dsig, christoffel))
    omega_tilde = -0.25 * np.einsum(
        "bij,abjk->aik", lower_index(g_cov, sig), _covariant_sigma(tilde, dtilde, christoffel)
    )
    return SpinConnectionTerm(omega, omega_tilde)


def spin_connection_at(sigma, x, snap: GeometrySnapshot | None = None) -> SpinConnectionTerm:
    snap = geometry_at(sigma, x) if snap is None else snap
    return _spin_connection(snap.sigma, snap.dsigma, snap.g_cov, snap.christoffel)


def spin_connection_fd(sigma, x) -> SpinConnectionTerm:
    """Same coefficients with every derivative taken by finite differences."""
    sig = sigma_matrices(sigma, x)
    return _spin_connection(sig, sigma_jet_fd(sigma, x), metric_at(sig).g_cov, christoffel_fd(sigma, x))


def epsilon_relation_residual(term: SpinConnectionTerm) -> float:
    """``omega_tilde = eps conj(omega) eps^-1`` (conjugating the undotted derivative)."""
    eps = METRIC_SPINOR
    mapped = np.einsum("ij,ajk,kl->ail", eps, term.omega.conj(), np.linalg.inv(eps))
    return max_norm(mapped - term.omega_tilde)


def dlndet_fd(sigma, x) -> np.ndarray:
    """Gradient of ``ln|det g_ab|`` by finite differences of the metric."""
    fn = lambda y: np.log(abs(np.linalg.det(metric_at(sigma, y).g_cov)))  # noqa: E731
    return np.array([richardson_central(fn, x, a) for a in range(4)])


@dataclass(frozen=True)
class TraditionalPieces:
    sig: np.ndarray
    connection: SpinConnectionTerm
    dlndet: np.ndarray


def traditional_pieces(sigma, x, derivatives: str = "symbolic") -> TraditionalPieces:
    if derivatives == "symbolic":
        snap = geometry_at(sigma, x)
        return TraditionalPieces(snap.sigma, spin_connection_at(sigma, x, snap), snap.dlndet_g)
    if derivatives == "fd":
        return TraditionalPieces(sigma_matrices(sigma, x), spin_connection_fd(sigma, x), dlndet_fd(sigma, x))
    raise ValueError(f"unknown derivative route {derivatives!r}")


def traditional_blocks(pieces: TraditionalPieces, A, conjugated: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Zeroth-order parts of the two diagonal blocks of the traditional operator.

    With ``conjugated`` the blocks are those of ``|det g|^{1/4} D |det g|^{-1/4}``.
    """
    A = np.asarray(A, dtype=float)
    out = []
    for s, w in ((pieces.sig, pieces.connection.omega), (adj(pieces.sig), pieces.connection.omega_tilde)):
        block = -1j * np.einsum("aij,ajk->ik", s, w) + np.einsum("a,aij->ij", A, s)
        if conjugated:
            block = block + 0.25j * np.einsum("a,aij->ij", pieces.dlndet, s)
        out.append(block)
    return out[0], out[1]


def traditional_dirac_full_symbol(
    sigma, A, m: float, x, p, conjugated: bool = True, derivatives: str = "symbolic"
) -> np.ndarray:
    pieces = traditional_pieces(sigma, x, derivatives)
    top, bottom = traditional_blocks(pieces, A, conjugated)
    p = np.asarray(p, dtype=float)
    mass = m * EYE2
    return _blocks(
        np.einsum("a,aij->ij", p, pieces.sig) + top,
        mass,
        mass,
        np.einsum("a,aij->ij", p, adj(pieces.sig)) + bottom,
    )


# main identity


class MainIdentityPoint:
    """Both sides of the rescaled identity at one ``x``, reusable for many (p, m)."""

    def __init__(self, op: RawOperator, x, A=None):
        self.x = np.asarray(x, dtype=float)
        self.A = extract_A_at(op, x).A if A is None else np.asarray(A, dtype=float)
        self.lhs = assemble_dirac(op, 0.0).rescaled_full_symbol(self.x, np.zeros(4))
        self.sigma_L = np.stack([1j * q.at(x) for q in op.P])
        self.sigma_adj = np.stack([1j * q.at(x) for q in adjugate_operator(op).P])
        pieces = traditional_pieces(op.sigma_fields, x)
        self.sig = pieces.sig
        top, bottom = traditional_blocks(pieces, self.A)
        self.rhs = _blocks(top, 0 * EYE2, 0 * EYE2, bottom)

    def residual(self, p, m: float = 0.0) -> float:
        p = np.asarray(p, dtype=float)
        lhs = self.lhs.copy()
        lhs[:2, :2] += np.einsum("a,aij->ij", p, self.sigma_L)
        lhs[2:, 2:] += np.einsum("a,aij->ij", p, self.sigma_adj)
        rhs = self.rhs.copy()
        rhs[:2, :2] += np.einsum("a,aij->ij", p, self.sig)
        rhs[2:, 2:] += np.einsum("a,aij->ij", p, adj(self.sig))
        for block in (lhs, rhs):
            block[:2, 2:] += m * EYE2
            block[2:, :2] += m * EYE2
        return max_norm(lhs - rhs)


def main_identity_residual(op: RawOperator, m: float, x, p, A=None) -> float:
    """Symbol-level gap between ``rho^{1/2} D rho^{-1/2}`` and the rescaled traditional operator."""
    return MainIdentityPoint(op, x, A).residual(p, m)


def contraction_identity_residual(sigma, x, tilde: bool = False, snap: GeometrySnapshot | None = None) -> float:
    """``(s^a)_c s~_a s^c - s^c s~_a (s^a)_c + 2(2 I delta + s^a s~_b)(cov)`` in any coordinates."""
    snap = geometry_at(sigma, x) if snap is None else snap
    sig, dsig = snap.sigma, snap.dsigma
    if tilde:
        sig, dsig = adj(sig), adj(dsig)
    low = lower_index(snap.g_cov, adj(sig))
    lhs = np.einsum("caij,ajk,ckl->il", dsig, low, sig) - np.einsum("cij,ajk,cakl->il", sig, low, dsig)
    cov = _covariant_sigma(sig, dsig, snap.christoffel)
    rhs = -4 * np.einsum("aaij->ij", cov) - 2 * np.einsum("aij,bjk,abkl->il", sig, low, cov)
    return max_norm(lhs - rhs)


# interface names matching the verification suites ``theorem1`` and ``appendixE``
theorem1_residual = main_identity_residual
appendixE_residual = contraction_identity_residual


DEFAULT_BISPINOR = ("1 + 0.3*x1", "0.2*i*x2 - 0.1*x3^2", "cos(x4)", "0.5 - 0.1*i*x1*x3")


def bispinor_factor_expr(op: RawOperator) -> E.Expr:
    """``|det g|^{1/4} rho^{-1/2}`` with ``|det g|^{1/4} = |det e|^{-1/2}``."""
    det = frame_determinant_expr(op.sigma_fields)
    root = E.sqrt(E.sqrt(E.mul(det, det)))
    return E.div(E.ONE, E.mul(root, E.sqrt(op.rho)))


class BispinorCheck:
    """Applied-operator form of the main identity for one test bispinor ``psi``."""

    def __init__(self, op: RawOperator, psi: Sequence = DEFAULT_BISPINOR, A=None):
        self.op = op
        self.A = A
        psi = [parse_scalar_expr(s) if isinstance(s, str) else E.as_expr(s) for s in psi]
        if len(psi) != 4:
            raise ValueError("a bispinor has four components")
        factor = bispinor_factor_expr(op)
        self._factor = compile_exprs([factor])
        self._v_jet = _vector_jet([E.mul(factor, c) for c in psi])
        self._psi_jet = _vector_jet(psi)
        self._dirac = assemble_dirac(op, 0.0)

    def residual(self, x, m: float = 0.0) -> float:
        x = np.asarray(x, dtype=float)
        value, dv = self._v_jet(x)
        lhs = self._dirac.apply_jet(value, dv, x) + m * np.concatenate([value[2:], value[:2]])
        A = extract_A_at(self.op, x).A if self.A is None else np.asarray(self.A, dtype=float)
        snap = geometry_at(self.op.sigma_fields, x)
        conn = spin_connection_at(None, x, snap)
        psi, dpsi = self._psi_jet(x)
        xi, eta = psi[:2], psi[2:]
        nabla_xi = dpsi[:, :2] + np.einsum("aij,j->ai", conn.omega, xi)
        nabla_eta = dpsi[:, 2:] + np.einsum("aij,j->ai", conn.omega_tilde, eta)
        top = np.einsum("aij,aj->i", snap.sigma, -1j * nabla_xi + np.outer(A, xi)) + m * eta
        bottom = np.einsum("aij,aj->i", adj(snap.sigma), -1j * nabla_eta + np.outer(A, eta)) + m * xi
        rhs = self._factor(x)[0] * np.concatenate([top, bottom])
        return max_norm(lhs - rhs)


def bispinor_check(op: RawOperator, m: float, x, psi: Sequence = DEFAULT_BISPINOR, A=None) -> float:
    return BispinorCheck(op, psi, A).residual(x, m)


def bispinor_factor_at(op: RawOperator, x) -> float:
    value = compile_exprs([bispinor_factor_expr(op)])(x)[0]
    return float(value.real)


# adjugation and Lorentz invariance


def adjugate_symbol_gap(op: RawOperator, x) -> float:
    """``sym(Adj L) - adj sym(L) = 2 f(adj sigma)``; returns the deviation from that."""
    p = np.zeros(4)
    gap = full_symbol(adjugate_operator(op), x, p) - adj(full_symbol(op, x, p))
    tilde = tuple(s.adj() for s in op.sigma_fields)
    return max_norm(gap - 2 * f_at(tilde, x))


def involution_residual(op: RawOperator, x) -> float:
    twice = adjugate_operator(adjugate_operator(op))
    a = np.stack([q.at(x) for q in op.P] + [op.Q.at(x)])
    b = np.stack([q.at(x) for q in twice.P] + [twice.Q.at(x)])
    return max_norm(a - b)


def adjugation_pair(op: RawOperator, G: GaugeField) -> tuple[RawOperator, RawOperator]:
    """``Adj(G* L G)`` and the transformed ``Adj L`` predicted for it."""
    left = adjugate_operator(gl_transform(op, G))
    if G.kind in ("psi", "phi"):
        right = gl_transform(adjugate_operator(op), G)
    elif G.kind == "sl2c":
        right = gl_transform(adjugate_operator(op), G.field.adj().dagger())
    else:
        raise OperatorError("operator adjugation has no law for a general GL(2,C) field")
    return left, right


def symbol_residual(a: RawOperator, b: RawOperator, x, p) -> float:
    return max_norm(full_symbol(a, x, p) - full_symbol(b, x, p))


def lorentz_residual_at(op: RawOperator, R: GaugeField, m: float, x, p, pair=None) -> float:
    """``S* D S`` against ``D(R* L R)`` blockwise, where ``S = diag(R, (R^-1)*)``."""
    transformed, conj_adj = lorentz_pair(op, R) if pair is None else pair
    r = R.field.at(x)
    rinv_star = dagger(adj(r))
    lhs = _blocks(
        full_symbol(transformed, x, p),
        m * dagger(r) @ rinv_star,
        m * dagger(rinv_star) @ r,
        full_symbol(conj_adj, x, p),
    )
    rhs = assemble_dirac(transformed, m).full_symbol(x, p)
    return max_norm(lhs - rhs)


def lorentz_pair(op: RawOperator, R: GaugeField) -> tuple[RawOperator, RawOperator]:
    if R.kind != "sl2c":
        raise OperatorError("Lorentz invariance needs an SL(2,C) field")
    return gl_transform(op, R), gl_transform(adjugate_operator(op), R.field.adj().dagger())


def adjugation_properties(op: RawOperator, G: GaugeField | None, box, p_per_x: int = 5) -> dict:
    """Sampled residuals of the adjugation laws; keys name the individual identities."""
    trackers = {name: ResidualTracker() for name in ("involution", "f_anticommutation", "symbol_gap")}
    pair = None
    if G is not None and G.kind != "gl2c":
        pair = adjugation_pair(op, G)
        trackers["gauge_" + G.kind] = ResidualTracker()
    tilde = tuple(s.adj() for s in op.sigma_fields)
    rng = box.rng(stream=31)
    for x in box.points(stream=31):
        trackers["involution"].add(involution_residual(op, x), x)
        trackers["f_anticommutation"].add(f_anticommutation_residual(op.sigma_fields, x, tilde), x)
        trackers["symbol_gap"].add(adjugate_symbol_gap(op, x), x)
        if pair is not None:
            for _ in range(p_per_x):
                p = rng.normal(size=4)
                trackers["gauge_" + G.kind].add(symbol_residual(*pair, x, p), x, p)
        for t in trackers.values():
            t.count()
    return {name: CheckReport.from_tracker(name, t, 1e-7) for name, t in trackers.items()}
