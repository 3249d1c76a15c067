"""Gauge transformations, the correction map f, and the potential A.

f maps Pauli matrix fields to a Hermitian matrix field.  Three routes exist:

* :func:`f_at` evaluates the reduced Pauli-matrix form at a point (primary);
* :func:`f_field` builds the same expression symbolically, which is what
  :func:`~opgeom.operator_core.reconstruct` needs to write down ``Q``;
* :func:`f_from_bracket` contracts the p-Hessian of the three-slot Poisson
  bracket with the metric and serves as the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .checks import CheckReport, ResidualTracker
from .fieldlang import ChartBox, MatrixField2, parse_scalar_expr
from .fieldlang import expr as E
from .fieldlang.expr import Expr, as_expr
from .geometry import (
    adj,
    basis_coefficients,
    dagger,
    frame_at,
    frame_from_matrices,
    lower_index,
    lowered_adjugate_fields,
    max_norm,
    metric_at,
    MINKOWSKI,
    sigma_jet,
    sigma_jet_fd,
    sigma_matrices,
)
from .operator_core import RawOperator, formal_adjoint, subprincipal_symbol

KINDS = ("psi", "phi", "sl2c", "gl2c")
TOL_SL2C = 1e-10


class GaugeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaugeField:
    """``psi``/``phi`` carry a real scalar, ``sl2c``/``gl2c`` a matrix field."""

    kind: str
    data: Union[Expr, MatrixField2]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GaugeError(f"unknown gauge kind {self.kind!r}")
        scalar = self.kind in ("psi", "phi")
        if scalar and isinstance(self.data, str):
            object.__setattr__(self, "data", parse_scalar_expr(self.data))
        elif not scalar and not isinstance(self.data, MatrixField2):
            object.__setattr__(self, "data", MatrixField2.from_rows(self.data))
        if scalar:
            object.__setattr__(self, "data", as_expr(self.data))

    @classmethod
    def psi(cls, expr) -> "GaugeField":
        return cls("psi", expr)

    @classmethod
    def phi(cls, expr) -> "GaugeField":
        return cls("phi", expr)

    @classmethod
    def sl2c(cls, rows) -> "GaugeField":
        return cls("sl2c", rows)

    @classmethod
    def gl2c(cls, rows) -> "GaugeField":
        return cls("gl2c", rows)

    @cached_property
    def field(self) -> MatrixField2:
        """The matrix function the operator is conjugated with."""
        if self.kind == "psi":
            return MatrixField2.scalar(E.exp(self.data))
        if self.kind == "phi":
            return MatrixField2.scalar(E.exp(E.mul(E.I, self.data)))
        return self.data

    def validate(self, box: ChartBox, n: int | None = None) -> None:
        for x in box.points(n, stream=996, margin=0.0):
            where = [round(float(c), 6) for c in x]
            if self.kind in ("psi", "phi"):
                value = MatrixField2.scalar(self.data).at(x)[0, 0]
                if abs(value.imag) > TOL_SL2C:
                    raise GaugeError(f"{self.kind} must be real-valued, got {value:.6g} at x = {where}")
            else:
                det = np.linalg.det(self.data.at(x))
                if self.kind == "sl2c" and abs(det - 1) > TOL_SL2C:
                    raise GaugeError(f"det R = {det:.6g}, expected 1, at x = {where}")
                if self.kind == "gl2c" and abs(det) < TOL_SL2C:
                    raise GaugeError(f"det Q vanishes at x = {where}")


def _as_field(G) -> MatrixField2:
    return G.field if isinstance(G, GaugeField) else G


def gl_transform(op: RawOperator, G) -> RawOperator:
    """The operator ``G* L G`` in coefficient form (product rule on ``G``)."""
    g = _as_field(G)
    gd = g.dagger()
    P = tuple(gd @ p @ g for p in op.P)
    inner = op.Q @ g
    for a, p in enumerate(op.P):
        inner = inner + p @ g.partial(a)
    return RawOperator(P, gd @ inner, op.rho)


def conjugate_sigma(sigma: Sequence[MatrixField2], G) -> tuple[MatrixField2, ...]:
    """Pauli fields of ``G* L G``: ``G* sigma G``."""
    g = _as_field(G)
    gd = g.dagger()
    return tuple(gd @ s @ g for s in sigma)


def inverse_sl2c(R) -> MatrixField2:
    """``R^-1 = adj R`` for determinant-one fields."""
    return _as_field(R).adj()


# the map f


def f_from_matrices(sig: np.ndarray, dsig: np.ndarray, g_cov: np.ndarray) -> np.ndarray:
    """Reduced form ``-(i/8) [(d_c s^a) s~_a s^c - s^c s~_a (d_c s^a)]``."""
    low = lower_index(g_cov, adj(sig))
    first = np.einsum("caij,ajk,ckl->il", dsig, low, sig)
    second = np.einsum("cij,ajk,cakl->il", sig, low, dsig)
    return -0.125j * (first - second)


def f_at(sigma: Sequence[MatrixField2], x) -> np.ndarray:
    sig, dsig = sigma_jet(sigma, x)
    g_cov = frame_at(sig).metric_cov()
    return f_from_matrices(sig, dsig, g_cov)


def f_field(sigma: Sequence[MatrixField2]) -> MatrixField2:
    """Symbolic version of :func:`f_at`, suitable as an operator coefficient."""
    sigma = tuple(sigma)
    low = lowered_adjugate_fields(sigma)
    total = MatrixField2.zero()
    for c in range(4):
        for a in range(4):
            d = sigma[a].partial(c)
            if d.is_constant and all(v.value == 0 for v in d.entries):
                continue
            total = total + (d @ low[a] @ sigma[c]) - (sigma[c] @ low[a] @ d)
    return total.scale(E.const(-0.125j))


def _bracket_pieces(F, G, H, x, derivatives):
    if derivatives == "symbolic":
        f, df = sigma_jet(F, x)
        h, dh = sigma_jet(H, x)
    elif derivatives == "fd":
        f, h = sigma_matrices(F, x), sigma_matrices(H, x)
        df, dh = sigma_jet_fd(F, x), sigma_jet_fd(H, x)
    else:
        raise ValueError(f"unknown derivative route {derivatives!r}")
    return f, df, sigma_matrices(G, x), h, dh


def poisson3(F, G, H, x, p, derivatives: str = "symbolic") -> np.ndarray:
    """``{F, G, H} = F_{x^c} G H_{p_c} - F_{p_c} G H_{x^c}`` for symbols linear in p.

    Each argument is four matrix fields, the coefficients of ``p_a``.
    """
    p = np.asarray(p, dtype=float)
    f, df, g, h, dh = _bracket_pieces(F, G, H, x, derivatives)
    fx = np.einsum("a,caij->cij", p, df)
    hx = np.einsum("a,caij->cij", p, dh)
    gp = np.einsum("a,aij->ij", p, g)
    return np.einsum("cij,jk,ckl->il", fx, gp, h) - np.einsum("cij,jk,ckl->il", f, gp, hx)


def bracket_p_hessian(F, G, H, x, derivatives: str = "symbolic") -> np.ndarray:
    """Exact ``d^2/dp_m dp_n {F, G, H}`` by enumerating which slot carries p.

    The bracket is ``p_a p_b M[a, b]`` with
    ``M[a, b] = sum_c (d_c F^a) G^b H^c - F^c G^b (d_c H^a)``.
    """
    f, df, g, h, dh = _bracket_pieces(F, G, H, x, derivatives)
    M = np.einsum("caij,bjk,ckl->abil", df, g, h) - np.einsum("cij,bjk,cakl->abil", f, g, dh)
    return M + np.swapaxes(M, 0, 1)


def f_from_bracket(sigma: Sequence[MatrixField2], x, derivatives: str = "fd", p_route: str = "exact") -> np.ndarray:
    """``-(i/16) g_ab {prin, adj prin, prin}_{p_a p_b}`` in raw bracket form.

    ``p_route='exact'`` enumerates slot assignments; ``'difference'`` takes
    second differences of :func:`poisson3` with unit steps, which is exact for
    a quadratic up to rounding.
    """
    sigma = tuple(sigma)
    tilde = tuple(s.adj() for s in sigma)
    g_cov = metric_at(sigma, x).g_cov
    if p_route == "exact":
        hess = bracket_p_hessian(sigma, tilde, sigma, x, derivatives)
    elif p_route == "difference":
        eye = np.eye(4)
        hess = np.zeros((4, 4, 2, 2), dtype=complex)
        for m in range(4):
            for n in range(4):
                val = lambda q: poisson3(sigma, tilde, sigma, x, q, derivatives)  # noqa: E731
                hess[m, n] = (
                    val(eye[m] + eye[n]) - val(eye[m] - eye[n]) - val(-eye[m] + eye[n]) + val(-eye[m] - eye[n])
                ) / 4
    else:
        raise ValueError(f"unknown p route {p_route!r}")
    return -1j / 16 * np.einsum("ab,abij->ij", g_cov, hess)


# covariant subprincipal symbol and potential


def csub_field(op: RawOperator) -> MatrixField2:
    if "csub" not in op._cache:
        op._cache["csub"] = op.subprincipal_field - f_field(op.sigma_fields)
    return op._cache["csub"]


def csub_at(op: RawOperator, x) -> np.ndarray:
    return subprincipal_symbol(op, x) - f_at(op.sigma_fields, x)


@dataclass(frozen=True)
class PotentialA:
    A: np.ndarray
    residual: float


def potential_from_matrices(sig: np.ndarray, csub: np.ndarray) -> PotentialA:
    frame = frame_from_matrices(sig).e
    coeffs = basis_coefficients(csub)
    A = np.linalg.solve(frame, coeffs.real)
    return PotentialA(A=A, residual=max_norm(np.einsum("a,aij->ij", A, sig) - csub))


def extract_A_at(op: RawOperator, x) -> PotentialA:
    """Real covector with ``csub = sigma^a A_a``."""
    sig = sigma_matrices(op.sigma_fields, x)
    frame_at(sig)
    return potential_from_matrices(sig, csub_at(op, x))


def potential_field(op: RawOperator, x) -> np.ndarray:
    return extract_A_at(op, x).A


# residuals of individual laws at a point


def subprincipal_law_residual(op: RawOperator, transformed: RawOperator, G, x) -> float:
    """GL(2,C) law for the subprincipal symbol, using the operator's own sigma."""
    g, dg = _as_field(G).jet(x)
    sig = sigma_matrices(op.sigma_fields, x)
    gd, dgd = dagger(g), dagger(dg)
    expected = gd @ subprincipal_symbol(op, x) @ g + 0.5j * (
        np.einsum("aij,ajk,kl->il", dgd, sig, g) - np.einsum("ij,ajk,akl->il", gd, sig, dg)
    )
    return max_norm(subprincipal_symbol(transformed, x) - expected)


def f_condition_residual(sigma, R, x, conjugated=None) -> float:
    """``f(R* s R) - [R* f(s) R + (i/2)(R*_a s^a R - R* s^a R_a)]``."""
    conjugated = conjugate_sigma(sigma, R) if conjugated is None else conjugated
    r, dr = _as_field(R).jet(x)
    sig = sigma_matrices(sigma, x)
    rd, drd = dagger(r), dagger(dr)
    expected = rd @ f_at(sigma, x) @ r + 0.5j * (
        np.einsum("aij,ajk,kl->il", drd, sig, r) - np.einsum("ij,ajk,akl->il", rd, sig, dr)
    )
    return max_norm(f_at(conjugated, x) - expected)


def f_condition_pieces(sigma, R, x) -> dict:
    """The matrix that must vanish for f to satisfy the SL(2,C) condition.

    Returns norms of ``Q``, ``Q + Q*`` and of the trace-free sandwich
    ``s^a (R_c R^-1) s~_a`` (all zero in exact arithmetic).
    """
    sig = sigma_matrices(sigma, x)
    g_cov = metric_at(sig).g_cov
    low_tilde = lower_index(g_cov, adj(sig))
    r, dr = _as_field(R).jet(x)
    rinv = adj(r) / np.linalg.det(r)
    rd = dagger(r)
    first = np.einsum("ij,ajk,ckl,lm,amn,cnp,pq->iq", rd, sig, dr, rinv, low_tilde, sig, r)
    second = np.einsum("ij,cjk,akl,alm,cmn->in", rd, sig, low_tilde, sig, dr)
    Q = -0.125j * (first - second) + 0.5j * np.einsum("ij,ajk,akl->il", rd, sig, dr)
    sandwich = np.einsum("aij,cjk,kl,alm->cim", sig, dr, rinv, low_tilde)
    return {
        "Q": max_norm(Q),
        "Q+Q*": max_norm(Q + dagger(Q)),
        "sandwich": max_norm(sandwich),
    }


def f_homogeneity_residual(sigma, psi: Expr, x, scaled=None) -> float:
    """``f(e^{2 psi} s) - e^{2 psi} f(s)``."""
    factor = E.exp(E.mul(E.const(2), as_expr(psi)))
    scaled = tuple(s.scale(factor) for s in sigma) if scaled is None else scaled
    weight = MatrixField2.scalar(factor).at(x)[0, 0]
    return max_norm(f_at(scaled, x) - weight * f_at(sigma, x))


def f_anticommutation_residual(sigma, x, tilde=None) -> float:
    """``adj f(s) + f(adj s)``."""
    tilde = tuple(s.adj() for s in sigma) if tilde is None else tilde
    return max_norm(adj(f_at(sigma, x)) + f_at(tilde, x))


def f_hermiticity_residual(sigma, x) -> float:
    f = f_at(sigma, x)
    return max_norm(f - dagger(f))


def csub_law_residual(op: RawOperator, transformed: RawOperator, G: GaugeField, x) -> float:
    before = csub_at(op, x)
    after = csub_at(transformed, x)
    if G.kind == "psi":
        weight = np.exp(2 * MatrixField2.scalar(G.data).at(x)[0, 0])
        return max_norm(after - weight * before)
    if G.kind == "phi":
        grad = MatrixField2.scalar(G.data).jet(x)[1][:, 0, 0]
        sig = sigma_matrices(op.sigma_fields, x)
        return max_norm(after - before - np.einsum("a,aij->ij", grad, sig))
    if G.kind == "sl2c":
        r = G.data.at(x)
        return max_norm(after - dagger(r) @ before @ r)
    raise GaugeError("no covariant-subprincipal law for a general GL(2,C) field")


def potential_law_residual(op: RawOperator, transformed: RawOperator, G: GaugeField, x) -> float:
    """A shifts by grad phi under phase conjugation, is unchanged otherwise."""
    before = extract_A_at(op, x)
    after = extract_A_at(transformed, x)
    expected = before.A
    if G.kind == "phi":
        expected = expected + MatrixField2.scalar(G.data).jet(x)[1][:, 0, 0].real
    elif G.kind == "gl2c":
        raise GaugeError("A has no prescribed law under a general GL(2,C) field")
    return max(max_norm(after.A - expected), before.residual, after.residual)


def lorentz_matrix(R, sigma, x, adjugation: bool = False) -> tuple[np.ndarray, float]:
    """``Lambda`` with ``frame(R* s R) = Lambda frame(s)`` (or of ``adj s``), and its det."""
    sig = sigma_matrices(sigma, x)
    if adjugation:
        new = adj(sig)
    else:
        r = _as_field(R).at(x)
        new = np.einsum("ij,ajk,kl->ail", dagger(r), sig, r)
    e = frame_at(sig).e
    lam = frame_from_matrices(new).e @ np.linalg.inv(e)
    return lam, float(np.linalg.det(lam))


def lorentz_residual(lam: np.ndarray, det_expected: float) -> float:
    return max(max_norm(lam.T @ MINKOWSKI @ lam - MINKOWSKI), abs(np.linalg.det(lam) - det_expected))


def covariance_residuals(op: RawOperator, G: GaugeField, box: ChartBox) -> dict[str, CheckReport]:
    """Sampled residuals of every law that applies to the gauge kind of ``G``."""
    transformed = gl_transform(op, G)
    sigma = op.sigma_fields
    trackers: dict[str, ResidualTracker] = {"subprincipal_law": ResidualTracker()}
    if G.kind in ("psi", "phi", "sl2c"):
        trackers["csub_law"] = ResidualTracker()
        trackers["potential_law"] = ResidualTracker()
    if G.kind == "sl2c":
        conjugated = conjugate_sigma(sigma, G)
        for name in ("f_condition", "sl2c_Q", "sl2c_Q+Q*", "sl2c_sandwich"):
            trackers[name] = ResidualTracker()
    if G.kind == "psi":
        scaled = transformed.sigma_fields
        trackers["f_homogeneity"] = ResidualTracker()
    for x in box.points(stream=21):
        trackers["subprincipal_law"].add(subprincipal_law_residual(op, transformed, G, x), x)
        if "csub_law" in trackers:
            trackers["csub_law"].add(csub_law_residual(op, transformed, G, x), x)
            trackers["potential_law"].add(potential_law_residual(op, transformed, G, x), x)
        if G.kind == "sl2c":
            trackers["f_condition"].add(f_condition_residual(sigma, G, x, conjugated), x)
            for key, value in f_condition_pieces(sigma, G, x).items():
                trackers["sl2c_" + key].add(value, x)
        if G.kind == "psi":
            trackers["f_homogeneity"].add(f_homogeneity_residual(sigma, G.data, x, scaled), x)
        for t in trackers.values():
            t.count()
    tolerances = {"f_homogeneity": 1e-9}
    return {
        name: CheckReport.from_tracker(name, t, tolerances.get(name, 1e-7)) for name, t in trackers.items()
    }


def double_adjoint_residual(op: RawOperator, x) -> float:
    twice = formal_adjoint(formal_adjoint(op))
    a = np.stack([p.at(x) for p in op.P] + [op.Q.at(x)])
    b = np.stack([p.at(x) for p in twice.P] + [twice.Q.at(x)])
    return max_norm(a - b)
