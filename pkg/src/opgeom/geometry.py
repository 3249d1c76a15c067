"""Frame, Lorentzian metric and Pauli-matrix structure of a principal symbol.

The principal symbol is given by its Pauli matrices ``sigma[alpha]``, the
coefficients of ``p_alpha``.  Functions accept either a sequence of four
:class:`MatrixField2` (evaluated at ``x``) or an array of shape ``(4, 2, 2)``
holding the matrices at a point.

Index conventions: ``frame[j, alpha]`` is component alpha of frame vector j;
``christoffel[b, a, c]`` is the symbol with upper index b.  The signature is
(+, +, +, -).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fieldlang import MatrixField2
from .fieldlang import expr as E
from .fieldlang.calculus import richardson_central

STANDARD_BASIS = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
        [[1, 0], [0, 1]],
    ],
    dtype=complex,
)
MINKOWSKI = np.diag([1.0, 1.0, 1.0, -1.0])
METRIC_SPINOR = np.array([[0.0, -1.0], [1.0, 0.0]])

TOL_HERM = 1e-10
TOL_DEGENERATE = 1e-8
TOL_METRIC = 1e-10


class GeometryError(ValueError):
    pass


class DegenerateFrameError(GeometryError):
    pass


def adj(m: np.ndarray) -> np.ndarray:
    """Adjugate of 2x2 matrices over the last two axes."""
    m = np.asarray(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def max_norm(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def basis_coefficients(m: np.ndarray) -> np.ndarray:
    """Complex coefficients c_j with ``m = sum_j c_j s^j`` (last axis j)."""
    m = np.asarray(m)
    m11, m12, m21, m22 = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    return np.stack(
        [(m12 + m21) / 2, (m21 - m12) / 2j, (m11 - m22) / 2, (m11 + m22) / 2],
        axis=-1,
    )


def from_coefficients(c: np.ndarray) -> np.ndarray:
    return np.einsum("...j,jab->...ab", c, STANDARD_BASIS)


def sigma_matrices(sigma, x=None) -> np.ndarray:
    if isinstance(sigma, np.ndarray):
        return sigma.astype(complex, copy=False)
    if len(sigma) != 4:
        raise GeometryError("expected four Pauli matrices")
    if isinstance(sigma[0], MatrixField2):
        return np.stack([s.at(x) for s in sigma])
    return np.asarray(sigma, dtype=complex)


def sigma_jet(sigma: Sequence[MatrixField2], x) -> tuple[np.ndarray, np.ndarray]:
    """Pauli matrices at x and their exact derivatives ``d[gamma, alpha]``."""
    values, derivs = zip(*(s.jet(x) for s in sigma))
    return np.stack(values), np.stack(derivs, axis=1)


def sigma_jet_fd(sigma: Sequence[MatrixField2], x, h=None) -> np.ndarray:
    """Finite-difference oracle for the derivative part of :func:`sigma_jet`."""
    return np.stack([s.fd_partials(x, h) for s in sigma], axis=1)


def prin(sig: np.ndarray, p) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(p, dtype=float), sig)


def lower_index(g_cov: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """``out[a] = g_cov[a, b] mats[b]``; the single place indices are lowered."""
    return np.einsum("ab,b...->a...", g_cov, mats)


@dataclass(frozen=True)
class Frame:
    e: np.ndarray
    imag_residue: float

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.e))

    def metric_contra(self) -> np.ndarray:
        return self.e.T @ MINKOWSKI @ self.e

    def metric_cov(self) -> np.ndarray:
        """Inverse metric from the dual coframe, conditioned like ``e`` rather than ``e^T e``."""
        inv = np.linalg.inv(self.e)
        return inv @ MINKOWSKI @ inv.T

    def lowered_pauli(self) -> np.ndarray:
        """``sigma_a = g_ab sigma^b`` formed directly as ``(e^-1)[a, j] eta_jk s^k``."""
        return np.einsum("aj,jk,krc->arc", np.linalg.inv(self.e), MINKOWSKI, STANDARD_BASIS)


def frame_from_matrices(sig: np.ndarray) -> Frame:
    coeffs = basis_coefficients(sig)  # [alpha, j]
    return Frame(e=np.ascontiguousarray(coeffs.real.T), imag_residue=max_norm(coeffs.imag))


def frame_at(sigma, x=None, tol_herm: float = TOL_HERM, tol_degenerate: float = TOL_DEGENERATE) -> Frame:
    """Frame ``e[j, alpha]`` with ``sigma[alpha] = sum_j s^j e[j, alpha]``."""
    frame = frame_from_matrices(sigma_matrices(sigma, x))
    if frame.imag_residue > tol_herm:
        raise GeometryError(f"Pauli matrices not Hermitian (residue {frame.imag_residue:.3e})")
    if abs(frame.det) < tol_degenerate:
        raise DegenerateFrameError(f"degenerate frame, |det e| = {abs(frame.det):.3e}")
    return frame


@dataclass(frozen=True)
class MetricPair:
    g_contra: np.ndarray
    g_cov: np.ndarray
    path_residual: float
    signature: tuple[int, int]

    @property
    def lorentzian(self) -> bool:
        return self.signature == (3, 1)


def metric_from_determinant(sig: np.ndarray) -> np.ndarray:
    """Solve ``det prin(p) = -g(p, p)`` from the 10 covectors e_a, e_a + e_b."""
    eye = np.eye(4)
    diag = np.array([-np.linalg.det(prin(sig, eye[a])).real for a in range(4)])
    g = np.diag(diag)
    for a in range(4):
        for b in range(a + 1, 4):
            q = -np.linalg.det(prin(sig, eye[a] + eye[b])).real
            g[a, b] = g[b, a] = (q - diag[a] - diag[b]) / 2
    return g


def signature(g: np.ndarray, tol: float = 1e-10) -> tuple[int, int]:
    w = np.linalg.eigvalsh(g)
    return int(np.sum(w > tol)), int(np.sum(w < -tol))


def metric_at(sigma, x=None) -> MetricPair:
    sig = sigma_matrices(sigma, x)
    frame = frame_at(sig)
    from_det = metric_from_determinant(sig)
    from_frame = frame.metric_contra()
    g_cov = frame.metric_cov()
    return MetricPair(
        g_contra=from_frame,
        g_cov=g_cov,
        path_residual=max_norm(from_det - from_frame),
        signature=signature(from_frame),
    )


def orthonormality_residual(frame: Frame, g_cov: np.ndarray) -> float:
    return max_norm(frame.e @ g_cov @ frame.e.T - MINKOWSKI)


@dataclass(frozen=True)
class GeometrySnapshot:
    """Everything the identity checks need at one point."""

    x: np.ndarray
    sigma: np.ndarray  # [alpha]
    dsigma: np.ndarray  # [gamma, alpha]
    frame: np.ndarray
    dframe: np.ndarray  # [gamma, j, alpha]
    g_contra: np.ndarray
    g_cov: np.ndarray
    dg_cov: np.ndarray  # [gamma, a, b]
    christoffel: np.ndarray  # [b, a, c]
    dlndet_g: np.ndarray  # gradient of ln|det g_cov|

    @property
    def sigma_tilde(self) -> np.ndarray:
        return adj(self.sigma)

    @property
    def dsigma_tilde(self) -> np.ndarray:
        return adj(self.dsigma)

    @property
    def sigma_lower(self) -> np.ndarray:
        return lower_index(self.g_cov, self.sigma)

    @property
    def sigma_tilde_lower(self) -> np.ndarray:
        return lower_index(self.g_cov, self.sigma_tilde)


def christoffel_from_metric(g_contra: np.ndarray, dg_cov: np.ndarray) -> np.ndarray:
    # dg_cov[a, c, d] = d_a g_cd
    second = np.einsum("cad->acd", dg_cov)  # d_c g_ad
    third = np.einsum("dac->acd", dg_cov)  # d_d g_ac
    return 0.5 * np.einsum("bd,acd->bac", g_contra, dg_cov + second - third)


def geometry_at(sigma: Sequence[MatrixField2], x) -> GeometrySnapshot:
    """Exact first-order geometry at ``x`` (derivatives via the symbolic path)."""
    x = np.asarray(x, dtype=float)
    sig, dsig = sigma_jet(sigma, x)
    frame = frame_at(sig).e
    dframe = np.swapaxes(basis_coefficients(dsig).real, -1, -2)  # [gamma, j, alpha]
    g_contra = frame.T @ MINKOWSKI @ frame
    inv_frame = np.linalg.inv(frame)
    g_cov = inv_frame @ MINKOWSKI @ inv_frame.T
    dg_contra = np.einsum("gja,jk,kb->gab", dframe, MINKOWSKI, frame)
    dg_contra = dg_contra + np.swapaxes(dg_contra, 1, 2)
    dg_cov = -np.einsum("ab,gbc,cd->gad", g_cov, dg_contra, g_cov)
    dlndet = -2 * np.einsum("aj,gja->g", inv_frame, dframe)
    return GeometrySnapshot(
        x=x,
        sigma=sig,
        dsigma=dsig,
        frame=frame,
        dframe=dframe,
        g_contra=g_contra,
        g_cov=g_cov,
        dg_cov=dg_cov,
        christoffel=christoffel_from_metric(g_contra, dg_cov),
        dlndet_g=dlndet,
    )


def christoffel_at(sigma: Sequence[MatrixField2], x) -> np.ndarray:
    return geometry_at(sigma, x).christoffel


def christoffel_fd(sigma: Sequence[MatrixField2], x, h=None) -> np.ndarray:
    """Christoffel symbols from finite differences of the covariant metric."""
    dg = np.stack(
        [richardson_central(lambda y: metric_at(sigma, y).g_cov, x, a, h) for a in range(4)]
    )
    return christoffel_from_metric(metric_at(sigma, x).g_contra, dg)


def contraction_residual(snap: GeometrySnapshot) -> float:
    """|(ln|det g|)_a - 2 Gamma^b_{ab}|: frame route against Christoffel route."""
    return max_norm(snap.dlndet_g - 2 * np.einsum("bab->a", snap.christoffel))


def clifford_residual(sigma, x, p, q) -> float:
    sig = sigma_matrices(sigma, x)
    g = metric_from_determinant(sig)
    gpq = float(np.asarray(p) @ g @ np.asarray(q))
    a, b = prin(sig, p), prin(sig, q)
    target = -2 * gpq * np.eye(2)
    first = a @ adj(b) + b @ adj(a) - target
    second = adj(a) @ b + adj(b) @ a - target
    return max(max_norm(first), max_norm(second))


def pauli_sandwich_residuals(sigma, x, P) -> tuple[float, float]:
    sig = sigma_matrices(sigma, x)
    low = frame_at(sig).lowered_pauli()
    P = np.asarray(P, dtype=complex)
    trace_form = np.einsum("aij,jk,akl->il", low, P, adj(sig))
    adj_form = np.einsum("aij,jk,akl->il", low, P, sig)
    return (
        max_norm(trace_form + 2 * np.trace(P) * np.eye(2)),
        max_norm(adj_form - 2 * adj(P)),
    )


def adjugate_frame_relation(sigma, x=None) -> float:
    """Residual of: frame(adj sigma) is the spatial inversion of frame(sigma),
    and adj sigma equals the metric-spinor construction eps sigma^T eps^-1."""
    sig = sigma_matrices(sigma, x)
    inversion = np.diag([-1.0, -1.0, -1.0, 1.0])
    e = frame_from_matrices(sig).e
    e_tilde = frame_from_matrices(adj(sig)).e
    eps_inv = np.linalg.inv(METRIC_SPINOR)
    spinor_form = np.einsum("ij,akj,kl->ail", METRIC_SPINOR, sig, eps_inv)
    return max(max_norm(e_tilde - inversion @ e), max_norm(adj(sig) - spinor_form))


def random_pauli_matrices(rng: np.random.Generator, spread: float = 0.5, min_det: float = 0.1) -> np.ndarray:
    """Hermitian Pauli matrices of a random non-degenerate frame."""
    while True:
        e = np.eye(4) + spread * rng.normal(size=(4, 4))
        if abs(np.linalg.det(e)) >= min_det:
            return np.einsum("ja,jrc->arc", e, STANDARD_BASIS)


# symbolic counterparts used to build coefficient fields


def frame_exprs(sigma: Sequence[MatrixField2]) -> list[list[E.Expr]]:
    """Frame entries as expressions, ``out[j][alpha]``; assumes Hermitian input."""
    half = E.const(0.5)
    rows: list[list[E.Expr]] = [[], [], [], []]
    for s in sigma:
        m11, m12, m21, m22 = s.entries
        rows[0].append(E.mul(half, E.add(m12, m21)))
        rows[1].append(E.mul(E.const(-0.5j), E.sub(m21, m12)))
        rows[2].append(E.mul(half, E.sub(m11, m22)))
        rows[3].append(E.mul(half, E.add(m11, m22)))
    return rows


def _det3(m) -> E.Expr:
    (a, b, c), (d, e, f), (g, h, i) = m
    return E.add(
        E.sub(E.mul(a, E.sub(E.mul(e, i), E.mul(f, h))), E.mul(b, E.sub(E.mul(d, i), E.mul(f, g)))),
        E.mul(c, E.sub(E.mul(d, h), E.mul(e, g))),
    )


def det4_and_cofactors(m: list[list[E.Expr]]) -> tuple[E.Expr, list[list[E.Expr]]]:
    cof = [[E.ZERO] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            minor = [[m[i][j] for j in range(4) if j != c] for i in range(4) if i != r]
            term = _det3(minor)
            cof[r][c] = term if (r + c) % 2 == 0 else E.neg(term)
    det = E.ZERO
    for c in range(4):
        det = E.add(det, E.mul(m[0][c], cof[0][c]))
    return det, cof


def lowered_adjugate_fields(sigma: Sequence[MatrixField2]) -> list[MatrixField2]:
    """Symbolic ``g_ab adj(sigma^b)``.

    Orthonormality of the frame gives ``g_ab adj(sigma^b) = -s^k inv(e)[a, k]``,
    so only the frame inverse is needed.
    """
    e = frame_exprs(sigma)
    det, cof = det4_and_cofactors(e)
    out = []
    for a in range(4):
        inv = [E.div(cof[k][a], det) for k in range(4)]  # inv(e)[a, k]
        c1, c2, c3, c4 = inv
        out.append(
            MatrixField2(
                (
                    E.neg(E.add(c4, c3)),
                    E.neg(E.sub(c1, E.mul(E.I, c2))),
                    E.neg(E.add(c1, E.mul(E.I, c2))),
                    E.neg(E.sub(c4, c3)),
                )
            )
        )
    return out


def frame_determinant_expr(sigma: Sequence[MatrixField2]) -> E.Expr:
    return det4_and_cofactors(frame_exprs(sigma))[0]
