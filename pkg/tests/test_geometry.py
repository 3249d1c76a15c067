import numpy as np
import pytest

from opgeom.fieldlang import MatrixField2
from opgeom.geometry import (
    MINKOWSKI,
    STANDARD_BASIS,
    DegenerateFrameError,
    GeometryError,
    adj,
    adjugate_frame_relation,
    basis_coefficients,
    christoffel_at,
    christoffel_fd,
    clifford_residual,
    contraction_residual,
    frame_at,
    frame_determinant_expr,
    geometry_at,
    lowered_adjugate_fields,
    metric_at,
    metric_from_determinant,
    orthonormality_residual,
    pauli_sandwich_residuals,
    random_pauli_matrices,
    signature,
)
from opgeom.fieldlang import compile_exprs

from conftest import basis_fields, scaled_fields

X0 = np.array([0.2, -0.4, 0.6, 0.1])


def test_standard_basis_is_the_identity_frame():
    frame = frame_at(STANDARD_BASIS)
    assert np.array_equal(frame.e, np.eye(4))
    assert np.allclose(metric_at(STANDARD_BASIS).g_contra, MINKOWSKI)


def test_metric_from_determinant_is_polarisation_of_minus_det():
    # -det(sigma^a p_a) = g^{ab} p_a p_b for any p
    rng = np.random.default_rng(0)
    sig = random_pauli_matrices(rng)
    g = metric_from_determinant(sig)
    for _ in range(10):
        p = rng.normal(size=4)
        assert -np.linalg.det(np.einsum("a,aij->ij", p, sig)).real == pytest.approx(p @ g @ p)


def test_coefficients_of_hermitian_matrix_are_real():
    h = np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]])
    c = basis_coefficients(h)
    assert np.allclose(c.imag, 0)
    assert np.allclose(np.einsum("k,kij->ij", c.real, STANDARD_BASIS), h)


def test_non_hermitian_sigma_rejected():
    sig = STANDARD_BASIS.astype(complex).copy()
    sig[0, 0, 1] = 2.0
    with pytest.raises(GeometryError):
        frame_at(sig)


def test_degenerate_sigma_rejected():
    sig = STANDARD_BASIS.astype(complex).copy()
    sig[3] = sig[2]
    with pytest.raises(DegenerateFrameError):
        frame_at(sig)


def test_lorentzian_signature_on_random_symbols():
    rng = np.random.default_rng(1)
    for _ in range(200):
        sig = random_pauli_matrices(rng, spread=0.8)
        pair = metric_at(sig)
        assert pair.signature == (3, 1)
        assert pair.path_residual <= 1e-10
        assert orthonormality_residual(frame_at(sig), pair.g_cov) <= 1e-10


def test_signature_counts():
    assert signature(np.diag([1.0, 2.0, 3.0, -1.0])) == (3, 1)
    assert signature(np.diag([1.0, -2.0, 3.0, -1.0])) == (2, 2)


def test_clifford_identities_random():
    rng = np.random.default_rng(2)
    for _ in range(100):
        sig = random_pauli_matrices(rng)
        assert clifford_residual(sig, None, rng.normal(size=4), rng.normal(size=4)) <= 1e-12


def test_clifford_polarised_form_by_hand():
    # sigma^a adj(sigma^b) + sigma^b adj(sigma^a) = -2 g^{ab} I with standard basis g = diag(1,1,1,-1)
    s = STANDARD_BASIS
    for a in range(4):
        for b in range(4):
            lhs = s[a] @ adj(s[b]) + s[b] @ adj(s[a])
            assert np.allclose(lhs, -2 * MINKOWSKI[a, b] * np.eye(2))


def test_sandwich_identities_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        sig = random_pauli_matrices(rng)
        P = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r1, r2 = pauli_sandwich_residuals(sig, None, P)
        assert max(r1, r2) <= 1e-12


def test_adjugation_is_spatial_inversion_of_frame():
    rng = np.random.default_rng(4)
    for _ in range(20):
        assert adjugate_frame_relation(random_pauli_matrices(rng)) <= 1e-12


def test_christoffel_vanish_for_constant_frame():
    assert np.array_equal(christoffel_at(basis_fields(), X0), np.zeros((4, 4, 4)))


def test_christoffel_conformal_matches_closed_form():
    # sigma = e^{2 psi} s gives g^{ab} = e^{4 psi} eta, i.e. g_ab = e^{-4 psi} eta = e^{2u} eta, u = -2 psi
    # Gamma^b_{ac} = delta^b_a u_c + delta^b_c u_a - eta_ac eta^{bd} u_d
    psi = "0.3*sin(x2) + 0.1*x4"
    sigma = scaled_fields(basis_fields(), f"exp(2*({psi}))")
    x = X0
    du = -2 * np.array([0.0, 0.3 * np.cos(x[1]), 0.0, 0.1])
    eta = MINKOWSKI
    d = np.eye(4)
    expected = (
        np.einsum("ba,c->bac", d, du) + np.einsum("bc,a->bac", d, du) - np.einsum("ac,bd,d->bac", eta, eta, du)
    )
    assert np.allclose(christoffel_at(sigma, x), expected, atol=1e-12)


def test_christoffel_against_fd(preset_ops):
    for name in ("curved", "sl2c_xdep", "conformal"):
        sigma = preset_ops[name].sigma_fields
        assert np.max(np.abs(christoffel_at(sigma, X0) - christoffel_fd(sigma, X0))) <= 1e-7


def test_contraction_identity(preset_ops):
    for op in preset_ops.values():
        assert contraction_residual(geometry_at(op.sigma_fields, X0)) <= 1e-12


def test_lowered_adjugates_match_numeric_lowering(preset_ops):
    sigma = preset_ops["sl2c_xdep"].sigma_fields
    low = np.stack([m.at(X0) for m in lowered_adjugate_fields(sigma)])
    g_cov = metric_at(sigma, X0).g_cov
    expected = np.einsum("ab,bij->aij", g_cov, adj(np.stack([s.at(X0) for s in sigma])))
    assert np.allclose(low, expected, atol=1e-12)


def test_frame_determinant_expression(preset_ops):
    sigma = preset_ops["curved"].sigma_fields
    det = compile_exprs([frame_determinant_expr(sigma)])(X0)[0]
    assert det == pytest.approx(1 + 0.1 * np.sin(X0[0]))


def test_snapshot_metric_derivative_against_fd(preset_ops):
    sigma = preset_ops["sl2c_xdep"].sigma_fields
    snap = geometry_at(sigma, X0)
    h = 1e-5
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        fd = (metric_at(sigma, X0 + e).g_cov - metric_at(sigma, X0 - e).g_cov) / (2 * h)
        assert np.allclose(snap.dg_cov[a], fd, atol=1e-8)


def test_field_input_and_matrix_input_agree():
    fields = (MatrixField2.from_rows([["0.1*x1", "1"], ["1", "-0.1*x1"]]),) + basis_fields()[1:]
    assert np.array_equal(frame_at(fields, X0).e, frame_at(np.stack([f.at(X0) for f in fields])).e)
