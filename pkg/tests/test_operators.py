import numpy as np
import pytest
from scipy import special

from thermo_tdbem import geometry, kernels, operators, verify
from thermo_tdbem.errors import SingularMatrix, TagMismatch

EULER_GAMMA = 0.5772156649015329


def yukawa_single_layer_kress(mesh, lam):
    """Scalar Nystrom matrix of K_0(lam r)/(2 pi) with the Kress log split, written from scratch."""
    M = mesh.size
    n = M // 2
    t = mesh.t
    X = mesh.nodes
    sp = mesh.speed
    R = geometry.kress_log_weights(n)
    V = np.zeros((M, M), dtype=complex)
    for i in range(M):
        r = np.linalg.norm(X[i] - X, axis=1)
        L = np.log(4 * np.sin((t[i] - t) / 2) ** 2 + (r == 0))
        rr = np.where(r == 0, 1.0, r)
        M1 = -special.iv(0, lam * rr) / (4 * np.pi)
        M2 = special.kv(0, lam * rr) / (2 * np.pi) - M1 * L
        M1[i] = -1 / (4 * np.pi)
        M2[i] = (-np.log(lam * sp[i] / 2) - EULER_GAMMA) / (2 * np.pi)
        V[i] = (R[i] * M1 + (np.pi / n) * M2) * sp
    return V


def test_v_temperature_block_matches_scalar_yukawa(mat_dec):
    mesh = geometry.make_mesh("ellipse", 24, a=1.3, b=0.8)
    s = 1 + 2j
    V = operators.assemble("V", mat_dec, s, mesh).entries
    ref = yukawa_single_layer_kress(mesh, np.sqrt(s / mat_dec.kappa))
    got = V[2::3, 2::3]
    assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_half_plus_k(mat, circle32):
    K = operators.assemble("K", mat, 1 + 1j, circle32).entries
    H = operators.assemble("HALF_PLUS_K", mat, 1 + 1j, circle32).entries
    np.testing.assert_allclose(H, 0.5 * np.eye(len(K)) + K, rtol=0, atol=1e-15)


def test_space_tags(mat, circle32):
    V = operators.assemble("V", mat, 1.0, circle32)
    assert (V.domain, V.range) == ("minus_half", "plus_half")
    W = operators.assemble("W", mat, 1.0, circle32)
    assert (W.domain, W.range) == ("plus_half", "minus_half")
    rhs = operators.Density(np.ones(circle32.ndof), "minus_half")
    with pytest.raises(TagMismatch):
        operators.solve_boundary_system(V, rhs)


def test_identity_solve():
    I = operators.identity_operator(6)
    b = operators.Density(np.arange(6) + 1j, "plus_half")
    x = operators.solve_boundary_system(I, b)
    np.testing.assert_array_equal(x.values, b.values)
    assert x.cond == pytest.approx(1.0)


def test_singular_matrix():
    A = operators.OperatorMatrix("K", 1.0, "none", np.zeros((3, 3), complex), 2)
    with pytest.raises((SingularMatrix, np.linalg.LinAlgError)):
        operators.solve_boundary_system(A, operators.Density(np.ones(3), "plus_half"))


def test_manufactured_dirichlet_2d(mat, circle32):
    assert verify.manufactured_solve(2, "dirichlet", mat, 1 + 2j, circle32) < 1e-10


def test_manufactured_neumann_2d(mat, circle32):
    assert verify.manufactured_solve(2, "neumann", mat, 1 + 2j, circle32) < 1e-4


def test_first_and_second_kind_agree(mat):
    rep = verify.second_kind_crosscheck(mat, n=32)
    assert rep.measured[0] < 1e-3


def test_3d_dirichlet_coarse(mat):
    mesh = geometry.make_mesh("sphere", refinement=1)
    assert verify.manufactured_solve(3, "dirichlet", mat, 1 + 2j, mesh) < 5e-2


def test_v_hermitian_part_positive_on_resolved_densities(mat, circle32):
    s = 1 + 1j
    V = operators.assemble("V", mat, s, circle32).entries
    w = verify._wq(circle32)
    Z = verify._zmat(circle32, s, mat)
    P = verify.resolved_basis(circle32)
    assert verify.hermitian_min_eig(P.conj().T @ (V.conj().T * (w * Z)) @ P) > 0


def test_assembled_entries_finite(mat, circle32):
    for kind in ("V", "K", "KPRIME"):
        assert np.all(np.isfinite(operators.assemble(kind, mat, 0.5 + 3j, circle32).entries))


def test_decoupled_k_on_sphere_is_pure_elastic(mat_dec):
    # with no coupling the displacement block cannot see the thermal constant
    mesh = geometry.make_mesh("sphere", refinement=1)
    s = 1 + 1j
    K1 = operators.assemble("K", mat_dec, s, mesh).entries
    other = type(mat_dec)(rho=mat_dec.rho, lam=mat_dec.lam, mu=mat_dec.mu, gamma=0.0, eta=0.0, kappa=3.7)
    K2 = operators.assemble("K", other, s, mesh).entries
    n = mesh.size
    disp = np.ones((4, 4), bool)
    disp[3, :] = disp[:, 3] = False
    mask = np.tile(disp, (n, n))
    scale = np.max(np.abs(K1))
    assert np.max(np.abs(K1[mask] - K2[mask])) <= 1e-6 * scale
    cpl = np.zeros((4, 4), bool)
    cpl[3, :3] = cpl[:3, 3] = True
    assert np.max(np.abs(K1[np.tile(cpl, (n, n))])) <= 1e-6 * scale
