import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermo_tdbem import kernels, verify
from thermo_tdbem.errors import (BadNormal, CoincidentPoints, ConfluentRoots, DomainError,
                                 MissingNormal)
from thermo_tdbem.material import Material

UNIT = Material(1, 1, 1, 1, 1, 1)


def test_laplace_point():
    p = kernels.LaplacePoint(0.4 + 3j)
    assert p.sigma == 0.4 and p.sigma_under == 0.4
    assert kernels.LaplacePoint(2.5).sigma_under == 1.0
    with pytest.raises(DomainError):
        kernels.LaplacePoint(-1 + 1j)


def test_decoupled_wave_numbers():
    w = kernels.wave_numbers(Material(1, 1, 1, 0, 0, 1), 1.0)
    assert w.lam1_sq == pytest.approx(1.0, rel=1e-15)
    assert w.lam2_sq == pytest.approx(1 / 3, rel=1e-15)
    assert w.lam3_sq == pytest.approx(1.0, rel=1e-15)


def test_wave_numbers_against_companion_matrix():
    s = 2 + 1j
    m = UNIT
    q = s / m.kappa
    eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
    lp2 = m.rho * s * s / (m.lam + 2 * m.mu)
    C = np.array([[q * (1 + eps) + lp2, -q * lp2], [1, 0]])
    ref = np.linalg.eigvals(C)
    w = kernels.wave_numbers(m, s)
    got = np.array([w.lam1_sq, w.lam2_sq])
    # compare as unordered pairs; here both roots are almost equidistant from s/kappa
    got, ref = got[np.argsort(np.abs(got))], ref[np.argsort(np.abs(ref))]
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-12


def test_roots_have_positive_real_part(rng):
    for _ in range(200):
        w = kernels.wave_numbers(verify.random_material(rng), verify.random_s(rng))
        assert np.all(np.array([w.lam1, w.lam2, w.lam3, w.lamp]).real > 0)


def test_partial_fractions_simple():
    c = kernels.partial_fraction_coeffs([1.0, 2.0, 4.0]).as_array()
    np.testing.assert_allclose(c, [1 / 3, -1 / 2, 1 / 6], rtol=1e-15)
    l2 = np.array([1.0, 2.0, 4.0])
    assert abs(c.sum()) < 1e-15 and abs((c * l2).sum()) < 1e-15 and abs((c * l2**2).sum() - 1) < 1e-15


def test_partial_fractions_permutation():
    l = [1.0 + 1j, 2.0 - 0.5j, 4.0 + 0.2j]
    c = kernels.partial_fraction_coeffs(l).as_array()
    for perm in ([1, 2, 0], [2, 0, 1], [1, 0, 2]):
        cp = kernels.partial_fraction_coeffs([l[i] for i in perm]).as_array()
        np.testing.assert_allclose(cp, c[perm], rtol=1e-14)


def test_confluent_roots():
    with pytest.raises(ConfluentRoots):
        kernels.partial_fraction_coeffs([1.0, 1.0, 2.0])


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_vieta_and_moments_property(seed):
    rng = np.random.default_rng(seed)
    m = verify.random_material(rng)
    s = complex(rng.uniform(0.1, 10), rng.uniform(-100, 100))
    w = kernels.wave_numbers(m, s)
    q = s / m.kappa
    eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
    ssum = q * (1 + eps) + w.lamp_sq
    assert abs(w.lam1_sq + w.lam2_sq - ssum) <= 1e-12 * abs(ssum)
    assert abs(w.lam1_sq * w.lam2_sq - q * w.lamp_sq) <= 1e-12 * abs(q * w.lamp_sq)
    c = kernels.partial_fraction_coeffs(w).as_array()
    l2 = w.squares
    assert abs(c.sum()) <= 1e-10 * np.max(np.abs(c))
    assert abs((c * l2).sum()) <= 1e-10 * np.max(np.abs(c * l2))
    assert abs((c * l2**2).sum() - 1) <= 1e-10 * max(1, np.max(np.abs(c * l2**2)))


def test_decoupled_temperature_entry_3d(mat_dec):
    s = 1.5 + 2j
    x, y = np.array([0.3, -0.2, 0.5]), np.array([-0.1, 0.4, 0.0])
    r = np.linalg.norm(x - y)
    E = kernels.fundamental_matrix(3, mat_dec, s, x, y).entries
    lam = np.sqrt(s / mat_dec.kappa)
    assert abs(E[3, 3] - np.exp(-lam * r) / (4 * np.pi * r)) < 1e-13 * abs(E[3, 3])
    assert np.max(np.abs(E[:3, 3])) < 1e-13 and np.max(np.abs(E[3, :3])) < 1e-13


def test_translation_invariance(mat, rng):
    for dim in (2, 3):
        x, y, h = rng.normal(size=dim), rng.normal(size=dim), rng.normal(size=dim)
        a = kernels.fundamental_matrix(dim, mat, 1 + 1j, x, y).entries
        b = kernels.fundamental_matrix(dim, mat, 1 + 1j, x + h, y + h).entries
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_coincident_points(mat):
    with pytest.raises(CoincidentPoints):
        kernels.fundamental_matrix(3, mat, 1.0, np.zeros(3), np.zeros(3))


def test_adjoint_is_transpose(mat):
    x, y = np.array([0.3, 0.1]), np.array([-0.5, 0.2])
    E = kernels.fundamental_matrix(2, mat, 1 + 1j, x, y).entries
    Ea = kernels.adjoint_fundamental(2, mat, 1 + 1j, x, y).entries
    np.testing.assert_array_equal(Ea, E.T)


def test_adjoint_equals_kernel_when_decoupled(mat_dec):
    x, y = np.array([0.3, 0.1, 0.2]), np.array([-0.5, 0.2, 0.4])
    E = kernels.fundamental_matrix(3, mat_dec, 2 + 1j, x, y).entries
    Ea = kernels.adjoint_fundamental(3, mat_dec, 2 + 1j, x, y).entries
    np.testing.assert_allclose(Ea, E, atol=1e-15)


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("kind", ["E", "E_adjoint"])
def test_fd_residual(kind, dim, mat):
    rep = verify.pde_residual_fd(kind, dim, mat, 1 + 1j, n=20, seed=3)
    assert rep.fitted["max_residual"] <= 1e-5


def test_fd_residual_discriminates_adjoint(mat):
    kc = kernels.kernel_coeffs(2, mat, 1 + 1j)
    f = lambda X: np.swapaxes(kernels.kernel_tensors(kc, -X, 0)[0], -1, -2)
    r, scale = verify.apply_operator_fd(mat, 1 + 1j, f, np.array([0.5, 0.3]), 0.004, adjoint=False)
    assert np.max(np.abs(r)) / scale > 1e-2


def test_double_layer_decoupled_temperature(mat_dec):
    s = 1 + 1j
    x, y = np.array([0.7, 0.2, -0.3]), np.array([0.1, -0.2, 0.2])
    n_y = np.array([1.0, 2.0, 2.0]) / 3
    K = kernels.layer_kernel("DL", 3, mat_dec, s, x, y, n_y=n_y).entries
    lam = np.sqrt(s / mat_dec.kappa)
    r = x - y
    rn = np.linalg.norm(r)
    # d/dn_y of exp(-lam|x-y|)/(4 pi |x-y|)
    g1 = -(lam + 1 / rn) * np.exp(-lam * rn) / (4 * np.pi * rn)
    ref = g1 * np.dot(-r / rn, n_y)
    assert abs(K[3, 3] - ref) < 1e-12 * abs(ref)


def test_qdn_displacement_part_equals_kernel(mat):
    x, y, n = np.array([0.7, 0.2]), np.array([0.1, -0.2]), np.array([0.6, 0.8])
    Q = kernels.layer_kernel("QDN", 2, mat, 1 + 1j, x, y, n_y=n).entries
    E = kernels.fundamental_matrix(2, mat, 1 + 1j, x, y).entries
    np.testing.assert_allclose(Q[:, :2], E[:, :2], rtol=1e-13)


@pytest.mark.parametrize("dim", [2, 3])
def test_kprime_against_fd_traction(mat, dim, rng):
    s = 1.2 + 0.8j
    x, y = rng.normal(size=dim), rng.normal(size=dim)
    n = rng.normal(size=dim)
    n /= np.linalg.norm(n)
    K = kernels.layer_kernel("KPRIME", dim, mat, s, x, y, n_x=n).entries
    h = 1e-3 * np.linalg.norm(x - y)
    E = lambda p: kernels.fundamental_matrix(dim, mat, s, p, y).entries
    grad = np.zeros((dim, dim + 1, dim + 1), dtype=complex)
    for l in range(dim):
        e = np.zeros(dim)
        e[l] = h
        grad[l] = (-E(x + 2 * e) + 8 * E(x + e) - 8 * E(x - e) + E(x - 2 * e)) / (12 * h)
    ref = np.zeros_like(K)
    for j in range(dim + 1):
        G = grad[:, :dim, j].T
        ref[:dim, j] = kernels.traction_apply(mat, G, np.trace(G), n) - mat.gamma * n * E(x)[dim, j]
        ref[dim, j] = np.dot(grad[:, dim, j], n)
    assert np.max(np.abs(K - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_missing_and_bad_normals(mat):
    x, y = np.array([0.7, 0.2]), np.array([0.1, -0.2])
    with pytest.raises(MissingNormal):
        kernels.layer_kernel("DL", 2, mat, 1.0, x, y)
    with pytest.raises(BadNormal):
        kernels.layer_kernel("DL", 2, mat, 1.0, x, y, n_y=np.array([1.0, 1.0]))


def test_traction_dilation():
    m = Material(1, 1.3, 0.9, 1, 1, 1)
    n = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(kernels.traction_apply(m, np.eye(3), 3.0, n), (3 * m.lam + 2 * m.mu) * n)


def test_traction_rigid_rotation():
    m = Material(1, 1.3, 0.9, 1, 1, 1)
    A = np.array([[0, 1.0, -2], [-1, 0, 0.5], [2, -0.5, 0]])
    n = np.array([0.0, 0.6, 0.8])
    assert np.max(np.abs(kernels.traction_apply(m, A, 0.0, n))) < 1e-15


def test_traction_pure_shear():
    m = Material(1, 1.3, 0.9, 1, 1, 1)
    G = np.zeros((3, 3))
    G[0, 1] = G[1, 0] = 1
    np.testing.assert_allclose(kernels.traction_apply(m, G, 0.0, np.array([1.0, 0, 0])), [0, 2 * m.mu, 0])


def test_traction_bad_normal():
    with pytest.raises(BadNormal):
        kernels.traction_apply(UNIT, np.eye(2), 2.0, np.array([1.0, 1.0]))


def test_2d_3d_share_displacement_coefficients(mat):
    k2, k3 = kernels.kernel_coeffs(2, mat, 1 + 2j), kernels.kernel_coeffs(3, mat, 1 + 2j)
    for name in ("a", "c", "d", "e"):
        np.testing.assert_array_equal(getattr(k2, name), getattr(k3, name))
    assert k2.b3 == k3.b3
