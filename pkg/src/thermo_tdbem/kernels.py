"""Wave numbers and kernel matrices of the Laplace-domain thermoelastic operator

    B(d_x, s) = [[mu Lap + (lam+mu) grad div - rho s^2,  -gamma grad],
                 [-s eta div,                            Lap - s/kappa]].

The fundamental solution E (B E = -delta I) is a sum over three scalar
Yukawa-type kernels g_k with decay parameters lam_1, lam_2, lam_3:

    E_uu = sum_k a_k grad grad^T g_k + b_3 g_3 I
    E_ut = sum_k c_k grad g_k,    E_tu = sum_k d_k grad^T g_k,    E_tt = sum_k e_k g_k

with g_k = exp(-lam_k r)/(4 pi r) in 3D and K_0(lam_k r)/(2 pi) in 2D.  All
functions here are vectorized over a leading batch of separation vectors.
"""
import cmath
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import BadNormal, BranchError, CoincidentPoints, ConfluentRoots, DomainError, MissingNormal

CONFLUENCE_FLOOR = 1e-10


@dataclass(frozen=True)
class LaplacePoint:
    """Complex frequency with positive real part."""

    s: complex

    def __post_init__(self):
        s = complex(self.s)
        if not (np.isfinite(s.real) and np.isfinite(s.imag)):
            raise DomainError(f"non-finite Laplace parameter {s}")
        if s.real <= 0:
            raise DomainError(f"Laplace parameter needs Re s > 0, got {s}")
        object.__setattr__(self, "s", s)

    @property
    def sigma(self):
        return self.s.real

    @property
    def sigma_under(self):
        return min(1.0, self.s.real)


def as_laplace_point(s):
    return s if isinstance(s, LaplacePoint) else LaplacePoint(s)


@dataclass(frozen=True)
class WaveNumbers:
    lam1_sq: complex
    lam2_sq: complex
    lam3_sq: complex
    lamp_sq: complex
    lam1: complex
    lam2: complex
    lam3: complex
    lamp: complex

    @property
    def squares(self):
        return np.array([self.lam1_sq, self.lam2_sq, self.lam3_sq])

    @property
    def roots(self):
        return np.array([self.lam1, self.lam2, self.lam3])


@dataclass(frozen=True)
class PFCoeffs:
    c1: complex
    c2: complex
    c3: complex

    def as_array(self):
        return np.array([self.c1, self.c2, self.c3])


@dataclass(frozen=True)
class KernelMatrix:
    entries: np.ndarray
    kind: str


def _separated(a, b):
    return abs(a - b) >= CONFLUENCE_FLOOR * max(abs(a), abs(b))


def wave_numbers(m, s):
    """Squared wave numbers from the dispersion relations and their principal roots.

    lam1^2, lam2^2 solve z^2 - ((s/kappa)(1+eps) + lamp^2) z + (s/kappa) lamp^2 = 0;
    lam1^2 is the root nearest s/kappa.
    """
    s = as_laplace_point(s).s
    eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
    q = s / m.kappa
    lamp_sq = m.rho * s * s / (m.lam + 2 * m.mu)
    lam3_sq = m.rho * s * s / m.mu
    b = q * (1 + eps) + lamp_sq
    c = q * lamp_sq
    # b^2 - 4c rewritten without cancellation; exact square when eps = 0
    disc = cmath.sqrt((q * (1 + eps) - lamp_sq) ** 2 + 4 * eps * q * lamp_sq)
    # pick the sign that avoids cancellation, then use the product identity
    big = 0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else 0.5 * (b - disc)
    small = c / big if big != 0 else 0.0
    if abs(big - q) <= abs(small - q):
        l1, l2 = big, small
    else:
        l1, l2 = small, big
    if not _separated(l1, l2):
        raise ConfluentRoots(f"lam1^2 and lam2^2 coincide at s={s}")
    roots = [cmath.sqrt(v) for v in (l1, l2, lam3_sq, lamp_sq)]
    for name, r in zip(("lam1", "lam2", "lam3", "lamp"), roots):
        if r.real <= 0:
            raise BranchError(f"{name} = {r} has non-positive real part at s={s}")
    return WaveNumbers(l1, l2, lam3_sq, lamp_sq, *roots)


def partial_fraction_coeffs(w):
    """c_k = 1/((lam_k^2 - lam_{k+1}^2)(lam_k^2 - lam_{k+2}^2)), cyclic in k."""
    l = [w.lam1_sq, w.lam2_sq, w.lam3_sq] if isinstance(w, WaveNumbers) else list(w)
    for i in range(3):
        for j in range(i + 1, 3):
            if not _separated(l[i], l[j]):
                raise ConfluentRoots(f"lam{i + 1}^2 and lam{j + 1}^2 coincide")
    c = [1.0 / ((l[k] - l[(k + 1) % 3]) * (l[k] - l[(k + 2) % 3])) for k in range(3)]
    return PFCoeffs(*c)


@dataclass(frozen=True)
class KernelCoeffs:
    """Scalar coefficients multiplying the derivatives of g_1, g_2, g_3."""

    dim: int
    s: complex
    lams: np.ndarray   # (3,) decay parameters
    a: np.ndarray      # grad grad^T g_k in the displacement block
    b3: complex        # identity coefficient on g_3
    c: np.ndarray      # grad g_k, displacement rows / temperature column
    d: np.ndarray      # grad^T g_k, temperature row / displacement columns
    e: np.ndarray      # g_k in the temperature-temperature entry
    material: object
    waves: WaveNumbers


def kernel_coeffs(dim, m, s):
    if dim not in (2, 3):
        raise DomainError(f"dim must be 2 or 3, got {dim}")
    s = as_laplace_point(s).s
    w = wave_numbers(m, s)
    partial_fraction_coeffs(w)  # confluence guard for lam3
    rs2 = m.rho * s * s
    pre = 1.0 / (rs2 * (w.lam1_sq - w.lam2_sq))
    p1, p2 = pre, -pre
    a = np.array([p1 * (w.lamp_sq - w.lam2_sq), p2 * (w.lamp_sq - w.lam1_sq), -1.0 / rs2])
    c = np.array([p1 * m.gamma * w.lamp_sq, p2 * m.gamma * w.lamp_sq, 0.0])
    d = np.array([p1 * s * m.eta * w.lamp_sq, p2 * s * m.eta * w.lamp_sq, 0.0])
    e = np.array([p1 * rs2 * (w.lam1_sq - w.lamp_sq), p2 * rs2 * (w.lam2_sq - w.lamp_sq), 0.0])
    b3 = w.lam3_sq / rs2
    return KernelCoeffs(dim, s, w.roots, a, b3, c, d, e, m, w)


# --- Cartesian derivatives of radial functions ---------------------------------

def radial_tensor(F, r, n):
    """n-th Cartesian derivative tensor of a radial function from its reduced stack.

    F has shape (>= n+1, ...batch); r has shape (...batch, d).  Returns shape
    (...batch,) + (d,)*n.
    """
    d = r.shape[-1]
    I = np.eye(d)
    if n == 0:
        return F[0]
    if n == 1:
        return F[1][..., None] * r
    rr = r[..., :, None] * r[..., None, :]
    if n == 2:
        return F[2][..., None, None] * rr + F[1][..., None, None] * I
    rrr = rr[..., None] * r[..., None, None, :]
    if n == 3:
        sym = (I[:, :, None] * r[..., None, None, :] + I[:, None, :] * r[..., None, :, None]
               + I[None, :, :] * r[..., :, None, None])
        return F[3][..., None, None, None] * rrr + F[2][..., None, None, None] * sym
    if n == 4:
        rrrr = rrr[..., None] * r[..., None, None, None, :]
        # six placements of one delta, remaining indices carry r r
        E = np.einsum
        dr = (E("ij,...kl->...ijkl", I, rr) + E("ik,...jl->...ijkl", I, rr)
              + E("il,...jk->...ijkl", I, rr) + E("jk,...il->...ijkl", I, rr)
              + E("jl,...ik->...ijkl", I, rr) + E("kl,...ij->...ijkl", I, rr))
        dd = (E("ij,kl->ijkl", I, I) + E("ik,jl->ijkl", I, I) + E("il,jk->ijkl", I, I))
        return (F[4][..., None, None, None, None] * rrrr
                + F[3][..., None, None, None, None] * dr
                + F[2][..., None, None, None, None] * dd)
    raise ValueError("derivative order above 4 not supported")


def _combine(coef, stacks):
    # stacks: (3, mmax+1, ...batch)
    return np.tensordot(coef, stacks, axes=(0, 0))


def kernel_from_stacks(kc, stacks, r, order):
    """E and its x-derivatives up to ``order`` (0, 1 or 2).

    ``stacks`` holds the reduced stacks of the three radial functions, shape
    (3, order+3, ...batch).  Returns a list [E, dE, d2E] truncated to
    ``order``+1 entries; E has shape (...batch, d+1, d+1), each derivative adds
    a trailing axis of length d.
    """
    d = r.shape[-1]
    batch = r.shape[:-1]
    Fa = _combine(kc.a, stacks)
    Fc = _combine(kc.c, stacks)
    Fd = _combine(kc.d, stacks)
    Fe = _combine(kc.e, stacks)
    F3 = kc.b3 * stacks[2]
    I = np.eye(d)
    out = []
    for q in range(order + 1):
        shape = batch + (d + 1, d + 1) + (d,) * q
        M = np.zeros(shape, dtype=complex)
        g3 = radial_tensor(F3, r, q)
        uu = radial_tensor(Fa, r, q + 2)
        if q == 0:
            uu = uu + g3[..., None, None] * I
        elif q == 1:
            uu = uu + I[:, :, None] * g3[..., None, None, :]
        else:
            uu = uu + I[:, :, None, None] * g3[..., None, None, :, :]
        b = (slice(None),) * len(batch)
        M[b + (slice(0, d), slice(0, d))] = uu
        M[b + (slice(0, d), d)] = radial_tensor(Fc, r, q + 1)
        M[b + (d, slice(0, d))] = radial_tensor(Fd, r, q + 1)
        M[b + (d, d)] = radial_tensor(Fe, r, q)
        out.append(M)
    return out


def radial_stacks(kc, rn, mmax):
    """Reduced stacks of g_1, g_2, g_3 at radii rn, shape (3, mmax+1, ...)."""
    return np.stack([specfun.reduced_stack(kc.dim, lam, rn, mmax) for lam in kc.lams])


def kernel_tensors(kc, r, order=0):
    """E, dE, d2E for separation vectors r = x - y of shape (..., d)."""
    r = np.asarray(r, dtype=float)
    rn = np.sqrt(np.sum(r * r, axis=-1))
    if np.any(rn == 0):
        raise CoincidentPoints("x and y coincide")
    return kernel_from_stacks(kc, radial_stacks(kc, rn, order + 2), r, order)


# --- boundary operators applied to kernels ----------------------------------------

def traction_batch(lam, mu, grad, n, div=None):
    """sigma(u) n with grad[..., i, j] = d u_i / d x_j."""
    if div is None:
        div = np.trace(grad, axis1=-2, axis2=-1)
    return (lam * div[..., None] * n
            + mu * (np.einsum("...ij,...j->...i", grad, n) + np.einsum("...ji,...j->...i", grad, n)))


def traction_apply(m, grad_u, div_u, n):
    """Elastic traction lam div(u) n + mu (grad u + grad u^T) n of a single field."""
    grad_u = np.asarray(grad_u, dtype=complex)
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise BadNormal("normal must have unit length")
    return traction_batch(m.lam, m.mu, grad_u, n, np.asarray(div_u, dtype=complex))


def double_layer_from(kc, E, dE, n_y):
    """(R*_{N_y} E^T)^T: each row of E, read as a field in y, mapped by [[T, s eta n], [0, d_n]]."""
    m = kc.material
    d = n_y.shape[-1]
    G = -dE[..., :, :d, :]                      # d/dy of displacement entries
    out = np.empty(E.shape, dtype=complex)
    out[..., :, :d] = (traction_batch(m.lam, m.mu, G, n_y[..., None, :])
                       + kc.s * m.eta * n_y[..., None, :] * E[..., :, d, None])
    out[..., :, d] = -np.einsum("...il,...l->...i", dE[..., :, d, :], n_y)
    return out


def adjoint_traction_from(kc, E, dE, n_x):
    """R_{N_x} E: each column of E, read as a field in x, mapped by [[T, -gamma n], [0, d_n]]."""
    m = kc.material
    d = n_x.shape[-1]
    G = np.swapaxes(dE[..., :d, :, :], -3, -2)    # (..., col j, a, l)
    out = np.empty(E.shape, dtype=complex)
    tr = traction_batch(m.lam, m.mu, G, n_x[..., None, :])   # (..., j, a)
    out[..., :d, :] = np.swapaxes(tr, -1, -2) - m.gamma * n_x[..., :, None] * E[..., d, None, :]
    out[..., d, :] = np.einsum("...jl,...l->...j", dE[..., d, :, :], n_x)
    return out


def qdn_from(kc, E, dE, n_y):
    d = n_y.shape[-1]
    out = np.array(E, dtype=complex)
    out[..., :, d] = -np.einsum("...il,...l->...i", dE[..., :, d, :], n_y)
    return out


def qnd_from(kc, E, dE, n_y):
    d = n_y.shape[-1]
    out = double_layer_from(kc, E, dE, n_y)
    out[..., :, d] = -E[..., :, d]
    return out


LAYER_BUILDERS = {"DL": double_layer_from, "D": double_layer_from, "QDN": qdn_from, "QND": qnd_from}


def field_gradient(builder, kc, dE, d2E, n):
    """x-gradient of a layer kernel built by ``builder``: trailing axis l is d/dx_l."""
    Eg = np.moveaxis(dE, -1, -3)          # (..., l, d+1, d+1)
    dEg = np.moveaxis(d2E, -1, -4)        # (..., l, d+1, d+1, m)
    out = builder(kc, Eg, dEg, n[..., None, :])
    return np.moveaxis(out, -3, -1)


# --- single-point public API ------------------------------------------------------

def _pair(x, y, dim):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (dim,) or y.shape != (dim,):
        raise DomainError(f"points must have {dim} coordinates")
    r = x - y
    scale = max(1.0, np.linalg.norm(x), np.linalg.norm(y))
    if np.linalg.norm(r) < 1e-14 * scale:
        raise CoincidentPoints("x and y coincide")
    return r


def _unit(n, name):
    if n is None:
        raise MissingNormal(f"{name} is required for this kernel")
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise BadNormal(f"{name} must have unit length")
    return n


def fundamental_matrix(dim, m, s, x, y):
    kc = kernel_coeffs(dim, m, s)
    E = kernel_tensors(kc, _pair(x, y, dim), 0)[0]
    return KernelMatrix(E, "E")


def adjoint_fundamental(dim, m, s, x, y):
    return KernelMatrix(fundamental_matrix(dim, m, s, x, y).entries.T.copy(), "E_adjoint")


def layer_kernel(kind, dim, m, s, x, y, n_x=None, n_y=None):
    kc = kernel_coeffs(dim, m, s)
    r = _pair(x, y, dim)
    E, dE = kernel_tensors(kc, r, 1)
    if kind == "KPRIME":
        return KernelMatrix(adjoint_traction_from(kc, E, dE, _unit(n_x, "n_x")), kind)
    if kind in LAYER_BUILDERS:
        return KernelMatrix(LAYER_BUILDERS[kind](kc, E, dE, _unit(n_y, "n_y")), kind)
    raise DomainError(f"unknown kernel kind {kind!r}")
