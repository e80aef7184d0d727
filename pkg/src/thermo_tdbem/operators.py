"""Discrete boundary integral operators and dense solves.

Densities are node-major: component c of node j sits at index (d+1) j + c.

2D (Nystrom on 2N parameter nodes):
  V      Kress log-split quadrature of the single-layer kernel,
  K, K'  averages of the interior/exterior extrapolated traces of D and R_N S,
  W      minus the averaged extrapolated traces of R_N D.
3D (P0 collocation at panel centroids of an icosphere):
  V      Duffy rule on the self panel, subdivision on near panels,
  K, K'  principal value on the self panel via subtraction of the static
         Kelvin traction kernel, whose angular integral is done exactly.

Sign conventions: normals point out of the bounded domain, jumps are
interior minus exterior; [S] = 0, [R_N S] = density, [D] = -density,
[R_N D] = 0.  Interior traces are D^- = (-1/2 + K) and R_N S^- = (1/2 + K').
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import geometry, kernels, layers, specfun, traces
from .errors import AssemblyOverflow, DomainError, SingularMatrix, TagMismatch

KINDS = ("V", "K", "KPRIME", "W", "HALF_PLUS_K", "HALF_MINUS_K", "HALF_PLUS_KP", "HALF_MINUS_KP")

# (domain space, range space) of each operator kind
SPACES = {
    "V": ("minus_half", "plus_half"),
    "W": ("plus_half", "minus_half"),
    "K": ("plus_half", "plus_half"),
    "HALF_PLUS_K": ("plus_half", "plus_half"),
    "HALF_MINUS_K": ("plus_half", "plus_half"),
    "KPRIME": ("minus_half", "minus_half"),
    "HALF_PLUS_KP": ("minus_half", "minus_half"),
    "HALF_MINUS_KP": ("minus_half", "minus_half"),
}


@dataclass
class Density:
    values: np.ndarray
    space: str
    cond: float = None

    def __post_init__(self):
        if self.space not in ("minus_half", "plus_half"):
            raise TagMismatch(f"unknown space tag {self.space!r}")
        self.values = np.asarray(self.values, dtype=complex)

    def nodal(self, dim):
        return self.values.reshape(-1, dim + 1)


@dataclass
class OperatorMatrix:
    kind: str
    s: complex
    mesh_id: str
    entries: np.ndarray
    dim: int
    domain: str = None
    range: str = None

    def __post_init__(self):
        if self.domain is None:
            self.domain, self.range = SPACES[self.kind]

    @property
    def shape(self):
        return self.entries.shape


def _matrix(kind, kc, mesh, entries):
    if not np.all(np.isfinite(entries)):
        raise AssemblyOverflow(f"non-finite entries in {kind} at s={kc.s}")
    return OperatorMatrix(kind, kc.s, mesh.mesh_id, entries, mesh.dim)


def _blocks_to_matrix(B):
    """(M, a, M, b) -> ((d+1)M, (d+1)M)."""
    M, a = B.shape[0], B.shape[1]
    return B.reshape(M * a, M * a)


# --- 2D single layer: Kress quadrature ------------------------------------------

def log_split_diagonal(kc, tangent):
    """lim_{y->x} (E(x,y) - M1(x,y) log|x-y|^2) for the 2D kernel.

    With K_0(z) = -(log(z/2) + gamma_E) I_0(z) + z^2/4 + O(z^4), each radial
    function is g_k = f_k log r^2 + h_k with f = -I_0/(4 pi); only the
    constant and r^2 coefficients of f and h survive the limit.
    """
    lam = kc.lams
    ge = np.euler_gamma
    lg = np.log(lam / 2) + ge
    f2 = -lam**2 / (16 * np.pi)
    h0 = -lg / (2 * np.pi)
    h2 = lam**2 / (8 * np.pi) * (1 - lg)
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = ((kc.b3 * h0[2] + 2 * np.sum(kc.a * (f2 + h2))) * np.eye(2)
                   + 4 * np.sum(kc.a * f2) * np.outer(tangent, tangent))
    out[2, 2] = np.sum(kc.e * h0)
    return out


def log_part_kernel(kc, r):
    """Coefficient M1 of log|x-y|^2 in E(x,y); smooth, finite at r = 0."""
    rn = np.sqrt(np.sum(r * r, axis=-1))
    st = np.stack([specfun.reduced_stack_log_part(lam, rn, 2) for lam in kc.lams])
    return kernels.kernel_from_stacks(kc, st, r, 0)[0]


def cutoff_scale(kc):
    """Decay rate that sets the log-part cutoff: the largest Re(lam_k)."""
    return float(np.max(kc.lams.real))


def _cutoff_width(scale, mesh):
    if scale * mesh.diameter < 15.0:
        return None
    return np.sqrt(40.0) / scale / float(np.max(mesh.speed))


def single_layer_2d(kc, mesh, scale=None):
    """Kress quadrature of V.

    ``scale`` fixes the cutoff of the log part; by default it follows s.  A
    fixed scale makes the matrix an analytic function of s, which keeps
    convolution quadrature outputs causal to roundoff.
    """
    M = mesh.size
    n = M // 2
    t = mesh.t
    X = mesh.nodes
    sp = mesh.speed
    dt = t[:, None] - t[None, :]
    r = X[:, None, :] - X[None, :, :]
    off = ~np.eye(M, dtype=bool)
    E = np.zeros((M, M, 3, 3), dtype=complex)
    E[off] = kernels.kernel_tensors(kc, r[off], 0)[0]
    M1 = log_part_kernel(kc, r)
    w = _cutoff_width(cutoff_scale(kc) if scale is None else scale, mesh)
    if w is not None:
        # localize the log part: I_0 grows like exp(Re(lam) r), which would
        # otherwise cancel catastrophically against the decaying K_0
        chi = np.exp(-(2 * np.sin(dt / 2)) ** 2 / w**2)
        M1 = M1 * chi[..., None, None]
    L = np.zeros((M, M))
    L[off] = np.log(4 * np.sin(dt[off] / 2) ** 2)
    M2 = E - M1 * L[..., None, None]
    tang = np.stack([-mesh.normals[:, 1], mesh.normals[:, 0]], axis=1)
    for i in range(M):
        M2[i, i] = log_split_diagonal(kc, tang[i]) + M1[i, i] * np.log(sp[i] ** 2)
    R = geometry.kress_log_weights(n)
    V = (R[..., None, None] * M1 + (np.pi / n) * M2) * sp[None, :, None, None]
    return _blocks_to_matrix(V.transpose(0, 2, 1, 3))


# --- 3D collocation -------------------------------------------------------------

class _StaticCoeffs:
    """Coefficients of the static Kelvin kernel in the layout of KernelCoeffs."""

    def __init__(self, m):
        self.dim = 3
        self.s = 0.0
        self.material = m
        A = -(m.lam + m.mu) / (8 * np.pi * m.mu * (m.lam + 2 * m.mu))
        self.a = np.array([A, 0.0, 0.0])
        self.b3 = 1.0 / m.mu
        self.c = self.d = self.e = np.zeros(3)


def _static_stacks(rn, mmax):
    """Reduced stacks of f = r (slot 0) and g = 1/(4 pi r) (slot 2)."""
    out = np.zeros((3, mmax + 1) + rn.shape, dtype=complex)
    fr = [rn, 1 / rn, -1 / rn**3, 3 / rn**5, -15 / rn**7]
    dfact = [1, 1, 3, 15, 105]
    for q in range(mmax + 1):
        out[0, q] = fr[q]
        out[2, q] = (-1) ** q * dfact[q] / (4 * np.pi * rn ** (2 * q + 1))
    return out


def static_kernel(kind, m, r, n):
    kc = _StaticCoeffs(m)
    rn = np.linalg.norm(r, axis=-1)
    E, dE = kernels.kernel_from_stacks(kc, _static_stacks(rn, 3), r, 1)
    if kind == "KPRIME":
        return kernels.adjoint_traction_from(kc, E, dE, n)
    return kernels.double_layer_from(kc, E, dE, n)


def _kernel(kind, kc, r, n):
    if kind == "KPRIME":
        E, dE = kernels.kernel_tensors(kc, r, 1)
        return kernels.adjoint_traction_from(kc, E, dE, n)
    return layers.kernel_block(kind, kc, r, n)[0]


SELF_Q = 8


def self_panel_3d(kind, kc, mesh, j):
    """Integral over panel j of the kernel with the target at its centroid."""
    tri = mesh.vertices[mesh.panels[j]]
    x = mesh.nodes[j]
    n = mesh.normals[j]
    y, w = geometry.duffy_rule(tri, x, SELF_Q)
    r = x - y
    nb = np.broadcast_to(n, r.shape)
    val = np.einsum("kab,k->ab", _kernel(kind, kc, r, nb), w)
    if kind == "S":
        return val
    m = kc.material
    val -= np.einsum("kab,k->ab", static_kernel(kind, m, r, nb), w)
    # principal value of the degree -2 static part: sum over the three
    # sub-triangles of J int_0^1 k(d(v)) log|d(v)| dv
    v, wv = np.polynomial.legendre.leggauss(24)
    v = 0.5 * (v + 1)
    wv = 0.5 * wv
    for k in range(3):
        ea = tri[k] - x
        eb = tri[(k + 1) % 3] - x
        J = np.linalg.norm(np.cross(ea, eb))
        d = ea[None, :] + v[:, None] * (eb - ea)[None, :]
        kern = static_kernel(kind, m, -d, np.broadcast_to(n, d.shape))
        val += J * np.einsum("kab,k->ab", kern, wv * np.log(np.linalg.norm(d, axis=1)))
    return val


def collocation_3d(kind, kc, mesh):
    M = mesh.size
    idx = np.arange(M)
    handler = lambda t, j: self_panel_3d(kind, kc, mesh, j)
    if kind == "KPRIME":
        val = _kprime_matrix_3d(kc, mesh, handler)
    else:
        pk = {"V": "S", "K": "D"}[kind]
        handler = lambda t, j: self_panel_3d(pk, kc, mesh, j)
        val, _ = layers.panel_field_matrix(pk, kc, mesh, mesh.nodes, False, idx, handler)
    return _blocks_to_matrix(val)


def _kprime_matrix_3d(kc, mesh, handler):
    # R_{N_x} applied to the single-layer field at the collocation points
    M = mesh.size
    idx = np.arange(M)
    val, gr = layers.panel_field_matrix("S", kc, mesh, mesh.nodes, True, idx, lambda t, j: 0.0)
    m = kc.material
    n = mesh.normals
    out = np.empty_like(val)
    G = gr[:, :3]
    div = G[:, 0, 0] + G[:, 1, 1] + G[:, 2, 2]
    for a in range(3):
        out[:, a] = (m.lam * div * n[:, a, None, None]
                     + m.mu * sum((G[:, a, l] + G[:, l, a]) * n[:, l, None, None] for l in range(3))
                     - m.gamma * val[:, 3] * n[:, a, None, None])
    out[:, 3] = sum(gr[:, 3, l] * n[:, l, None, None] for l in range(3))
    for j in range(M):
        out[j, :, j, :] = handler(j, j)
    return out


# --- public API -------------------------------------------------------------------

def assemble(kind, m, s, mesh, trace_cfg=None, cutoff=None):
    """Dense matrix of a boundary operator at Laplace parameter s.

    ``cutoff`` optionally fixes the log-part cutoff scale of the 2D V.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown operator kind {kind!r}")
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    base = {"HALF_PLUS_K": "K", "HALF_MINUS_K": "K", "HALF_PLUS_KP": "KPRIME",
            "HALF_MINUS_KP": "KPRIME"}.get(kind, kind)
    cfg = trace_cfg or traces.TraceConfig()
    if mesh.dim == 2:
        if base == "V":
            A = single_layer_2d(kc, mesh, cutoff)
        elif base == "K":
            A = traces.trace_matrix_average("D", "value", kc, mesh, cfg)
        elif base == "KPRIME":
            A = traces.trace_matrix_average("S", "traction", kc, mesh, cfg)
        else:
            A = -traces.trace_matrix_average("D", "traction", kc, mesh, cfg)
    else:
        if base == "W":
            raise NotImplementedError("the hypersingular operator is only available in 2D")
        A = collocation_3d(base, kc, mesh)
    if kind.startswith("HALF_"):
        sign = 0.5 if "PLUS" in kind else -0.5
        A = A + sign * np.eye(A.shape[0])
    return _matrix(kind, kc, mesh, A)


def identity_operator(n, space="plus_half"):
    return OperatorMatrix("IDENTITY", 0j, "none", np.eye(n, dtype=complex), 0, space, space)


def solve_boundary_system(A, rhs):
    """Dense LU solve of A x = rhs with space-tag checks and a condition estimate."""
    if rhs.space != A.range:
        raise TagMismatch(f"{A.kind} maps into {A.range}, right-hand side is {rhs.space}")
    a = np.asarray(A.entries)
    b = np.asarray(rhs.values)
    if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise TagMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    lu, piv = sla.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-300:
        raise SingularMatrix(f"{A.kind} is numerically singular")
    x = sla.lu_solve((lu, piv), b)
    anorm = np.linalg.norm(a, 1)
    rcond, info = sla.lapack.zgecon(lu.astype(complex), anorm, norm="1")
    return Density(x, A.domain, cond=1.0 / rcond if rcond > 0 else np.inf)
