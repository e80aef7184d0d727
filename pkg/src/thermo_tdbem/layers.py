"""Quadrature of layer-potential kernels against densities.

Shared by the operator assembly and the potential evaluation.  Kernel blocks
are laid out as (targets, components, [d/dx_l,] sources, components) so that
reshaping the outer pairs gives a matrix acting on node-major densities.
"""
import numpy as np

from . import _fast2d, geometry, kernels
from .errors import DomainError

# derivative order of E needed for the value of each potential kind
BASE_ORDER = {"S": 0, "D": 1, "QDN": 1, "QND": 1}
CHUNK_PAIRS = 60000


def kernel_block(kind, kc, r, n_y, grad=False):
    """Kernel values (..., d+1, d+1) and optionally x-gradients (..., d+1, d+1, d)."""
    order = BASE_ORDER[kind] + (1 if grad else 0)
    T = kernels.kernel_tensors(kc, r, order)
    if kind == "S":
        val = T[0]
        g = T[1] if grad else None
        return val, g
    build = kernels.LAYER_BUILDERS[kind]
    val = build(kc, T[0], T[1], n_y)
    g = kernels.field_gradient(build, kc, T[1], T[2], n_y) if grad else None
    return val, g


def _chunks(nt, ns):
    step = max(1, CHUNK_PAIRS // max(ns, 1))
    for a in range(0, nt, step):
        yield slice(a, min(nt, a + step))


# --- 2D: trapezoid rule on a (possibly upsampled) parameter grid ----------------

def fine_curve(mesh, p):
    mf = p * mesh.size
    t = np.arange(mf) * (2 * np.pi / mf)
    y, dy, _ = mesh.curve(t)
    sp = np.linalg.norm(dy, axis=1)
    n = np.stack([dy[:, 1], -dy[:, 0]], axis=1) / sp[:, None]
    return y, n, sp * (2 * np.pi / mf)


def upsampling_for(mesh, X):
    """Upsampling factor keeping every target >= 6 fine spacings from the curve."""
    dist = np.min(np.linalg.norm(X[:, None, :] - mesh.nodes[None, :, :], axis=-1), axis=1)
    h = float(np.max(mesh.spacing))
    return int(min(64, max(1, np.ceil(6.0 * h / max(np.min(dist), 1e-300)))))


def _fine_blocks(kind, kc, X, y, ny, w, grad, table):
    """Weighted fine-grid kernel blocks for a chunk of targets."""
    if kind in ("S", "D"):
        return _fast2d.evaluate(kind, kc, X, y, ny, w, grad, table)
    r = X[:, None, :] - y[None, :, :]
    v, g = kernel_block(kind, kc, r, np.broadcast_to(ny, r.shape), grad)
    v = v * w[None, :, None, None]
    if grad:
        g = g * w[None, :, None, None, None]
    return v, g


def _table(kc, X, y):
    lo = np.minimum(X.min(axis=0), y.min(axis=0))
    hi = np.maximum(X.max(axis=0), y.max(axis=0))
    return _fast2d.BesselTable(kc.lams, 1.01 * float(np.linalg.norm(hi - lo)) + 1e-12)


def curve_field(kind, kc, mesh, dens, X, grad=False, p=None):
    """Field of a node-major density (M, d+1) at targets X: value (T, d+1), gradient (T, d+1, d)."""
    if p is None:
        p = upsampling_for(mesh, X)
    y, ny, w = fine_curve(mesh, p)
    phi = geometry.fourier_upsample(dens, p)
    table = _table(kc, X, y)
    val = np.zeros((len(X), 3), dtype=complex)
    gr = np.zeros((len(X), 3, 2), dtype=complex) if grad else None
    for sl in _chunks(len(X), len(y)):
        v, g = _fine_blocks(kind, kc, X[sl], y, ny, w, grad, table)
        val[sl] = np.einsum("tsab,sb->ta", v, phi)
        if grad:
            gr[sl] = np.einsum("tsabl,sb->tal", g, phi)
    return val, gr


def curve_field_matrix(kind, kc, mesh, X, p, grad=False):
    """Matrices mapping node densities to field values/gradients at targets X.

    Returns val (T, 3, M, 3) and grad (T, 3, 2, M, 3); the fine-grid kernel
    is folded back onto the coarse nodes with the adjoint of Fourier upsampling.
    """
    y, ny, w = fine_curve(mesh, p)
    M = mesh.size
    val = np.zeros((len(X), 3, M, 3), dtype=complex)
    gr = np.zeros((len(X), 3, 2, M, 3), dtype=complex) if grad else None
    table = _table(kc, X, y)
    for sl in _chunks(len(X), len(y)):
        v, g = _fine_blocks(kind, kc, X[sl], y, ny, w, grad, table)
        val[sl] = geometry.fourier_upsample_adjoint(v, M, axis=1).transpose(0, 2, 1, 3)
        if grad:
            gr[sl] = geometry.fourier_upsample_adjoint(g, M, axis=1).transpose(0, 2, 4, 1, 3)
    return val, gr


# --- 3D: panel rules ---------------------------------------------------------------

FAR_Q = 2
NEAR_Q = 3
NEAR_LEVELS = 2
NEAR_FACTOR = 2.0


def panel_sizes(mesh):
    tri = mesh.vertices[mesh.panels]
    e = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 1], tri[:, 0] - tri[:, 2]], axis=1)
    return np.max(np.linalg.norm(e, axis=-1), axis=1)


def far_rule(mesh, q=FAR_Q):
    """Same-size rule on every panel: points (M, k, 3) and weights (M, k)."""
    ref, w = geometry.collapsed_rule(q)
    tri = mesh.vertices[mesh.panels]
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    pts = tri[:, None, 0] + ref[None, :, :1] * e1[:, None] + ref[None, :, 1:] * e2[:, None]
    return pts, w[None, :] * (2 * mesh.weights[:, None])


def panel_field_matrix(kind, kc, mesh, X, grad=False, self_index=None, self_handler=None):
    """Matrices (T, 4, M, 4) [and (T, 4, 3, M, 4)] of panel integrals of the kernel.

    Panels closer than NEAR_FACTOR panel sizes to a target use a subdivided
    rule; if ``self_index[t]`` names the panel containing target t, its entry
    comes from ``self_handler(t, panel)``.
    """
    M = mesh.size
    pts, w = far_rule(mesh)
    k = pts.shape[1]
    yf = pts.reshape(-1, 3)
    nf = np.repeat(mesh.normals, k, axis=0)
    wf = w.reshape(-1)
    T = len(X)
    val = np.zeros((T, 4, M, 4), dtype=complex)
    gr = np.zeros((T, 4, 3, M, 4), dtype=complex) if grad else None
    for sl in _chunks(T, len(yf)):
        r = X[sl, None, :] - yf[None, :, :]
        v, g = kernel_block(kind, kc, r, np.broadcast_to(nf, r.shape), grad)
        v = (v * wf[None, :, None, None]).reshape(len(r), M, k, 4, 4).sum(axis=2)
        val[sl] = v.transpose(0, 2, 1, 3)
        if grad:
            g = (g * wf[None, :, None, None, None]).reshape(len(r), M, k, 4, 4, 3).sum(axis=2)
            gr[sl] = g.transpose(0, 2, 4, 1, 3)
    size = panel_sizes(mesh)
    dist = np.linalg.norm(X[:, None, :] - mesh.nodes[None, :, :], axis=-1)
    near = dist < NEAR_FACTOR * size[None, :]
    if self_index is not None:
        near[np.arange(T), self_index] = False
    tri = mesh.vertices[mesh.panels]
    ref = geometry.subdivided_rule(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]), NEAR_LEVELS, NEAR_Q)
    for t in range(T):
        js = np.nonzero(near[t])[0]
        if len(js) == 0:
            continue
        # the subdivided rule of each near panel, mapped from the reference triangle
        e1 = tri[js, 1] - tri[js, 0]
        e2 = tri[js, 2] - tri[js, 0]
        yq = tri[js, None, 0] + ref[0][None, :, :1] * e1[:, None] + ref[0][None, :, 1:2] * e2[:, None]
        wq = ref[1][None, :] * (2 * mesh.weights[js, None])
        r = (X[t] - yq).reshape(-1, 3)
        nq = np.repeat(mesh.normals[js], yq.shape[1], axis=0)
        v, g = kernel_block(kind, kc, r, nq, grad)
        kq = yq.shape[1]
        val[t, :, js, :] = np.einsum("jkab,jk->jab", v.reshape(len(js), kq, 4, 4), wq)
        if grad:
            gr[t, :, :, js, :] = np.einsum("jkabl,jk->jalb", g.reshape(len(js), kq, 4, 4, 3), wq)
    if self_index is not None:
        for t, j in enumerate(self_index):
            val[t, :, j, :] = self_handler(t, j)
    return val, gr


def panel_field(kind, kc, mesh, dens, X, grad=False):
    val, gr = panel_field_matrix(kind, kc, mesh, X, grad)
    v = np.einsum("tamb,mb->ta", val, dens)
    g = np.einsum("talmb,mb->tal", gr, dens) if grad else None
    return v, g


def field(kind, kc, mesh, dens, X, grad=False):
    if kind not in BASE_ORDER:
        raise DomainError(f"unknown potential kind {kind!r}")
    if mesh.dim == 2:
        return curve_field(kind, kc, mesh, dens, X, grad)
    return panel_field(kind, kc, mesh, dens, X, grad)
