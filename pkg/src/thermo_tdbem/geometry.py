"""Boundary discretizations: smooth parametrized curves in 2D, icospheres in 3D.

2D meshes use 2N equispaced parameter nodes t_j = pi j / N with trapezoid
weights |x'(t_j)| pi / N, which integrate smooth periodic integrands
spectrally.  3D meshes are flat-triangle icospheres with one collocation node
per panel centroid.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadResolution

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    dim: int
    shape: str
    params: dict
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    t: np.ndarray = None          # 2D parameter values
    speed: np.ndarray = None      # 2D |x'(t)|
    vertices: np.ndarray = None   # 3D
    panels: np.ndarray = None     # 3D vertex indices, outward orientation

    @property
    def size(self):
        return len(self.nodes)

    @property
    def ndof(self):
        return (self.dim + 1) * len(self.nodes)

    @property
    def mesh_id(self):
        p = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.shape}[{p}]"

    @property
    def spacing(self):
        """Local mesh spacing per node."""
        if self.dim == 2:
            return self.speed * (TWO_PI / self.size)
        return np.sqrt(self.weights)

    @property
    def centroid(self):
        return np.zeros(self.dim)

    @property
    def diameter(self):
        return float(2 * np.max(np.linalg.norm(self.nodes, axis=1)))

    def curve(self, t):
        """Point, first and second derivative of the 2D parametrization at t."""
        if self.dim != 2:
            raise ValueError("curve() only exists for 2D meshes")
        a, b = _semi_axes(self.shape, self.params)
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        x = np.stack([a * c, b * s], axis=-1)
        dx = np.stack([-a * s, b * c], axis=-1)
        ddx = -x
        return x, dx, ddx

    def to_dict(self):
        d = {"shape": self.shape, "params": dict(self.params), "dim": self.dim,
             "nodes": self.nodes.tolist(), "normals": self.normals.tolist(),
             "weights": self.weights.tolist()}
        if self.dim == 3:
            d["panels"] = self.panels.tolist()
            d["vertices"] = self.vertices.tolist()
        return d


def _semi_axes(shape, params):
    if shape == "circle":
        r = params["radius"]
        return r, r
    return params["a"], params["b"]


def curve_mesh(shape, n, **params):
    if n < 8:
        raise BadResolution(f"curve resolution N must be >= 8, got {n}")
    a, b = _semi_axes(shape, params)
    if a <= 0 or b <= 0:
        raise BadResolution("radii must be positive")
    m = 2 * n
    t = np.arange(m) * (np.pi / n)
    c, s = np.cos(t), np.sin(t)
    x = np.stack([a * c, b * s], axis=1)
    dx = np.stack([-a * s, b * c], axis=1)
    speed = np.linalg.norm(dx, axis=1)
    normals = np.stack([dx[:, 1], -dx[:, 0]], axis=1) / speed[:, None]
    w = speed * (np.pi / n)
    p = dict(params, n=n)
    return BoundaryMesh(2, shape, p, x, normals, w, t=t, speed=speed)


def icosphere(level):
    """Vertices (on the unit sphere) and outward-oriented triangles."""
    g = (1 + math.sqrt(5)) / 2
    v = [(-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0), (0, -1, g), (0, 1, g),
         (0, -1, -g), (0, 1, -g), (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    faces = [tuple(t) for t in f]
    for _ in range(level):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    V = np.array(verts)
    F = np.array(faces, dtype=np.int64)
    # orient every triangle outward
    P = V[F]
    nrm = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    flip = np.einsum("ij,ij->i", nrm, P.mean(axis=1)) < 0
    F[flip] = F[flip][:, [0, 2, 1]]
    return V, F


def sphere_mesh(refinement, radius=1.0):
    if refinement < 0 or refinement > 6:
        raise BadResolution(f"sphere refinement must be in 0..6, got {refinement}")
    if radius <= 0:
        raise BadResolution("radius must be positive")
    V, F = icosphere(refinement)
    V = V * radius
    P = V[F]
    cr = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    area = 0.5 * np.linalg.norm(cr, axis=1)
    normals = cr / (2 * area[:, None])
    return BoundaryMesh(3, "sphere", {"radius": radius, "refinement": refinement},
                        P.mean(axis=1), normals, area, vertices=V, panels=F)


def make_mesh(shape, n=None, radius=1.0, a=None, b=None, refinement=None):
    """Build a circle, ellipse (2N nodes) or icosphere mesh."""
    if shape == "circle":
        return curve_mesh("circle", n, radius=radius)
    if shape == "ellipse":
        return curve_mesh("ellipse", n, a=a, b=b)
    if shape == "sphere":
        return sphere_mesh(refinement if refinement is not None else n, radius)
    raise BadResolution(f"unknown shape {shape!r}")


def mesh_from_dict(d):
    p = d["params"]
    if d["shape"] == "sphere":
        return sphere_mesh(p["refinement"], p["radius"])
    if d["shape"] == "circle":
        return curve_mesh("circle", p["n"], radius=p["radius"])
    return curve_mesh("ellipse", p["n"], a=p["a"], b=p["b"])


# --- 2D quadrature helpers -------------------------------------------------------

def kress_log_weights(n):
    """Circulant weights R(t_i - t_j) for integrals of log(4 sin^2((t-tau)/2)) f(tau).

    With 2n nodes, sum_j R(t_i - t_j) f(t_j) integrates exactly all
    trigonometric polynomials f of degree < n.
    """
    m = 2 * n
    t = np.arange(m) * (np.pi / n)
    k = np.arange(1, n)
    row = -(TWO_PI / n) * (np.cos(np.outer(t, k)) @ (1.0 / k)) - (np.pi / n**2) * np.cos(n * t)
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return row[idx]


@dataclass(frozen=True)
class CorrectionRule:
    """Quadrature for one target: plain points/weights plus, in 2D, log weights."""
    points: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray = None
    normals: np.ndarray = None


def singular_quadrature(mesh, i, order=8):
    """Rule for integrating kernels singular at node i over the whole boundary.

    2D: trapezoid weights and Kress log weights in parameter space (a kernel
    split M1(t,tau) log(4 sin^2) + M2 is integrated as
    sum_j (log_weights_j M1 + weights_j M2) |x'(tau_j)|).
    3D: Duffy points/weights covering the self panel; other panels use the
    regular rules of ``panel_rule``.
    """
    if mesh.dim == 2:
        n = mesh.size // 2
        R = kress_log_weights(n)[i]
        return CorrectionRule(mesh.nodes, np.full(mesh.size, np.pi / n), R, mesh.normals)
    tri = mesh.vertices[mesh.panels[i]]
    pts, w = duffy_rule(tri, mesh.nodes[i], order)
    return CorrectionRule(pts, w, None, np.repeat(mesh.normals[i][None], len(w), axis=0))


def fourier_upsample_matrix(m, p):
    """Trigonometric interpolation from m equispaced periodic samples to p*m."""
    return fourier_upsample(np.eye(m), p)


def fourier_upsample(v, p, axis=0):
    """Band-limited interpolation of periodic samples along ``axis`` onto a p-times finer grid."""
    v = np.moveaxis(np.asarray(v), axis, 0)
    m = v.shape[0]
    mf = p * m
    c = np.fft.fft(v, axis=0)
    out = np.zeros((mf,) + v.shape[1:], dtype=complex)
    h = m // 2
    if m % 2 == 0:
        out[:h] = c[:h]
        out[mf - h + 1:] = c[h + 1:]
        out[h] = 0.5 * c[h]
        out[mf - h] = 0.5 * c[h]
    else:
        out[:h + 1] = c[:h + 1]
        out[mf - h:] = c[h + 1:]
    res = np.fft.ifft(out, axis=0) * p
    if np.isrealobj(v):
        res = res.real
    return np.moveaxis(res, 0, axis)


def fourier_upsample_adjoint(k, m, axis=-1):
    """Transpose of ``fourier_upsample``: maps rows over p*m fine samples to m coarse ones.

    For a row vector k, (fourier_upsample_adjoint(k) . v) == (k . fourier_upsample(v)).
    """
    k = np.moveaxis(np.asarray(k, dtype=complex), axis, 0)
    mf = k.shape[0]
    p = mf // m
    # the interpolation matrix is ifft_mf . pad . fft_m (times p); both DFT
    # matrices are symmetric, so the transpose is fft_m . pad^T . ifft_mf
    c = np.fft.ifft(k, axis=0)
    out = np.zeros((m,) + k.shape[1:], dtype=complex)
    h = m // 2
    if m % 2 == 0:
        out[:h] = c[:h]
        out[h + 1:] = c[mf - h + 1:]
        out[h] = 0.5 * (c[h] + c[mf - h])
    else:
        out[:h + 1] = c[:h + 1]
        out[h + 1:] = c[mf - h:]
    res = np.fft.fft(out, axis=0) * p
    return np.moveaxis(res, 0, axis)


# --- 3D triangle rules ------------------------------------------------------------

def _gauss01(q):
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1), 0.5 * w


def collapsed_rule(q):
    """Tensor Gauss rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2."""
    u, wu = _gauss01(q)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * (1 - U)
    return np.stack([U.ravel(), (V * (1 - U)).ravel()], axis=1), W.ravel()


def panel_rule(tri, q):
    """Points and area weights of a q x q collapsed Gauss rule on triangle ``tri`` (3 x 3)."""
    ref, w = collapsed_rule(q)
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    pts = tri[0] + ref[:, :1] * e1 + ref[:, 1:] * e2
    jac = np.linalg.norm(np.cross(e1, e2))
    return pts, w * jac


def subdivide(tri, levels):
    tris = [np.asarray(tri, dtype=float)]
    for _ in range(levels):
        new = []
        for a, b, c in tris:
            ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
            new += [np.array([a, ab, ca]), np.array([b, bc, ab]),
                    np.array([c, ca, bc]), np.array([ab, bc, ca])]
        tris = new
    return np.array(tris)


def subdivided_rule(tri, levels, q):
    pts, ws = [], []
    for t in subdivide(tri, levels):
        p, w = panel_rule(t, q)
        pts.append(p)
        ws.append(w)
    return np.concatenate(pts), np.concatenate(ws)


def duffy_rule(tri, x, q):
    """Rule for integrands with a 1/|x - y| singularity at a point x of triangle ``tri``.

    The triangle is split into sub-triangles with apex x; on each, the Duffy
    map (u, v) -> x + u (e_a + v (e_b - e_a)) absorbs the singularity into the
    Jacobian u |e_a x e_b|.
    """
    u, wu = _gauss01(q)
    pts, ws = [], []
    for k in range(3):
        ea = tri[k] - x
        eb = tri[(k + 1) % 3] - x
        J = np.linalg.norm(np.cross(ea, eb))
        if J < 1e-14 * (np.dot(ea, ea) + np.dot(eb, eb)):
            continue
        U, V = np.meshgrid(u, u, indexing="ij")
        d = ea[None, None, :] + V[..., None] * (eb - ea)[None, None, :]
        pts.append((x + U[..., None] * d).reshape(-1, 3))
        ws.append((np.outer(wu, wu) * U * J).ravel())
    return np.concatenate(pts), np.concatenate(ws)
