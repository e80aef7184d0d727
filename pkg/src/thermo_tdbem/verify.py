"""Numerical probes of the identities, jump relations and bounds of the method.

Every probe returns a ProbeReport: the grid it ran over, what was measured,
the reference values or bounds it was compared against, fitted constants or
exponents, and a pass flag computed from measured vs tolerance.
Discrete H^{+-1/2}(Gamma) norms are realized as quadrature-weighted l2 norms
and H^1 norms of fields by energy norms on collars around the boundary; both
change constants but not |s| exponents on a fixed mesh.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from . import geometry, kernels, operators, potentials, specfun, tdcq
from .errors import QuadratureInsufficient
from .material import Material
from .traces import TraceConfig

# light material: long waves relative to the mesh, used by the s-sweeps
PROBE_MATERIAL = Material(rho=1 / 16, lam=1.3, mu=0.9, gamma=0.5, eta=0.4, kappa=1.1)
DEFAULT_MATERIAL = Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.5, eta=0.4, kappa=1.1)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def fmt(x):
    """17 significant digits, the CSV number format."""
    return format(float(x), ".17g")


@dataclass
class ProbeReport:
    name: str
    grid: list
    measured: list
    reference: list
    tolerance: float = None
    fitted: dict = field(default_factory=dict)
    passed: bool = False
    seed: int = None
    notes: str = ""

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid_re", "grid_im", "measured", "reference"])
        for g, v, r in zip(self.grid, self.measured, self.reference):
            g = complex(g) if np.isscalar(g) else complex(np.ravel(g)[0])
            w.writerow([fmt(g.real), fmt(g.imag), fmt(v), "" if r is None else fmt(r)])
        return buf.getvalue()

    def summary(self):
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} {json.dumps(_jsonable(self.fitted))}"


def fit_exponent(x, y):
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def random_material(rng, coupled=True):
    mu = rng.uniform(0.5, 2.0)
    gamma = rng.uniform(0.1, 1.0) if coupled else 0.0
    eta = rng.uniform(0.1, 1.0) if coupled else 0.0
    return Material(rho=rng.uniform(0.5, 2.0), lam=rng.uniform(-0.6 * mu, 2.0), mu=mu,
                    gamma=gamma, eta=eta, kappa=rng.uniform(0.2, 2.0))


def random_s(rng):
    return complex(rng.uniform(0.1, 3.0), rng.uniform(-10.0, 10.0))


# --- dispersion relations and partial fractions ----------------------------------

def dispersion_probe(n=1000, seed=0, tol=1e-12):
    """Sum and product identities of lam_1^2, lam_2^2 and the decoupled limit."""
    rng = np.random.default_rng(seed)
    errs, grid = [], []
    for _ in range(n):
        m, s = random_material(rng), random_s(rng)
        w = kernels.wave_numbers(m, s)
        q = s / m.kappa
        eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
        ssum = q * (1 + eps) + w.lamp_sq
        prod = q * w.lamp_sq
        e1 = abs(w.lam1_sq + w.lam2_sq - ssum) / abs(ssum)
        e2 = abs(w.lam1_sq * w.lam2_sq - prod) / abs(prod)
        errs.append(max(e1, e2))
        grid.append(s)
    dec = []
    for _ in range(50):
        m, s = random_material(rng, coupled=False), random_s(rng)
        w = kernels.wave_numbers(m, s)
        ref = [s / m.kappa, m.rho * s * s / (m.lam + 2 * m.mu), m.rho * s * s / m.mu]
        dec.append(max(abs(a - b) / abs(b) for a, b in zip(w.squares, ref)))
    dec_max = float(max(dec))
    ok = max(errs) <= tol and dec_max <= 4 * np.finfo(float).eps
    return ProbeReport("dispersion", grid, errs, [tol] * n, tol,
                       {"max_identity_error": max(errs), "decoupled_max_error": dec_max}, ok, seed)


def partial_fraction_probe(n=1000, seed=0, tol=1e-10):
    """sum c_k = 0, sum c_k lam_k^2 = 0, sum c_k lam_k^4 = 1."""
    rng = np.random.default_rng(seed)
    errs, grid = [], []
    for _ in range(n):
        m, s = random_material(rng), random_s(rng)
        w = kernels.wave_numbers(m, s)
        c = kernels.partial_fraction_coeffs(w).as_array()
        l2 = w.squares
        scale = np.abs(c) * np.abs(l2) ** 2
        mom = [abs(np.sum(c)) / np.max(np.abs(c)), abs(np.sum(c * l2)) / np.max(np.abs(c * l2)),
               abs(np.sum(c * l2**2) - 1) / max(1.0, np.max(scale))]
        errs.append(max(mom))
        grid.append(s)
    return ProbeReport("partial_fractions", grid, errs, [tol] * n, tol,
                       {"max_moment_error": max(errs)}, max(errs) <= tol, seed)


def decoupling_probe(n=50, seed=0, tol=1e-12):
    """gamma = eta = 0: temperature entry of E is the Yukawa kernel, coupling entries vanish."""
    rng = np.random.default_rng(seed)
    errs, grid = [], []
    for i in range(n):
        dim = 2 + i % 2
        m, s = random_material(rng, coupled=False), random_s(rng)
        x = rng.normal(size=dim)
        r = np.linalg.norm(x)
        E = kernels.fundamental_matrix(dim, m, s, x, np.zeros(dim)).entries
        lam = np.sqrt(s / m.kappa)
        g = specfun.modified_bessel_k(0, lam * r) / (2 * np.pi) if dim == 2 else np.exp(-lam * r) / (4 * np.pi * r)
        e_temp = abs(E[dim, dim] - g) / abs(g)
        e_cpl = max(np.max(np.abs(E[:dim, dim])), np.max(np.abs(E[dim, :dim]))) / np.max(np.abs(E))
        errs.append(max(e_temp, e_cpl))
        grid.append(s)
    return ProbeReport("decoupling", grid, errs, [tol] * n, tol, {"max_error": max(errs)}, max(errs) <= tol, seed)


# --- finite-difference residuals ------------------------------------------------------

def _fd_derivatives(f, x, h):
    """Value, gradient (d, ...) and Hessian (d, d, ...) of f at x by 4th-order differences."""
    d = len(x)
    e = np.eye(d) * h
    offs = [np.zeros(d)]
    for i in range(d):
        for k in (-2, -1, 1, 2):
            offs.append(k * e[i])
    for i in range(d):
        for j in range(i + 1, d):
            for a in (-2, -1, 1, 2):
                for b in (-2, -1, 1, 2):
                    offs.append(a * e[i] + b * e[j])
    vals = f(x[None, :] + np.array(offs))
    c1 = {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}
    c2 = {-2: -1 / 12, -1: 16 / 12, 1: 16 / 12, 2: -1 / 12}
    f0 = vals[0]
    grad = np.zeros((d,) + f0.shape, dtype=complex)
    hess = np.zeros((d, d) + f0.shape, dtype=complex)
    p = 1
    for i in range(d):
        for k in (-2, -1, 1, 2):
            grad[i] += c1[k] * vals[p] / h
            hess[i, i] += c2[k] * vals[p] / h**2
            p += 1
        hess[i, i] += -30 / 12 * f0 / h**2
    for i in range(d):
        for j in range(i + 1, d):
            for a in (-2, -1, 1, 2):
                for b in (-2, -1, 1, 2):
                    hess[i, j] += c1[a] * c1[b] * vals[p] / h**2
                    p += 1
            hess[j, i] = hess[i, j]
    return f0, grad, hess


def apply_operator_fd(m, s, f, x, h, adjoint=False):
    """Residual of B(d_x, s) (or its adjoint) applied to the columns of f; returns (residual, scale)."""
    f0, g, H = _fd_derivatives(f, x, h)
    d = len(x)
    lap = sum(H[i, i] for i in range(d))
    div = sum(g[j, j] for j in range(d))                     # d_j F[j, :]
    grad_div = [sum(H[i, j][j] for j in range(d)) for i in range(d)]
    sgn_ut, sgn_tu = (m.eta * s, m.gamma) if adjoint else (-m.gamma, -m.eta * s)
    rows, scale = [], 0.0
    for i in range(d):
        terms = [m.mu * lap[i], (m.lam + m.mu) * grad_div[i], -m.rho * s * s * f0[i], sgn_ut * g[i][d]]
        rows.append(sum(terms))
        scale = max(scale, max(np.max(np.abs(t)) for t in terms))
    terms = [sgn_tu * div, lap[d], -(s / m.kappa) * f0[d]]
    rows.append(sum(terms))
    scale = max(scale, max(np.max(np.abs(t)) for t in terms))
    return np.array(rows), scale


def pde_residual_fd(kind, dim, m=DEFAULT_MATERIAL, s=1 + 1j, n=50, seed=0, tol=1e-5, h_rel=0.004):
    """Max relative FD residual of B E = 0 (kind 'E'), B* E^T = 0 ('E_adjoint') or of a potential field."""
    rng = np.random.default_rng(seed)
    kc = kernels.kernel_coeffs(dim, m, s)
    y = np.zeros(dim)
    res = []
    for _ in range(n):
        x = rng.normal(size=dim)
        x *= rng.uniform(0.1, 3.0) / np.linalg.norm(x)
        if kind == "E":
            f = lambda X: kernels.kernel_tensors(kc, X - y, 0)[0]
            adj = False
        elif kind == "E_adjoint":
            f = lambda X: np.swapaxes(kernels.kernel_tensors(kc, y - X, 0)[0], -1, -2)
            adj = True
        else:
            raise ValueError(f"unknown residual kind {kind!r}")
        r, scale = apply_operator_fd(m, s, f, x, h_rel * np.linalg.norm(x), adj)
        res.append(float(np.max(np.abs(r)) / scale))
    return ProbeReport(f"pde_residual_{kind}_{dim}d", list(range(n)), res, [tol] * n, tol,
                       {"max_residual": max(res)}, max(res) <= tol, seed)


def potential_residual_fd(kind, m, s, mesh, density, points, tol=1e-6, h_rel=0.01):
    """FD residual of B applied to a layer potential at points far from the boundary."""
    res = []
    for x in np.atleast_2d(points):
        f = lambda X: potentials.field_arrays(kind, m, s, mesh, density, X, grad=False)[0]
        r, scale = apply_operator_fd(m, s, lambda X: f(X)[..., None], x, h_rel * mesh.diameter)
        res.append(float(np.max(np.abs(r)) / scale))
    return ProbeReport(f"potential_residual_{kind}", [tuple(p) for p in np.atleast_2d(points)], res,
                       [tol] * len(res), tol, {"max_residual": max(res)}, max(res) <= tol)


def yukawa_residual_fd(dim, s=1 + 1j, kappa=1.1, n=50, seed=0, tol=1e-7, h_rel=0.004):
    """gamma = eta = 0: (Lap - s/kappa) applied to the temperature entry of E."""
    m = Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.0, eta=0.0, kappa=kappa)
    kc = kernels.kernel_coeffs(dim, m, s)
    rng = np.random.default_rng(seed)
    res = []
    for _ in range(n):
        x = rng.normal(size=dim)
        x *= rng.uniform(0.1, 3.0) / np.linalg.norm(x)
        f = lambda X: kernels.kernel_tensors(kc, X, 0)[0][..., dim, dim]
        f0, _, H = _fd_derivatives(f, x, h_rel * np.linalg.norm(x))
        lap = sum(H[i, i] for i in range(dim))
        res.append(float(abs(lap - s / kappa * f0) / max(abs(lap), abs(s / kappa * f0))))
    return ProbeReport(f"yukawa_residual_{dim}d", list(range(n)), res, [tol] * n, tol,
                       {"max_residual": max(res)}, max(res) <= tol, seed)


# --- jump relations -----------------------------------------------------------------

def fourier_density(t, modes=3):
    """Smooth (M, 3) density with ``modes`` Fourier modes per component."""
    cols = []
    for c in range(3):
        v = np.zeros_like(t, dtype=complex)
        for k in range(1, modes + 1):
            v += (0.7 / k) * np.cos(k * t + 0.4 * c) + (0.3j / k) * np.sin((k + c) * t)
        cols.append(v + 0.1 * (c - 1))
    return np.stack(cols, axis=1)


def jump_test(kind, ns=(32, 64, 128), m=DEFAULT_MATERIAL, s=1 + 2j, density=fourier_density,
              shape="circle", cfg=None, tol=1e-5, min_order=2.0):
    """Jump errors of S or D under refinement with the fitted convergence order."""
    errs_v, errs_t, hs = [], [], []
    for n in ns:
        mesh = geometry.make_mesh(shape, n)
        dens = density(mesh.t)
        space = potentials.DENSITY_SPACE[kind]
        jv, jt = potentials.jumps(kind, m, s, mesh, operators.Density(dens.reshape(-1), space), cfg)
        if kind == "S":                # [S] = 0, [R_N S] = density
            ev, et = np.max(np.abs(jv)), np.max(np.abs(jt - dens))
        else:                          # [D] = -density, [R_N D] = 0
            ev, et = np.max(np.abs(jv + dens)), np.max(np.abs(jt))
        scale = np.max(np.abs(dens))
        errs_v.append(float(ev / scale))
        errs_t.append(float(et / scale))
        hs.append(float(np.max(mesh.spacing)))
    pv = fit_exponent(hs, np.maximum(errs_v, 1e-300))
    pt = fit_exponent(hs, np.maximum(errs_t, 1e-300))
    worst = [max(a, b) for a, b in zip(errs_v, errs_t)]
    ok = worst[-1] <= tol and min(pv, pt) >= min_order
    return ProbeReport(f"jumps_{kind}", list(ns), worst, [tol] * len(ns), tol,
                       {"value_errors": errs_v, "traction_errors": errs_t,
                        "value_order": pv, "traction_order": pt}, ok)


# --- manufactured solutions ------------------------------------------------------------

def _source(dim, m, s, y0, c):
    kc = kernels.kernel_coeffs(dim, m, s)

    def value_grad(X):
        E, dE = kernels.kernel_tensors(kc, X - y0, 1)
        return E @ c, np.einsum("tabl,b->tal", dE, c)
    return kc, value_grad


def manufactured_solve(dim, problem, m, s, mesh, y0=None, c=None, probes=None, cfg=None):
    """Relative error at exterior probes of a point-source manufactured solution."""
    y0 = np.asarray(y0 if y0 is not None else [0.2, -0.1, 0.15][:dim], dtype=float)
    c = np.asarray(c if c is not None else [1.0, -0.5, 0.7, 0.3][:dim + 1], dtype=complex)
    if probes is None:
        th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        probes = (np.stack([2 * np.cos(th), 2 * np.sin(th)], 1) if dim == 2 else
                  2 * np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1],
                                [0.6, 0.6, 0.52], [-0.6, 0.5, -0.62]]))
    kc, src = _source(dim, m, s, y0, c)
    v, g = src(mesh.nodes)
    if problem == "dirichlet":
        A = operators.assemble("V", m, s, mesh)
        dens = operators.solve_boundary_system(A, operators.Density(v.reshape(-1), "plus_half"))
        kind = "S"
    else:
        from .traces import conormal_rows
        gN = conormal_rows(kc, v, g, mesh.normals)
        A = operators.assemble("W", m, s, mesh, cfg or TraceConfig())
        dens = operators.solve_boundary_system(A, operators.Density(-gN.reshape(-1), "minus_half"))
        kind = "D"
    u = potentials.field_arrays(kind, m, s, mesh, dens, probes, grad=False)[0]
    ue = src(probes)[0]
    return float(np.max(np.abs(u - ue)) / np.max(np.abs(ue)))


def manufactured_test(dim, problem, m=DEFAULT_MATERIAL, s=1 + 2j, resolutions=None, tol=None):
    """Manufactured exterior solve under refinement; passes if the finest error meets tol and improves."""
    if resolutions is None:
        resolutions = (32, 64, 128) if dim == 2 else (1, 2, 3)
    if tol is None:
        tol = {(2, "dirichlet"): 1e-6, (3, "dirichlet"): 1e-2, (2, "neumann"): 1e-3}[(dim, problem)]
    errs = []
    for r in resolutions:
        mesh = geometry.make_mesh("circle", r) if dim == 2 else geometry.make_mesh("sphere", refinement=r)
        errs.append(manufactured_solve(dim, problem, m, s, mesh))
    improving = errs[-1] < errs[0] or errs[-1] < 1e-12
    return ProbeReport(f"manufactured_{dim}d_{problem}", list(resolutions), errs, [tol] * len(errs), tol,
                       {"finest_error": errs[-1], "improves": improving}, errs[-1] <= tol and improving)


def second_kind_crosscheck(m=DEFAULT_MATERIAL, s=1 + 2j, n=64, y1=(2.0, 0.5), tol=1e-3):
    """Interior Dirichlet solved via V and via (-1/2 I + K): fields agree at interior probes."""
    mesh = geometry.make_mesh("circle", n)
    c = np.array([1.0, -0.5, 0.7], dtype=complex)
    _, src = _source(2, m, s, np.asarray(y1, float), c)
    f = src(mesh.nodes)[0].reshape(-1)
    lam = operators.solve_boundary_system(operators.assemble("V", m, s, mesh), operators.Density(f, "plus_half"))
    phi = operators.solve_boundary_system(operators.assemble("HALF_MINUS_K", m, s, mesh),
                                          operators.Density(f, "plus_half"))
    th = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    X = np.concatenate([[[0.0, 0.0]], 0.5 * np.stack([np.cos(th), np.sin(th)], 1)])
    u1 = potentials.field_arrays("S", m, s, mesh, lam, X, grad=False)[0]
    u2 = potentials.field_arrays("D", m, s, mesh, phi, X, grad=False)[0]
    ue = src(X)[0]
    scale = np.max(np.abs(ue))
    diff = float(np.max(np.abs(u1 - u2)) / scale)
    e1 = float(np.max(np.abs(u1 - ue)) / scale)
    e2 = float(np.max(np.abs(u2 - ue)) / scale)
    return ProbeReport("second_kind_crosscheck", [n], [diff], [tol], tol,
                       {"first_kind_error": e1, "second_kind_error": e2}, diff <= tol)


# --- energy norms ----------------------------------------------------------------------

class EnergyNormEvaluator:
    """Tensor-product quadrature on a ball (r_inner = 0) or annulus/shell in 2D or 3D.

    Exact for polynomials of total degree <= ``degree``.
    """

    def __init__(self, dim, m, r_outer=1.0, r_inner=0.0, degree=12, n_ang=None):
        self.dim, self.m, self.degree = dim, m, degree
        nr = degree // 2 + 2
        xr, wr = np.polynomial.legendre.leggauss(nr)
        r = r_inner + (r_outer - r_inner) * (xr + 1) / 2
        wr = wr * (r_outer - r_inner) / 2 * r ** (dim - 1)
        if dim == 2:
            na = n_ang or degree + 2
            ph = 2 * np.pi * np.arange(na) / na
            dirs = np.stack([np.cos(ph), np.sin(ph)], 1)
            wa = np.full(na, 2 * np.pi / na)
        else:
            nt = degree // 2 + 2
            ct, wt = np.polynomial.legendre.leggauss(nt)
            na = n_ang or degree + 2
            ph = 2 * np.pi * np.arange(na) / na
            st = np.sqrt(1 - ct**2)
            dirs = np.stack([np.outer(st, np.cos(ph)), np.outer(st, np.sin(ph)),
                             np.outer(ct, np.ones(na))], -1).reshape(-1, 3)
            wa = np.outer(wt, np.full(na, 2 * np.pi / na)).reshape(-1)
        self.points = (r[:, None, None] * dirs[None]).reshape(-1, dim)
        self.weights = (wr[:, None] * wa[None]).reshape(-1)
        self.r_inner, self.r_outer = r_inner, r_outer
        self.check_exactness()

    def check_exactness(self):
        """Integrate |x|^{2k} and x_1^{2k} against closed forms up to the stated degree."""
        d, a, b = self.dim, self.r_inner, self.r_outer
        for k in range(self.degree // 2 + 1):
            got = np.sum(self.weights * np.sum(self.points**2, axis=1) ** k)
            area = 2 * np.pi if d == 2 else 4 * np.pi
            ref = area * (b ** (2 * k + d) - a ** (2 * k + d)) / (2 * k + d)
            if abs(got - ref) > 1e-11 * abs(ref):
                raise QuadratureInsufficient(f"radial moment {2 * k} off by {abs(got - ref):.2e}")
            got = np.sum(self.weights * self.points[:, 0] ** (2 * k))
            from scipy.special import gamma as G
            ang = 2 * G(k + 0.5) * G(0.5) ** (d - 1) / G(k + d / 2)
            ref = ang * (b ** (2 * k + d) - a ** (2 * k + d)) / (2 * k + d)
            if abs(got - ref) > 1e-11 * abs(ref):
                raise QuadratureInsufficient(f"axial moment {2 * k} off by {abs(got - ref):.2e}")

    def strain_energy(self, grad_u):
        """(sigma~(u), conj eps~(u)) density from gradients (P, d, d), grad_u[p, i, j] = d_j u_i."""
        m = self.m
        eps = 0.5 * (grad_u + np.swapaxes(grad_u, 1, 2))
        div = np.trace(grad_u, axis1=1, axis2=2)
        return m.lam * np.abs(div) ** 2 + 2 * m.mu * np.sum(np.abs(eps) ** 2, axis=(1, 2))

    def norm_u(self, u, grad_u, s_abs):
        e = self.strain_energy(grad_u) + self.m.rho * s_abs**2 * np.sum(np.abs(u) ** 2, axis=1)
        return float(np.sqrt(np.sum(self.weights * e)))

    def norm_theta(self, th, grad_th, s_abs):
        e = np.sum(np.abs(grad_th) ** 2, axis=1) + s_abs / self.m.kappa * np.abs(th) ** 2
        return float(np.sqrt(np.sum(self.weights * e)))

    def norm_pair(self, u, grad_u, th, grad_th, s_abs):
        return float(np.hypot(self.norm_u(u, grad_u, s_abs), self.norm_theta(th, grad_th, s_abs)))

    def rows(self):
        """Real-linear map (as complex rows) from (u, grad u, theta, grad theta) samples to a vector
        whose squared norm is the |s| = 1 energy norm squared.  Returns a function of
        values (P, d+1) and gradients (P, d+1, d) stacked along a trailing density axis."""
        m, d, w = self.m, self.dim, self.weights
        if m.lam + 2 * m.mu / d < 0:
            raise ValueError("strain energy is indefinite for this material")

        def apply(val, grad):
            sw = np.sqrt(w).reshape((-1,) + (1,) * (val.ndim - 2))
            G = grad[:, :d]
            div = sum(G[:, i, i] for i in range(d))
            out = [np.sqrt(m.lam + 2 * m.mu / d) * sw * div]
            for i in range(d):
                for j in range(d):
                    e = 0.5 * (G[:, i, j] + G[:, j, i]) - (div / d if i == j else 0)
                    out.append(np.sqrt(2 * m.mu) * sw * e)
            for i in range(d):
                out.append(np.sqrt(m.rho) * sw * val[:, i])
                out.append(sw * grad[:, d, i])
            out.append(sw / np.sqrt(m.kappa) * val[:, d])
            return np.concatenate(out, axis=0)
        return apply


def analytic_fields(n, dim, seed=0):
    """``n`` smooth test fields: callables X -> (u, grad u, theta, grad theta)."""
    rng = np.random.default_rng(seed)
    fields = []
    for i in range(n):
        kind = i % 4
        A = rng.normal(size=(dim,)) + 1j * rng.normal(size=(dim,))
        B = rng.normal(size=(dim, dim))
        C = rng.normal(size=(dim, dim, dim)) * 0.3
        k = rng.normal(size=dim) * 0.8 + 0.5j * rng.normal(size=dim)
        a = rng.normal() + 1j * rng.normal()
        b = rng.normal(size=dim)
        Q = rng.normal(size=(dim, dim))
        Q = Q + Q.T

        def f(X, kind=kind, A=A, B=B, C=C, k=k, a=a, b=b, Q=Q):
            P = len(X)
            if kind == 0:            # constant displacement, no temperature
                return (np.tile(A, (P, 1)), np.zeros((P, dim, dim), complex),
                        np.zeros(P, complex), np.zeros((P, dim), complex))
            if kind == 1:            # linear u, quadratic theta
                u = A + X @ B.T
                gu = np.broadcast_to(B, (P, dim, dim)).astype(complex)
                th = a + X @ b + 0.5 * np.einsum("pi,ij,pj->p", X, Q, X)
                gth = b + X @ Q
                return u, gu, th.astype(complex), gth.astype(complex)
            if kind == 2:            # quadratic u
                u = A + np.einsum("ijk,pj,pk->pi", C, X, X)
                gu = np.einsum("ijk,pk->pij", C, X) + np.einsum("ikj,pk->pij", C, X)
                th = a * np.sum(X**2, axis=1)
                return u, gu, th, 2 * a * X
            e = np.exp(X @ k)        # plane-wave-like exponential
            u = e[:, None] * A[None]
            gu = e[:, None, None] * A[None, :, None] * k[None, None, :]
            return u, gu, a * e, a * e[:, None] * k[None]
        fields.append(f)
    return fields


def norm_equivalence_probe(m=DEFAULT_MATERIAL, s_grid=None, n_fields=24, dim=3, seed=0, slack=1e-10):
    """The six energy-norm inequalities on analytic fields over the unit ball."""
    if s_grid is None:
        s_grid = [complex(a, b) for a in (0.3, 1.0, 2.5) for b in (0.0, 2.0, 15.0)]
    ev = EnergyNormEvaluator(dim, m, degree=12)
    fields = analytic_fields(n_fields, dim, seed)
    worst, grid = [], []
    for s in s_grid:
        lp = kernels.LaplacePoint(s)
        a, su = abs(s), lp.sigma_under
        margins = []
        for f in fields:
            u, gu, th, gth = f(ev.points)
            nu_s, nu_1 = ev.norm_u(u, gu, a), ev.norm_u(u, gu, 1.0)
            nt_s, nt_1 = ev.norm_theta(th, gth, a), ev.norm_theta(th, gth, 1.0)
            np_s, np_1 = np.hypot(nu_s, nt_s), np.hypot(nu_1, nt_1)
            pairs = [(su * nu_1, nu_s), (nu_s, a / su * nu_1),
                     (np.sqrt(su) * nt_1, nt_s), (nt_s, np.sqrt(a / su) * nt_1),
                     (su * np_1, np_s), (np_s, a / su**1.5 * np_1)]
            for lo, hi in pairs:
                margins.append((hi - lo) / max(hi, lo, 1e-300))
        worst.append(float(min(margins)))
        grid.append(s)
    ok = min(worst) >= -slack
    return ProbeReport("norm_equivalence", grid, worst, [-slack] * len(grid), slack,
                       {"min_relative_margin": min(worst), "fields": n_fields}, ok, seed)


def scalar_inequality_probe(n=1000, seed=0):
    """sigma_ <= min(1, |s|) and sigma_ max(1, |s|) <= |s| for random s in the right half plane."""
    rng = np.random.default_rng(seed)
    margins, grid = [], []
    for _ in range(n):
        s = complex(10 ** rng.uniform(-3, 2), rng.normal() * 10 ** rng.uniform(-2, 2))
        su = kernels.LaplacePoint(s).sigma_under
        a = abs(s)
        margins.append(min(min(1, a) - su, a - su * max(1, a)))
        grid.append(s)
    return ProbeReport("scalar_inequalities", grid, margins, [0.0] * n, 0.0,
                       {"min_margin": min(margins)}, min(margins) >= 0, seed)


# --- coercivity and norm growth -----------------------------------------------------------

def _zmat(mesh, s, m):
    d = mesh.dim
    z = np.tile(np.r_[np.full(d, np.conj(s)), m.gamma / m.eta if m.eta else 1.0], mesh.size)
    return z


def _wq(mesh):
    return np.repeat(mesh.weights, mesh.dim + 1)


def hermitian_min_eig(M):
    return float(np.min(np.linalg.eigvalsh(0.5 * (M + M.conj().T))))


# traces for the hypersingular operator that resolve grid-scale density modes
FINE_TRACES = TraceConfig(h_factor=0.25, resolve=3.0)


def resolved_basis(mesh, frac=0.25):
    """Orthonormal trigonometric densities of degree <= frac * M on a closed curve, one block per component.

    Nystrom products of a density with the kernel alias near the top of the band,
    so discrete pairings are taken on this resolved subspace.
    """
    if mesh.dim != 2:
        return None
    M = mesh.size
    K = int(frac * M)
    F = np.exp(1j * np.outer(mesh.t, np.arange(-K, K + 1))) / np.sqrt(M)
    return np.kron(F, np.eye(3))


def coercivity_probe(m=PROBE_MATERIAL, mesh=None, s_grid=None, ratio_span=1e3, trace_cfg=FINE_TRACES,
                     band=0.25):
    """Smallest eigenvalue of the Hermitian part of the Z(s)-paired V and W matrices.

    Pairings are restricted to resolved trigonometric densities (see resolved_basis);
    full-space eigenvalues are recorded alongside.
    """
    if mesh is None:
        mesh = geometry.make_mesh("circle", 64)
    if s_grid is None:
        s_grid = [complex(a, b) for a in (0.5, 1.0, 2.0) for b in (0.0, 1.0, 10.0, 50.0)]
    w = _wq(mesh)
    P = resolved_basis(mesh, band)
    vals, full, ratios = [], [], []
    for s in s_grid:
        lp = kernels.LaplacePoint(s)
        Z = _zmat(mesh, s, m)
        V = operators.assemble("V", m, s, mesh).entries
        forms = [V.conj().T * (w * Z)]
        if mesh.dim == 2:
            W = operators.assemble("W", m, s, mesh, trace_cfg).entries
            forms.append((w * Z)[:, None] * W)
        full.append([hermitian_min_eig(H) for H in forms])
        row = [hermitian_min_eig(P.conj().T @ H @ P) if P is not None else f for H, f in zip(forms, full[-1])]
        vals.append(row)
        ratios.append([v / (lp.sigma * lp.sigma_under / abs(s)) for v in row])
    ref = ratios[int(np.argmin([abs(s - 1) for s in s_grid]))]
    spread = max(max(abs(r[k] / ref[k]), abs(ref[k] / r[k])) for r in ratios for k in range(len(r)))
    ok = all(v > 0 for row in vals for v in row)
    return ProbeReport("coercivity", list(s_grid), [min(r) for r in vals], [0.0] * len(vals), 0.0,
                       {"min_eigs": vals, "full_space_min_eigs": full, "ratios": ratios,
                        "ratio_spread": spread, "ratio_within_span": bool(spread <= ratio_span)}, ok,
                       notes="Hermitian part of V^H W_q Z and W_q Z W on resolved densities; positivity asserted exactly")


# theoretical exponents of the |s| growth of each operator norm (sigma = 1)
GROWTH_EXPONENTS = {"Vinv": 4, "Winv": 2, "SVinv": 3, "DWinv": 2, "S": 2, "V": 2, "D": 3, "W": 4,
                    "K2nd": 3, "KP2nd": 4}


def collar_points(mesh, n_r=6, n_ang=None):
    """Energy-norm evaluators on an inner and an outer collar of the unit circle/sphere."""
    out = []
    for a, b in ((0.5, 0.8), (1.2, 1.6)):
        out.append(EnergyNormEvaluator(mesh.dim, None, r_outer=b, r_inner=a, degree=2 * n_r - 4,
                                       n_ang=n_ang or 2 * mesh.size if mesh.dim == 2 else n_ang))
    return out


def _field_rows(kind, m, s, mesh, collars):
    blocks = []
    for ev in collars:
        ev.m = m
        val, gr = potentials.field_matrix(kind, m, s, mesh, ev.points)
        blocks.append(ev.rows()(val, gr))
    return np.concatenate([b.reshape(-1, mesh.ndof) for b in blocks], axis=0)


def operator_norms(m, s, mesh, targets):
    """Largest singular values of the requested operators in the surrogate norms."""
    w = _wq(mesh)
    sq, isq = np.sqrt(w), 1 / np.sqrt(w)
    need = set(targets)
    mats = {}
    if need & {"V", "Vinv", "SVinv"}:
        mats["V"] = operators.assemble("V", m, s, mesh).entries
    if need & {"W", "Winv", "DWinv"}:
        mats["W"] = operators.assemble("W", m, s, mesh).entries
    collars = collar_points(mesh) if need & {"S", "SVinv", "D", "DWinv"} else None
    out = {}
    for t in targets:
        if t == "V":
            A = sq[:, None] * mats["V"] * isq
        elif t == "Vinv":
            A = sq[:, None] * np.linalg.inv(mats["V"]) * isq
        elif t == "W":
            A = sq[:, None] * mats["W"] * isq
        elif t == "Winv":
            A = sq[:, None] * np.linalg.inv(mats["W"]) * isq
        elif t == "S":
            A = _field_rows("S", m, s, mesh, collars) * isq
        elif t == "SVinv":
            A = _field_rows("S", m, s, mesh, collars) @ np.linalg.inv(mats["V"]) * isq
        elif t == "D":
            A = _field_rows("D", m, s, mesh, collars) * isq
        elif t == "DWinv":
            A = _field_rows("D", m, s, mesh, collars) @ np.linalg.inv(mats["W"]) * isq
        elif t == "K2nd":
            A = sq[:, None] * operators.assemble("HALF_MINUS_K", m, s, mesh).entries * isq
        elif t == "KP2nd":
            A = sq[:, None] * operators.assemble("HALF_MINUS_KP", m, s, mesh).entries * isq
        else:
            raise ValueError(f"unknown growth target {t!r}")
        out[t] = float(sla.svdvals(A)[0])
    return out


def norm_growth_probe(targets=tuple(GROWTH_EXPONENTS), m=PROBE_MATERIAL, mesh=None, sigma0=1.0,
                      omegas=None, margin=0.25, safety=10.0):
    """Fitted |s| exponents of operator norms along s = sigma0 + i omega (one report per target)."""
    if mesh is None:
        mesh = geometry.make_mesh("circle", 64)
    if omegas is None:
        omegas = 2.0 ** np.arange(0, 7)
    s_list = [complex(sigma0, w) for w in omegas]
    norms = {t: [] for t in targets}
    for s in s_list:
        got = operator_norms(m, s, mesh, targets)
        for t in targets:
            norms[t].append(got[t])
    reports = []
    a = np.abs(s_list)
    for t in targets:
        p = GROWTH_EXPONENTS[t]
        y = np.array(norms[t])
        phat = fit_exponent(a, y)
        c_ref = y[0] / a[0] ** p
        env = safety * c_ref * a**p
        ok = phat <= p + margin and bool(np.all(y <= env))
        reports.append(ProbeReport(f"growth_{t}", s_list, list(y), list(env), margin,
                                   {"exponent": phat, "bound_exponent": p, "c_ref": c_ref}, ok,
                                   notes="upper bounds only; L2-weighted surrogate norms"))
    return reports


# --- time domain ------------------------------------------------------------------------

def cq_probes(tol=1e-12):
    """BDF1 running sum for 1/s and the BDF2 order for the unit delay."""
    reps = []
    rng = np.random.default_rng(0)
    g = rng.normal(size=65)
    g[:5] = 0
    grid = tdcq.TimeGrid(0.1, 64)
    y = tdcq.cq_convolve(lambda s: 1 / s, grid, tdcq.CQConfig("bdf1"), tdcq.Signal(g, 0.1), hermitian=True)
    ref = 0.1 * np.cumsum(g)
    err = float(np.max(np.abs(y.samples - ref)) / np.max(np.abs(ref)))
    reps.append(ProbeReport("cq_bdf1_integral", [64], [err], [tol], tol, {"error": err}, err <= tol))
    errs, dts = [], []
    for n in (64, 128, 256, 512):
        gr = tdcq.TimeGrid(8.0 / n, n)
        f = tdcq.causal_window(gr.times, 1.0)
        y = tdcq.cq_convolve(lambda s: np.exp(-s), gr, tdcq.CQConfig("bdf2"), tdcq.Signal(f, gr.dt), hermitian=True)
        errs.append(float(np.max(np.abs(y.samples - tdcq.causal_window(gr.times - 1.0, 1.0)))))
        dts.append(gr.dt)
    order = fit_exponent(dts, errs)
    # observed orders of an order-2 scheme scatter around 2 in the third digit
    reps.append(ProbeReport("cq_bdf2_delay_order", dts, errs, [None] * 4, 2.0, {"order": order},
                            round(order, 2) >= 2.0))
    return reps


def td_dirichlet_probe(m=DEFAULT_MATERIAL, n_mesh=32, steps=(64, 128), refine=4, T=16.0, width=1.0,
                       causal_tol=1e-10, min_order=1.0):
    """Manufactured time-domain Dirichlet problem: causality, oracle agreement, dt convergence."""
    mesh = geometry.make_mesh("circle", n_mesh)
    y0, c = np.array([0.2, -0.1]), np.array([1.0, -0.5, 0.7])
    src = tdcq.point_source_symbol(m, 2, y0, c)
    probes = np.array([[2.0, 0.0], [0.0, -2.5], [-1.5, 1.5]])
    runs = {}
    info = {}
    for n in tuple(steps) + (steps[0] * refine,):
        grid = tdcq.TimeGrid(T / n, n)
        cfg = tdcq.CQConfig("bdf2")
        prof = tdcq.causal_window(grid.times, T / 4, width)
        sig = tdcq.Signal(prof[:, None], grid.dt)
        data = tdcq.cq_convolve(lambda s: src(mesh.nodes)(s)[:, None], grid, cfg, sig, hermitian=True)
        orc = tdcq.cq_convolve(lambda s: src(probes)(s)[:, None], grid, cfg, sig, hermitian=True)
        _, fld = tdcq.cq_solve_bvp("dirichlet", m, mesh, grid, cfg, data, probes)
        u = fld.samples
        pk = np.max(np.abs(u))
        info[n] = {"pre_onset": float(np.max(np.abs(u[: n // 4 + 1])) / pk),
                   "oracle_error": float(np.max(np.abs(u - orc.samples.reshape(u.shape))) / pk)}
        runs[n] = u
    ref_n = steps[0] * refine
    ref = runs[ref_n]
    errs = [float(np.max(np.abs(runs[n] - ref[:: ref_n // n])) / np.max(np.abs(ref))) for n in steps]
    order = float(np.log2(errs[0] / errs[1]))
    causal = info[steps[0]]["pre_onset"]
    ok = causal <= causal_tol and order >= min_order
    return ProbeReport("td_dirichlet", list(steps), errs, [None] * len(errs), causal_tol,
                       {"order": order, "runs": info}, ok)
