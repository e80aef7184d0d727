"""Multistep convolution quadrature (CQ) and the time-domain solvers built on it.

For a Laplace symbol A(s) and causal samples g_0..g_N the CQ output is

    y_n = sum_{j<=n} w_{n-j} g_j,   A(delta(zeta)/dt) = sum_n w_n zeta^n,

with delta(zeta) = 1 - zeta (BDF1) or (1 - zeta) + (1 - zeta)^2/2 (BDF2).
All outputs are computed at once: the data are scaled by rho^n and
transformed by an FFT of length L, the symbol is applied at the L contour
points s_l = delta(rho exp(-2 pi i l/L))/dt, and the result is transformed
back and unscaled.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline
from scipy.special import gamma as gamma_fn

from . import kernels, layers, operators, traces
from .errors import DomainError, SingularMatrix, SymbolEvaluationFailed, ThermoError

SCHEMES = ("bdf1", "bdf2")


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise DomainError(f"time step must be positive, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def T(self):
        return self.dt * self.n_steps

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class CQConfig:
    """Scheme and contour.  Defaults: L = 4 (N+1) points, rho^(L+N) = eps.

    With these defaults aliasing (~rho^L) and amplified roundoff
    (~eps rho^-N) balance at about eps^0.8.
    """
    scheme: str = "bdf2"
    contour_radius: float = None
    oversampling: int = None
    threads: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.contour_radius is not None and not (0 < self.contour_radius < 1):
            raise DomainError("contour radius must lie in (0, 1)")

    def frequencies(self, grid):
        L = self.oversampling if self.oversampling is not None else 4 * (grid.n_steps + 1)
        if L < grid.n_steps + 1:
            raise DomainError(f"need at least n_steps+1 = {grid.n_steps + 1} frequencies, got {L}")
        return L

    def radius(self, grid):
        if self.contour_radius is not None:
            rho = self.contour_radius
        else:
            rho = np.finfo(float).eps ** (1.0 / (self.frequencies(grid) + grid.n_steps))
        if rho ** grid.n_steps < 1e-300:
            raise DomainError("contour radius underflows over the time grid")
        return rho


@dataclass
class Signal:
    """Samples at t_n = n dt, n = 0..n_steps, leading axis time."""
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("signal samples must be finite")

    @property
    def onset(self):
        nz = np.nonzero(np.any(self.samples.reshape(len(self.samples), -1) != 0, axis=1))[0]
        return int(nz[0]) if len(nz) else len(self.samples)

    @property
    def times(self):
        return self.dt * np.arange(len(self.samples))


def delta(scheme, zeta):
    """Generating polynomial of the BDF scheme."""
    w = 1 - np.asarray(zeta)
    if scheme == "bdf1":
        return w
    if scheme == "bdf2":
        return w + 0.5 * w * w
    raise DomainError(f"unknown scheme {scheme!r}")


def contour_points(grid, cfg):
    L = cfg.frequencies(grid)
    rho = cfg.radius(grid)
    zeta = rho * np.exp(-2j * np.pi * np.arange(L) / L)
    return zeta, delta(cfg.scheme, zeta) / grid.dt


def cq_nodes(grid, cfg):
    """The L Laplace points at which the symbol is evaluated."""
    return [kernels.LaplacePoint(s) for s in contour_points(grid, cfg)[1]]


def _forward(data, L, rho):
    n = data.shape[0]
    scale = rho ** np.arange(n)
    x = np.zeros((L,) + data.shape[1:], dtype=complex)
    x[:n] = data * scale.reshape((-1,) + (1,) * (data.ndim - 1))
    return np.fft.fft(x, axis=0)


def _inverse(yhat, n, rho):
    y = np.fft.ifft(yhat, axis=0)[:n]
    return y / (rho ** np.arange(n)).reshape((-1,) + (1,) * (y.ndim - 1))


def _apply_matrix(A, x):
    A = np.asarray(A)
    return A * x if A.ndim == 0 else A @ x


def frequency_loop(apply, s_list, ghat, hermitian=False, threads=1):
    """yhat_l = apply(s_l, ghat_l); with ``hermitian`` only half the points are visited.

    ``hermitian`` asserts A(conj s) = conj A(s) and real data, so that
    yhat_{L-l} = conj(yhat_l).
    """
    L = len(s_list)
    idx = list(range(L // 2 + 1)) if hermitian else list(range(L))

    def one(l):
        try:
            return np.asarray(apply(s_list[l], ghat[l]), dtype=complex)
        except ThermoError as exc:
            raise SymbolEvaluationFailed(l, s_list[l], exc) from exc
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise SymbolEvaluationFailed(l, s_list[l], exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            vals = list(ex.map(one, idx))
    else:
        vals = [one(l) for l in idx]
    out = np.zeros((L,) + vals[0].shape, dtype=complex)
    for l, v in zip(idx, vals):
        out[l] = v
    if hermitian:
        for l in range(L // 2 + 1, L):
            out[l] = np.conj(out[L - l])
    return out


def cq_convolve(symbol, grid, cfg, data, apply=False, hermitian=None):
    """CQ of a symbol against causal data (Signal, samples on grid.times).

    ``symbol(s)`` returns a scalar or a matrix; with ``apply=True`` it is
    called as ``symbol(s, x)`` and returns A(s) x.
    """
    g = np.asarray(data.samples)
    if g.shape[0] != grid.n_steps + 1:
        raise DomainError(f"signal has {g.shape[0]} samples, grid needs {grid.n_steps + 1}")
    L = cfg.frequencies(grid)
    rho = cfg.radius(grid)
    _, s = contour_points(grid, cfg)
    ghat = _forward(g, L, rho)
    if hermitian is None:
        hermitian = False
    hermitian = hermitian and np.isrealobj(g)
    fn = symbol if apply else (lambda sl, x: _apply_matrix(symbol(sl), x))
    yhat = frequency_loop(fn, s, ghat, hermitian, cfg.threads)
    y = _inverse(yhat, g.shape[0], rho)
    if hermitian:
        y = y.real
    return Signal(y, grid.dt)


# --- time-domain boundary value problems ----------------------------------------

def _frequency_solver(problem, m, mesh, probes, trace_cfg, cutoff):
    """Map (s, boundary data) to (density, field at probes) for one frequency."""
    pot = {"dirichlet": ("V", "S", 1.0), "neumann": ("W", "D", -1.0)}[problem]

    def solve(s, rhs):
        A = operators.assemble(pot[0], m, s, mesh, trace_cfg, cutoff)
        lu, piv = sla.lu_factor(A.entries)
        if np.min(np.abs(np.diag(lu))) < 1e-300:
            raise SingularMatrix(f"{pot[0]} is singular at s={s}")
        dens = pot[2] * sla.lu_solve((lu, piv), rhs)
        out = [dens]
        if len(probes):
            kc = kernels.kernel_coeffs(mesh.dim, m, s)
            u, _ = layers.field(pot[1], kc, mesh, dens.reshape(-1, mesh.dim + 1), probes)
            out.append(u.reshape(-1))
        return np.concatenate(out)

    return solve


def cq_solve_bvp(problem, m, mesh, grid, cfg, data, probes=(), trace_cfg=None):
    """Time-domain exterior Dirichlet (via V) or Neumann (via W) problem.

    ``data`` holds boundary samples (n_steps+1, ndof).  Returns the density
    Signal and the field Signal (n_steps+1, P, d+1) at the probe points.
    The Neumann density solves W phi = -g so that D phi has traction g.
    """
    if problem not in ("dirichlet", "neumann"):
        raise DomainError(f"problem must be dirichlet or neumann, got {problem!r}")
    probes = np.asarray(probes, dtype=float).reshape(-1, mesh.dim)
    g = np.asarray(data.samples)
    if g.ndim != 2 or g.shape[1] != mesh.ndof:
        raise DomainError(f"boundary data must have shape (n_steps+1, {mesh.ndof})")
    # one discretization for all frequencies keeps the discrete symbol analytic in s
    _, s_list = contour_points(grid, cfg)
    cutoff = max(operators.cutoff_scale(kernels.kernel_coeffs(mesh.dim, m, s)) for s in s_list)
    solve = _frequency_solver(problem, m, mesh, probes, trace_cfg or traces.TraceConfig(), cutoff)
    out = cq_convolve(solve, grid, cfg, data, apply=True, hermitian=True)
    y = out.samples
    k = mesh.ndof
    dens = Signal(y[:, :k], grid.dt)
    field = Signal(y[:, k:].reshape(len(y), len(probes), mesh.dim + 1), grid.dt)
    return dens, field


def point_source_symbol(m, dim, y0, c):
    """s -> E(x, y0; s) c at fixed points x, as a function building the matrix."""
    y0 = np.asarray(y0, dtype=float)
    c = np.asarray(c, dtype=complex)

    def at(X):
        X = np.atleast_2d(X)

        def sym(s):
            kc = kernels.kernel_coeffs(dim, m, s)
            return (kernels.kernel_tensors(kc, X - y0, 0)[0] @ c).reshape(-1)
        return sym
    return at


# --- time-domain bound quantities ---------------------------------------------------

def c_eps(eps, t):
    """C_eps(t) = Gamma(eps/2) / (2 sqrt(pi) Gamma((eps+1)/2)) * (t/(1+t))^eps."""
    if not (0 < eps <= 1):
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    pre = gamma_fn(eps / 2) / (2 * math.sqrt(math.pi) * gamma_fn((eps + 1) / 2))
    return pre * (t / (1 + t)) ** eps


def p2_signal(g, t, derivatives=None):
    """P_2 g = g + 2 g' + g''.

    ``g`` is either sampled values on the times ``t`` (differentiated with a
    cubic spline) or a callable; for a callable, ``derivatives`` gives
    (g', g'') as callables.
    """
    t = np.asarray(t, dtype=float)
    if callable(g):
        if derivatives is None or len(derivatives) != 2:
            raise DomainError("closed-form P_2 needs the callables (g', g'')")
        return g(t) + 2 * derivatives[0](t) + derivatives[1](t)
    g = np.asarray(g)
    if g.shape[0] != t.shape[0]:
        raise DomainError("samples and times differ in length")
    sp = CubicSpline(t, g, axis=0)
    return g + 2 * sp(t, 1) + sp(t, 2)


def p2_integral(norms, t, upper=1.0):
    """Trapezoidal integral of sampled norms ||P_2 g^(m)(tau)|| over [0, upper]."""
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = t <= upper + 1e-14
    return float(np.trapezoid(norms[keep], t[keep]))


def class_bound(t, mu, c_a, integral):
    """2^mu C_eps(t) C_A(1/t) * integral, eps = 1 - mu, for a class symbol with constant C_A."""
    if not (0 <= mu < 1):
        raise DomainError(f"mu must lie in [0, 1), got {mu}")
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        ca = np.where(t > 0, c_a(1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return 2**mu * c_eps(1 - mu, t) * ca * integral


def causal_window(t, onset, width=1.0, power=6):
    """Smooth causal profile ((t-onset)/width)^power exp(-(t-onset)/width), zero before onset."""
    x = np.maximum(np.asarray(t, dtype=float) - onset, 0.0) / width
    return x**power * np.exp(-x) / (power**power * np.exp(-power))
