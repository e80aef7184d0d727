"""Boundary traces of layer potentials by off-surface polynomial extrapolation.

A trace at node x_i is the limit of the potential (or of its conormal
derivative R_N) at x_i -/+ h n_i as h -> 0.  The potential is sampled at the
equispaced heights h_j = j h_1, j = 1..levels, with h_1 a multiple of the
local mesh spacing, and the samples are extrapolated to h = 0 by Lagrange
interpolation.  The near-singular boundary integrals at these points use a
Fourier-upsampled density on a grid fine enough to resolve the smallest h.
"""
from dataclasses import dataclass

import numpy as np

from . import layers
from .errors import DomainError, ExtrapolationDiverged

SIDES = {"interior": -1.0, "exterior": 1.0}


@dataclass(frozen=True)
class TraceConfig:
    h_factor: float = 1.0    # smallest height in local mesh spacings
    levels: int = 8
    upsample: int = None
    resolve: float = 5.0     # fine spacings per smallest height

    def heights(self, mesh):
        base = self.h_factor * mesh.spacing
        return [base * (j + 1) for j in range(self.levels)]

    def upsampling(self, mesh):
        if self.upsample is not None:
            return self.upsample
        sp = mesh.spacing
        hmin = self.h_factor * np.min(sp)
        return int(np.ceil(self.resolve * np.max(sp) / hmin - 1e-9))


def extrapolation_weights(levels):
    """Lagrange weights at 0 for the nodes 1, 2, ..., levels."""
    h = np.arange(1.0, levels + 1)
    w = np.ones(levels)
    for j in range(levels):
        for k in range(levels):
            if k != j:
                w[j] *= -h[k] / (h[j] - h[k])
    return w


def extrapolate(samples):
    """Extrapolate arrays sampled at h_1, 2 h_1, ... to h = 0.

    Raises ExtrapolationDiverged when the estimates from the first k samples
    grow apart instead of settling as k increases.
    """
    L = len(samples)
    est = []
    for k in range(2, L + 1):
        w = extrapolation_weights(k)
        est.append(sum(wj * sj for wj, sj in zip(w, samples[:k])))
    if len(est) >= 3:
        first = np.max(np.abs(est[1] - est[0]))
        last = np.max(np.abs(est[-1] - est[-2]))
        scale = max(np.max(np.abs(est[-1])), np.max(np.abs(samples[0])))
        if last > first and last > 1e-8 * scale:
            raise ExtrapolationDiverged(f"extrapolation not contracting ({last:.3e} > {first:.3e})")
    return est[-1]


def conormal_rows(kc, val, grad, n):
    """Apply R_N = [[T, -gamma n], [0, d_n]] at targets with normals n.

    val has shape (T, 3, ...) and grad (T, 3, 2, ...); trailing axes are carried.
    """
    m = kc.material
    extra = val.ndim - 2
    nn = n.reshape(n.shape + (1,) * extra)
    G = grad[:, :2]                          # (T, a, l, ...)
    div = G[:, 0, 0] + G[:, 1, 1]
    out = np.empty_like(val)
    for a in range(2):
        out[:, a] = (m.lam * div * nn[:, a] + m.mu * sum((G[:, a, l] + G[:, l, a]) * nn[:, l] for l in range(2))
                     - m.gamma * val[:, 2] * nn[:, a])
    out[:, 2] = sum(grad[:, 2, l] * nn[:, l] for l in range(2))
    return out


def _trace_samples(kind, which, side, kc, mesh, cfg, evaluate):
    if mesh.dim != 2:
        raise DomainError("extrapolated traces are implemented for 2D curves only")
    sign = SIDES[side]
    samples = []
    for h in cfg.heights(mesh):
        X = mesh.nodes + sign * h[:, None] * mesh.normals
        val, grad = evaluate(X, which == "traction")
        samples.append(val if which == "value" else conormal_rows(kc, val, grad, mesh.normals))
    return extrapolate(samples)


def trace_matrix(kind, which, side, kc, mesh, cfg=TraceConfig()):
    """Matrix (3M x 3M) of the one-sided trace of potential ``kind``."""
    p = cfg.upsampling(mesh)

    def evaluate(X, grad):
        return layers.curve_field_matrix(kind, kc, mesh, X, p, grad)

    T = _trace_samples(kind, which, side, kc, mesh, cfg, evaluate)
    M = mesh.size
    return T.reshape(3 * M, 3 * M)


def trace_matrix_average(kind, which, kc, mesh, cfg=TraceConfig()):
    """Average of the interior and exterior traces, from one batched evaluation."""
    p = cfg.upsampling(mesh)
    hs = cfg.heights(mesh)
    L = len(hs)
    X = np.concatenate([mesh.nodes + sg * h[:, None] * mesh.normals for sg in (-1.0, 1.0) for h in hs])
    val, grad = layers.curve_field_matrix(kind, kc, mesh, X, p, which == "traction")
    M = mesh.size
    nrm = np.tile(mesh.normals, (2 * L, 1))
    rows = val if which == "value" else conormal_rows(kc, val, grad, nrm)
    rows = rows.reshape(2, L, M, 3, M, 3)
    T = 0.5 * (extrapolate(list(rows[0])) + extrapolate(list(rows[1])))
    return T.reshape(3 * M, 3 * M)


def trace_of_density(kind, which, side, kc, mesh, dens, cfg=TraceConfig()):
    """One-sided trace (M, 3) of the potential of a node-major density (M, 3)."""
    return traces_of_density(kind, side, kc, mesh, dens, cfg, which == "traction")[which]


def traces_of_density(kind, side, kc, mesh, dens, cfg=TraceConfig(), traction=True):
    """Value and (optionally) traction traces from one set of off-surface samples."""
    if mesh.dim != 2:
        raise DomainError("extrapolated traces are implemented for 2D curves only")
    p = cfg.upsampling(mesh)
    hs = cfg.heights(mesh)
    L = len(hs)
    sign = SIDES[side]
    X = np.concatenate([mesh.nodes + sign * h[:, None] * mesh.normals for h in hs])
    val, grad = layers.curve_field(kind, kc, mesh, dens, X, traction, p)
    M = mesh.size
    out = {"value": extrapolate(list(val.reshape(L, M, 3)))}
    if traction:
        t = conormal_rows(kc, val, grad, np.tile(mesh.normals, (L, 1)))
        out["traction"] = extrapolate(list(t.reshape(L, M, 3)))
    return out
