"""Layer potentials S, D, Q_DN, Q_ND off the boundary and their boundary traces."""
from dataclasses import dataclass

import numpy as np

from . import kernels, layers, traces
from .errors import DomainError, PointTooClose, TagMismatch
from .operators import Density

# space tag of the density each potential consumes
DENSITY_SPACE = {"S": "minus_half", "QDN": "minus_half", "D": "plus_half", "QND": "plus_half"}
TRACE_SPACE = {"value": "plus_half", "traction": "minus_half"}


@dataclass(frozen=True)
class FieldSample:
    point: np.ndarray
    value: np.ndarray       # (d+1,) complex: (u, theta)
    gradient: np.ndarray    # (d+1, d) complex

    def __post_init__(self):
        if not (np.all(np.isfinite(self.value)) and np.all(np.isfinite(self.gradient))):
            raise DomainError(f"non-finite field at {self.point}")


def _check_density(kind, mesh, density):
    if kind not in DENSITY_SPACE:
        raise DomainError(f"unknown potential kind {kind!r}")
    if density.space != DENSITY_SPACE[kind]:
        raise TagMismatch(f"{kind} takes a {DENSITY_SPACE[kind]} density, got {density.space}")
    if density.values.shape != (mesh.ndof,):
        raise TagMismatch(f"density has {density.values.shape[0]} entries, mesh has {mesh.ndof} dofs")


def check_clearance(mesh, X, factor=1.0):
    """Raise PointTooClose if a point is nearer than ``factor`` local spacings to a node."""
    d = np.linalg.norm(X[:, None, :] - mesh.nodes[None, :, :], axis=-1)
    j = np.argmin(d, axis=1)
    dist = d[np.arange(len(X)), j]
    bad = dist < factor * mesh.spacing[j] * (1 - 1e-9)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise PointTooClose(f"point {X[k]} is {dist[k]:.3e} from the boundary "
                            f"(local spacing {mesh.spacing[j[k]]:.3e}); use boundary traces")


def field_arrays(kind, m, s, mesh, density, points, grad=True):
    """Values (T, d+1) and gradients (T, d+1, d) of a layer potential."""
    _check_density(kind, mesh, density)
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != mesh.dim:
        raise DomainError(f"points must have {mesh.dim} coordinates")
    check_clearance(mesh, X)
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    return layers.field(kind, kc, mesh, density.nodal(mesh.dim), X, grad)


def eval_potential(kind, m, s, mesh, density, points):
    """List of FieldSample of potential ``kind`` at points off the boundary."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    val, gr = field_arrays(kind, m, s, mesh, density, X, grad=True)
    return [FieldSample(X[i], val[i], gr[i]) for i in range(len(X))]


def boundary_trace_extrapolated(kind, which, side, m, s, mesh, density, cfg=None):
    """Interior or exterior value/traction trace of S or D as a Density."""
    if kind not in ("S", "D"):
        raise DomainError("boundary traces are available for S and D")
    if which not in TRACE_SPACE:
        raise DomainError(f"which must be 'value' or 'traction', got {which!r}")
    if side not in traces.SIDES:
        raise DomainError(f"side must be 'interior' or 'exterior', got {side!r}")
    _check_density(kind, mesh, density)
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    tr = traces.trace_of_density(kind, which, side, kc, mesh, density.nodal(mesh.dim),
                                 cfg or traces.TraceConfig())
    return Density(tr.reshape(-1), TRACE_SPACE[which])


def jumps(kind, m, s, mesh, density, cfg=None):
    """Interior minus exterior value and traction traces, (M, d+1) each."""
    _check_density(kind, mesh, density)
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    cfg = cfg or traces.TraceConfig()
    dens = density.nodal(mesh.dim)
    ti = traces.traces_of_density(kind, "interior", kc, mesh, dens, cfg)
    te = traces.traces_of_density(kind, "exterior", kc, mesh, dens, cfg)
    return ti["value"] - te["value"], ti["traction"] - te["traction"]


def field_matrix(kind, m, s, mesh, points):
    """Linear maps from densities to field values (T, d+1, ndof) and gradients (T, d+1, d, ndof)."""
    if kind not in DENSITY_SPACE:
        raise DomainError(f"unknown potential kind {kind!r}")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    check_clearance(mesh, X)
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    T, d = len(X), mesh.dim
    if d == 2:
        val, gr = layers.curve_field_matrix(kind, kc, mesh, X, layers.upsampling_for(mesh, X), True)
    else:
        val, gr = layers.panel_field_matrix(kind, kc, mesh, X, True)
    return val.reshape(T, d + 1, mesh.ndof), gr.reshape(T, d + 1, d, mesh.ndof)
