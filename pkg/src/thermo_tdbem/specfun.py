"""Modified Bessel functions and derivative stacks of the radial kernels.

Two representations of a radial kernel g(r) are used.  ``radial_derivatives``
returns plain radial derivatives g, g', g'', g'''.  The kernel modules work with
the reduced stack F_m = (r^{-1} d/dr)^m g, because Cartesian derivatives of a
radial function take the simple form

    d_i g        = F_1 r_i
    d_ij g       = F_2 r_i r_j + F_1 delta_ij
    d_ijk g      = F_3 r_i r_j r_k + F_2 (delta_ij r_k + delta_ik r_j + delta_jk r_i)

and so on, with r the (unnormalized) separation vector.  For the kernels at
hand F_m has a closed form in terms of K_m (2D) or the reverse Bessel
polynomials (3D).
"""
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi

# coefficients of the reverse Bessel polynomials theta_m(z), lowest power first
_REVERSE_BESSEL = [
    [1.0],
    [1.0, 1.0],
    [3.0, 3.0, 1.0],
    [15.0, 15.0, 6.0, 1.0],
    [105.0, 105.0, 45.0, 10.0, 1.0],
    [945.0, 945.0, 420.0, 105.0, 15.0, 1.0],
]


def modified_bessel_k(order, z):
    """K_0(z) or K_1(z) for complex z with Re z > 0."""
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0) or np.any(z.real <= 0):
        raise DomainError("modified_bessel_k needs Re z > 0")
    out = special.kv(order, z)
    return out[()] if out.ndim == 0 else out


def bessel_k_stack(z, mmax):
    """K_0..K_mmax at z, shape (mmax+1,) + z.shape, by upward recurrence."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((mmax + 1,) + z.shape, dtype=complex)
    out[0] = special.kv(0, z)
    if mmax >= 1:
        out[1] = special.kv(1, z)
    for m in range(1, mmax):
        out[m + 1] = out[m - 1] + (2.0 * m / z) * out[m]
    return out


def bessel_i_scaled_stack(z, mmax):
    """I_m(z)/z^m for m = 0..mmax (entire functions of z^2)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((mmax + 1,) + z.shape, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    for m in range(mmax + 1):
        big = special.iv(m, zs) / zs**m
        # two-term series near the origin, where dividing by z^m loses accuracy
        c0 = 1.0 / (2.0**m * special.factorial(m))
        ser = c0 * (1.0 + z * z / (4.0 * (m + 1)))
        out[m] = np.where(small, ser, big)
    return out


@dataclass(frozen=True)
class RadialDerivs:
    f0: complex
    f1: complex
    f2: complex
    f3: complex


def _check_args(lam, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    lam = complex(lam)
    if lam.real <= 0:
        raise DomainError("decay parameter needs Re > 0")
    return lam, r


def reduced_stack(dim, lam, r, mmax):
    """F_m = (r^{-1} d/dr)^m g for m = 0..mmax; shape (mmax+1,) + r.shape.

    3D: g = exp(-lam r)/(4 pi r), F_m = (-1)^m exp(-lam r) theta_m(lam r)/(4 pi r^{2m+1}).
    2D: g = K_0(lam r)/(2 pi),    F_m = (-lam/r)^m K_m(lam r)/(2 pi).
    """
    r = np.asarray(r, dtype=float)
    if dim == 3:
        z = lam * r
        e = np.exp(-z) / (FOUR_PI * r)
        out = np.empty((mmax + 1,) + r.shape, dtype=complex)
        rinv2 = 1.0 / (r * r)
        scale = e
        for m in range(mmax + 1):
            out[m] = scale * np.polynomial.polynomial.polyval(z, _REVERSE_BESSEL[m])
            scale = -scale * rinv2
        return out
    if dim == 2:
        ks = bessel_k_stack(lam * r, mmax)
        fac = -lam / r
        out = ks / TWO_PI
        p = np.ones_like(fac)
        for m in range(1, mmax + 1):
            p = p * fac
            out[m] = out[m] * p
        return out
    raise DomainError(f"dim must be 2 or 3, got {dim}")


def reduced_stack_log_part(lam, r, mmax):
    """Stack for f(r) = -I_0(lam r)/(4 pi), the coefficient of log(r^2) in K_0(lam r)/(2 pi).

    F_m = -(lam^2)^m (I_m(z)/z^m)/(4 pi) with z = lam r; finite at r = 0.
    """
    r = np.asarray(r, dtype=float)
    st = bessel_i_scaled_stack(lam * r, mmax)
    lam2 = lam * lam
    out = np.empty_like(st)
    for m in range(mmax + 1):
        out[m] = -(lam2**m) * st[m] / FOUR_PI
    return out


def radial_derivatives(dim, lam, r):
    """g, g', g'', g''' of the radial kernel at radius r."""
    lam, r = _check_args(lam, r)
    F = reduced_stack(dim, lam, r, 3)
    # g' = r F1, g'' = F1 + r^2 F2, g''' = 3 r F2 + r^3 F3
    f0 = F[0]
    f1 = r * F[1]
    f2 = F[1] + r * r * F[2]
    f3 = 3 * r * F[2] + r**3 * F[3]
    if np.ndim(r) == 0:
        return RadialDerivs(complex(f0), complex(f1), complex(f2), complex(f3))
    return RadialDerivs(f0, f1, f2, f3)
