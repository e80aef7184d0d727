"""Compiled pair loop for the 2D layer kernels.

Evaluates S and D kernels (and their x-gradients) for all target/source pairs
without forming the intermediate tensor arrays of ``kernels``.  K_0 and K_1
come from a power series for |lam r| < 2 and, beyond, from piecewise
Chebyshev tables of exp(z) K_nu(z) along the ray z = lam r built with scipy.
"""
import numba as nb
import numpy as np
from scipy import fft as sfft
from scipy import special

NCHEB = 22
SERIES_RADIUS = 2.0
EULER = 0.5772156649015329


class BesselTable:
    """exp(z) K_0(z), exp(z) K_1(z) on z = lam r, r in [r0 2^p, r0 2^{p+1}]."""

    def __init__(self, lams, rmax):
        lams = np.asarray(lams, dtype=complex)
        self.r0 = SERIES_RADIUS / np.abs(lams)
        npan = np.maximum(1, np.ceil(np.log2(np.maximum(rmax / self.r0, 1.0)) + 1e-12)).astype(int)
        P = int(np.max(npan))
        self.coef = np.zeros((len(lams), 2, P, NCHEB), dtype=complex)
        j = np.arange(NCHEB)
        x = np.cos(np.pi * (j + 0.5) / NCHEB)
        for k, lam in enumerate(lams):
            for p in range(npan[k]):
                a = self.r0[k] * 2.0**p
                b = 2 * a
                z = lam * (0.5 * (a + b) + 0.5 * (b - a) * x)
                for nu in range(2):
                    v = special.kve(nu, z)
                    c = sfft.dct(v.real, type=2) / NCHEB + 1j * sfft.dct(v.imag, type=2) / NCHEB
                    c[0] *= 0.5
                    self.coef[k, nu, p] = c
        self.lams = lams
        self.rmax = self.r0 * 2.0**npan


@nb.njit(cache=True)
def _k01(lam, r, r0, coef):
    z = lam * r
    if r < r0:
        t = 0.25 * z * z
        lg = np.log(0.5 * z) + EULER
        term = 1.0 + 0j
        i0 = term
        ser0 = 0j
        i1 = 0.5 * z
        ser1 = 0j
        h = 0.0
        k = 0
        # K1 = 1/z + log(z/2) I1 - (z/4) sum (psi(k+1) + psi(k+2)) t^k/(k!(k+1)!)
        psi_sum = -2 * EULER + 1.0
        tk = 1.0 + 0j
        ser1 = psi_sum * tk
        while k < 30:
            k += 1
            h += 1.0 / k
            term = term * t / (k * k)
            i0 += term
            ser0 += term * h
            tk = tk * t / (k * (k + 1))
            i1 += 0.5 * z * tk
            psi_sum = -2 * EULER + 2 * h + 1.0 / (k + 1)
            ser1 += psi_sum * tk
            if abs(term) < 1e-17 * abs(i0) and abs(tk) < 1e-17:
                break
        k0 = -lg * i0 + ser0
        k1 = 1.0 / z + (lg - EULER) * i1 - 0.25 * z * ser1
        return k0, k1
    p = int(np.floor(np.log2(r / r0)))
    if p >= coef.shape[1]:
        p = coef.shape[1] - 1
    a = r0 * 2.0**p
    u = (r - 1.5 * a) / (0.5 * a)
    e = np.exp(-z)
    out0 = 0j
    out1 = 0j
    for nu in range(2):
        b1 = 0j
        b2 = 0j
        for j in range(coef.shape[2] - 1, 0, -1):
            b0 = coef[nu, p, j] + 2 * u * b1 - b2
            b2 = b1
            b1 = b0
        v = coef[nu, p, 0] + u * b1 - b2
        if nu == 0:
            out0 = v * e
        else:
            out1 = v * e
    return out0, out1


@nb.njit(cache=True)
def _rt(F, n, r, i, j, k, l):
    """Entry of the n-th Cartesian derivative tensor of a radial function."""
    if n == 0:
        return F[0]
    if n == 1:
        return F[1] * r[i]
    dij = 1.0 if i == j else 0.0
    if n == 2:
        return F[2] * r[i] * r[j] + F[1] * dij
    dik = 1.0 if i == k else 0.0
    djk = 1.0 if j == k else 0.0
    if n == 3:
        return F[3] * r[i] * r[j] * r[k] + F[2] * (dij * r[k] + dik * r[j] + djk * r[i])
    dil = 1.0 if i == l else 0.0
    djl = 1.0 if j == l else 0.0
    dkl = 1.0 if k == l else 0.0
    return (F[4] * r[i] * r[j] * r[k] * r[l]
            + F[3] * (dij * r[k] * r[l] + dik * r[j] * r[l] + dil * r[j] * r[k]
                      + djk * r[i] * r[l] + djl * r[i] * r[k] + dkl * r[i] * r[j])
            + F[2] * (dij * dkl + dik * djl + dil * djk))


@nb.njit(cache=True)
def _tensors(Sa, Sb, Sc, Sd, Se, q, r, E, dE, d2E):
    # E and its first q x-derivatives at separation r
    for a in range(2):
        for b in range(2):
            E[a, b] = _rt(Sa, 2, r, a, b, -1, -1)
        E[a, a] += Sb[0]
        E[a, 2] = Sc[1] * r[a]
        E[2, a] = Sd[1] * r[a]
    E[2, 2] = Se[0]
    if q < 1:
        return
    for l in range(2):
        for a in range(2):
            for b in range(a, 2):
                v = _rt(Sa, 3, r, a, b, l, -1)
                dE[a, b, l] = v
                dE[b, a, l] = v
            dE[a, a, l] += Sb[1] * r[l]
            dE[a, 2, l] = _rt(Sc, 2, r, a, l, -1, -1)
            dE[2, a, l] = _rt(Sd, 2, r, a, l, -1, -1)
        dE[2, 2, l] = Se[1] * r[l]
    if q < 2:
        return
    for l in range(2):
        for m in range(l, 2):
            for a in range(2):
                for b in range(a, 2):
                    v = _rt(Sa, 4, r, a, b, l, m)
                    d2E[a, b, l, m] = v
                    d2E[b, a, l, m] = v
                    d2E[a, b, m, l] = v
                    d2E[b, a, m, l] = v
                v = _rt(Sb, 2, r, l, m, -1, -1)
                d2E[a, a, l, m] += v
                if m != l:
                    d2E[a, a, m, l] += v
                v = _rt(Sc, 3, r, a, l, m, -1)
                d2E[a, 2, l, m] = v
                d2E[a, 2, m, l] = v
                v = _rt(Sd, 3, r, a, l, m, -1)
                d2E[2, a, l, m] = v
                d2E[2, a, m, l] = v
            v = _rt(Se, 2, r, l, m, -1, -1)
            d2E[2, 2, l, m] = v
            d2E[2, 2, m, l] = v


@nb.njit(cache=True)
def _dl(E, dE, n, lam_, mu, seta, out):
    # double-layer kernel rows from E (3, 3) and dE (3, 3, 2)
    for i in range(3):
        g00 = -dE[i, 0, 0]
        g01 = -dE[i, 0, 1]
        g10 = -dE[i, 1, 0]
        g11 = -dE[i, 1, 1]
        div = g00 + g11
        th = seta * E[i, 2]
        out[i, 0] = lam_ * div * n[0] + mu * (2 * g00 * n[0] + (g01 + g10) * n[1]) + th * n[0]
        out[i, 1] = lam_ * div * n[1] + mu * ((g10 + g01) * n[0] + 2 * g11 * n[1]) + th * n[1]
        out[i, 2] = -(dE[i, 2, 0] * n[0] + dE[i, 2, 1] * n[1])


@nb.njit(cache=True)
def pair_kernels(kind, grad, X, Y, NY, W, lams, coefs, r0s, ca, b3, cc, cd, ce,
                 lam_, mu, seta, val, gval):
    """Fill val[t, s, a, b] (and gval[t, s, a, b, l]) with weighted kernel entries.

    kind 0: single layer E; kind 1: double layer (R*_{N_y} E^T)^T.
    """
    T = X.shape[0]
    S = Y.shape[0]
    q = kind + (1 if grad else 0)
    mmax = 2 + q
    F = np.zeros((3, 5), dtype=np.complex128)
    Sa = np.zeros(5, dtype=np.complex128)
    Sb = np.zeros(5, dtype=np.complex128)
    Sc = np.zeros(5, dtype=np.complex128)
    Sd = np.zeros(5, dtype=np.complex128)
    Se = np.zeros(5, dtype=np.complex128)
    E = np.zeros((3, 3), dtype=np.complex128)
    dE = np.zeros((3, 3, 2), dtype=np.complex128)
    d2E = np.zeros((3, 3, 2, 2), dtype=np.complex128)
    dEl = np.zeros((3, 3, 2), dtype=np.complex128)
    out = np.zeros((3, 3), dtype=np.complex128)
    r = np.zeros(2)
    inv2pi = 1.0 / (2 * np.pi)
    for t in range(T):
        for s in range(S):
            r[0] = X[t, 0] - Y[s, 0]
            r[1] = X[t, 1] - Y[s, 1]
            rn = np.sqrt(r[0] * r[0] + r[1] * r[1])
            for k in range(3):
                k0, k1 = _k01(lams[k], rn, r0s[k], coefs[k])
                z = lams[k] * rn
                fac = -lams[k] / rn
                km1 = k0
                km = k1
                F[k, 0] = k0 * inv2pi
                F[k, 1] = fac * k1 * inv2pi
                p = fac
                for m in range(1, mmax):
                    kn = km1 + (2.0 * m / z) * km
                    p = p * fac
                    F[k, m + 1] = p * kn * inv2pi
                    km1 = km
                    km = kn
            for m in range(mmax + 1):
                Sa[m] = ca[0] * F[0, m] + ca[1] * F[1, m] + ca[2] * F[2, m]
                Sb[m] = b3 * F[2, m]
                Sc[m] = cc[0] * F[0, m] + cc[1] * F[1, m] + cc[2] * F[2, m]
                Sd[m] = cd[0] * F[0, m] + cd[1] * F[1, m] + cd[2] * F[2, m]
                Se[m] = ce[0] * F[0, m] + ce[1] * F[1, m] + ce[2] * F[2, m]
            _tensors(Sa, Sb, Sc, Sd, Se, q, r, E, dE, d2E)
            w = W[s]
            if kind == 0:
                for a in range(3):
                    for b in range(3):
                        val[t, s, a, b] = w * E[a, b]
                        if grad:
                            for l in range(2):
                                gval[t, s, a, b, l] = w * dE[a, b, l]
            else:
                n = NY[s]
                _dl(E, dE, n, lam_, mu, seta, out)
                for a in range(3):
                    for b in range(3):
                        val[t, s, a, b] = w * out[a, b]
                if grad:
                    for l in range(2):
                        for a in range(3):
                            for b in range(3):
                                for m in range(2):
                                    dEl[a, b, m] = d2E[a, b, m, l]
                        _dl(dE[:, :, l], dEl, n, lam_, mu, seta, out)
                        for a in range(3):
                            for b in range(3):
                                gval[t, s, a, b, l] = w * out[a, b]


def evaluate(kind, kc, X, Y, NY, W, grad, table=None):
    """Weighted kernel blocks val (T, S, 3, 3) and gradients (T, S, 3, 3, 2)."""
    if table is None:
        rmax = np.sqrt(np.max(np.sum((X[:, None] - Y[None]) ** 2, axis=-1))) * 1.01
        table = BesselTable(kc.lams, rmax)
    T, S = len(X), len(Y)
    val = np.empty((T, S, 3, 3), dtype=complex)
    gval = np.empty((T, S, 3, 3, 2) if grad else (1, 1, 1, 1, 1), dtype=complex)
    code = {"S": 0, "D": 1, "DL": 1}[kind]
    m = kc.material
    pair_kernels(code, grad, np.ascontiguousarray(X, float), np.ascontiguousarray(Y, float),
                 np.ascontiguousarray(NY, float), np.ascontiguousarray(W, complex),
                 kc.lams.astype(complex), table.coef, table.r0, kc.a.astype(complex), complex(kc.b3),
                 kc.c.astype(complex), kc.d.astype(complex), kc.e.astype(complex),
                 m.lam, m.mu, complex(kc.s * m.eta), val, gval)
    return val, (gval if grad else None)
