import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from thermo_tdbem import specfun
from thermo_tdbem.errors import DomainError

# integral representation oracles, evaluated once with adaptive quadrature
K0_1 = 0.42102443824070834
K1_1 = 0.6019072301972346


def k_integral(order, z):
    """K_order(z) = int_0^inf exp(-z cosh t) cosh(order t) dt, factored as exp(-z) * (...)."""
    f = lambda t: 0.5 * (np.exp(-z * (np.cosh(t) - 1) + order * t) + np.exp(-z * (np.cosh(t) - 1) - order * t))
    upper = np.arccosh(1 + 60.0 / z)
    return np.exp(-z) * integrate.quad(f, 0, upper, epsabs=0, epsrel=1e-13, limit=200)[0]


def i_series(order, z, terms=60):
    out, term = 0.0, (z / 2) ** order / np.prod(np.arange(1, order + 1))
    for k in range(terms):
        out += term
        term *= (z / 2) ** 2 / ((k + 1) * (k + 1 + order))
    return out


def test_frozen_values_match_integral_oracle():
    assert k_integral(0, 1.0) == pytest.approx(K0_1, rel=1e-13)
    assert k_integral(1, 1.0) == pytest.approx(K1_1, rel=1e-13)


def test_k0_k1_at_one():
    assert specfun.modified_bessel_k(0, 1.0) == pytest.approx(K0_1, rel=1e-13)
    assert specfun.modified_bessel_k(1, 1.0) == pytest.approx(K1_1, rel=1e-13)


def test_wronskian():
    z = 2 + 1j
    lhs = specfun.modified_bessel_k(0, z) * i_series(1, z) + specfun.modified_bessel_k(1, z) * i_series(0, z)
    assert abs(lhs - 1 / z) <= 1e-13 * abs(1 / z)


@pytest.mark.parametrize("z", [0.3, 5.0, 12.0, 40.0, 150.0])
def test_k_matches_integral_on_real_axis(z):
    for order in (0, 1):
        assert specfun.modified_bessel_k(order, z) == pytest.approx(k_integral(order, z), rel=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        specfun.modified_bessel_k(0, -1.0)
    with pytest.raises(DomainError):
        specfun.modified_bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        specfun.radial_derivatives(3, 1.0, 0.0)


def test_radial_3d_value():
    g = specfun.radial_derivatives(3, 1.0, 1.0)
    assert g.f0 == pytest.approx(np.exp(-1) / (4 * np.pi), rel=1e-15)
    # the commonly quoted rounded value agrees to its displayed precision
    assert abs(g.f0 - 0.029277) / 0.029277 < 1e-4


def test_radial_2d_first_derivative():
    g = specfun.radial_derivatives(2, 1.0, 1.0)
    assert g.f1 == pytest.approx(-K1_1 / (2 * np.pi), rel=1e-13)
    assert abs(g.f1 + 0.095807) / 0.095807 < 2e-4


lams = st.complex_numbers(min_magnitude=0.1, max_magnitude=20).filter(lambda z: z.real > 0.05)
radii = st.floats(0.05, 5.0)


@settings(max_examples=80, deadline=None)
@given(lam=lams, r=radii)
def test_3d_product_rule_identity(lam, r):
    g = specfun.radial_derivatives(3, lam, r)
    assert abs(g.f1 + (lam + 1 / r) * g.f0) <= 1e-13 * abs((lam + 1 / r) * g.f0) + 1e-300


@settings(max_examples=80, deadline=None)
@given(lam=lams, r=radii, dim=st.sampled_from([2, 3]))
def test_yukawa_ode(lam, r, dim):
    g = specfun.radial_derivatives(dim, lam, r)
    res = g.f2 + (dim - 1) / r * g.f1 - lam * lam * g.f0
    scale = max(abs(g.f2), abs(g.f1 / r), abs(lam * lam * g.f0))
    if scale > 1e-280:
        assert abs(res) <= 1e-10 * scale


@settings(max_examples=60, deadline=None)
@given(lam=st.complex_numbers(min_magnitude=0.1, max_magnitude=5).filter(lambda z: z.real > 0.05),
       r=st.floats(0.1, 3.0), dim=st.sampled_from([2, 3]))
def test_finite_difference_of_f0(lam, r, dim):
    h = r * 1e-5
    g = specfun.radial_derivatives(dim, lam, r)
    fd = (specfun.radial_derivatives(dim, lam, r + h).f0 - specfun.radial_derivatives(dim, lam, r - h).f0) / (2 * h)
    assert abs(fd - g.f1) <= 1e-7 * abs(g.f1)


def test_third_derivative_by_differences():
    lam, r, h = 1.3 + 0.7j, 0.8, 1e-4
    for dim in (2, 3):
        fp = specfun.radial_derivatives(dim, lam, r + h).f2
        fm = specfun.radial_derivatives(dim, lam, r - h).f2
        g = specfun.radial_derivatives(dim, lam, r)
        assert abs((fp - fm) / (2 * h) - g.f3) <= 1e-7 * abs(g.f3)


def test_real_decay_monotone():
    r = np.linspace(0.1, 10, 200)
    for dim in (2, 3):
        f0 = np.abs(specfun.radial_derivatives(dim, 1.5, r).f0)
        assert np.all(np.diff(f0) < 0)
