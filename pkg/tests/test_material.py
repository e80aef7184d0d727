import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from thermo_tdbem.errors import ConstraintViolation
from thermo_tdbem.material import Material, derive_constants, validate_material


def raw(rho=1, lam=1, mu=1, gamma=1, eta=1, kappa=1):
    return {"rho": rho, "lambda": lam, "mu": mu, "gamma": gamma, "eta": eta, "kappa": kappa}


def test_unit_material_valid():
    m = validate_material(raw())
    assert (m.rho, m.lam, m.mu, m.gamma, m.eta, m.kappa) == (1, 1, 1, 1, 1, 1)


def test_negative_lambda_allowed_when_3lam_plus_2mu_positive():
    m = validate_material(raw(lam=-0.5))
    assert 3 * m.lam + 2 * m.mu == 0.5


def test_lambda_minus_one_with_unit_mu_rejected():
    # 3 * (-1) + 2 * 1 = -1 violates the bulk-modulus inequality
    with pytest.raises(ConstraintViolation, match=r"3\*lambda"):
        validate_material(raw(lam=-1))


def test_sign_violation_names_rule():
    with pytest.raises(ConstraintViolation, match="gamma/eta > 0"):
        validate_material(raw(gamma=-1))


@pytest.mark.parametrize("field,value,rule", [("rho", 0, "rho > 0"), ("mu", -1, "mu > 0"),
                                              ("lam", -2, "3*lambda"), ("kappa", 0, "kappa > 0")])
def test_first_failed_inequality_named(field, value, rule):
    kw = dict(rho=1, lam=1, mu=1, gamma=1, eta=1, kappa=1)
    kw[field] = value
    with pytest.raises(ConstraintViolation, match=rule.replace("*", r"\*")):
        Material(**kw)


def test_missing_key():
    d = raw()
    del d["kappa"]
    with pytest.raises(ConstraintViolation, match="kappa"):
        validate_material(d)


def test_non_finite_rejected():
    with pytest.raises(ConstraintViolation):
        validate_material(raw(rho=float("nan")))


def test_derived_unit_material():
    dc = derive_constants(validate_material(raw()))
    assert dc.epsilon == pytest.approx(1 / 3, rel=1e-15)
    assert dc.c_s == 1.0
    assert dc.c_p == pytest.approx(math.sqrt(3), rel=1e-15)
    assert not dc.strong_coupling


def test_zero_coupling_gives_zero_epsilon():
    assert derive_constants(validate_material(raw(gamma=0, eta=0))).epsilon == 0


def test_epsilon_one_warns():
    m = Material(rho=1, lam=2, mu=1, gamma=2, eta=2, kappa=1)
    with pytest.warns(UserWarning):
        dc = derive_constants(m)
    assert dc.epsilon == pytest.approx(1.0, rel=1e-15)
    assert dc.strong_coupling


def test_to_dict_roundtrip():
    m = Material(rho=2, lam=0.5, mu=1.5, gamma=0.3, eta=0.7, kappa=0.9)
    assert validate_material(m.to_dict()) == m


@settings(max_examples=60, deadline=None)
@given(c=st.floats(0.01, 100), g=st.floats(0.01, 10), e=st.floats(0.01, 10))
def test_epsilon_scaling_invariance(c, g, e):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = derive_constants(Material(1, 1, 1, g, e, 1)).epsilon
        b = derive_constants(Material(1, 1, 1, c * g, e / c, 1)).epsilon
    assert b == pytest.approx(a, rel=1e-13)


def test_derivation_is_deterministic():
    m = validate_material(raw(lam=0.3, gamma=0.2))
    assert derive_constants(m) == derive_constants(validate_material(raw(lam=0.3, gamma=0.2)))
