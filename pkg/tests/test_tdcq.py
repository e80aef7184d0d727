import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermo_tdbem import geometry, tdcq
from thermo_tdbem.errors import DomainError, SymbolEvaluationFailed, ThermoError


def sig(grid, f):
    return tdcq.Signal(f(grid.times), grid.dt)


def test_delta_examples():
    assert tdcq.delta("bdf1", 0.0) == 1.0
    assert tdcq.delta("bdf2", 0.0) / 0.5 == 3.0
    with pytest.raises(DomainError):
        tdcq.delta("bdf3", 0.0)


@pytest.mark.parametrize("scheme", tdcq.SCHEMES)
def test_contour_in_right_half_plane(scheme):
    grid = tdcq.TimeGrid(0.1, 50)
    _, s = tdcq.contour_points(grid, tdcq.CQConfig(scheme))
    assert np.all(s.real > 0)
    assert len(tdcq.cq_nodes(grid, tdcq.CQConfig(scheme))) == 4 * 51


def test_invalid_grid_and_config():
    with pytest.raises(DomainError):
        tdcq.TimeGrid(-1.0, 10)
    with pytest.raises(DomainError):
        tdcq.TimeGrid(0.1, 0)
    with pytest.raises(DomainError):
        tdcq.CQConfig("rk")
    with pytest.raises(DomainError):
        tdcq.CQConfig(contour_radius=1.5)
    with pytest.raises(DomainError):
        tdcq.CQConfig(oversampling=3).frequencies(tdcq.TimeGrid(0.1, 10))


@pytest.mark.parametrize("scheme", tdcq.SCHEMES)
def test_identity_symbol(scheme):
    grid = tdcq.TimeGrid(0.1, 40)
    g = sig(grid, np.sin)
    y = tdcq.cq_convolve(lambda s: 1.0, grid, tdcq.CQConfig(scheme), g)
    np.testing.assert_allclose(y.samples, g.samples, atol=1e-12)


def test_bdf1_integral_and_derivative():
    grid = tdcq.TimeGrid(0.1, 60)
    g = sig(grid, lambda t: np.cos(t) + t)
    cfg = tdcq.CQConfig("bdf1")
    y = tdcq.cq_convolve(lambda s: 1 / s, grid, cfg, g)
    np.testing.assert_allclose(y.samples, 0.1 * np.cumsum(g.samples), atol=1e-12)
    d = tdcq.cq_convolve(lambda s: s, grid, cfg, g)
    ref = np.diff(g.samples, prepend=0.0) / 0.1
    np.testing.assert_allclose(d.samples, ref, atol=1e-10)


@pytest.mark.parametrize("scheme", tdcq.SCHEMES)
def test_resolvent_weights_match_power_series(scheme):
    # weights of 1/(s+a): coefficients of dt/(delta(zeta)+a dt), computed by series division
    dt, a, N = 0.2, 1.5, 30
    grid = tdcq.TimeGrid(dt, N)
    d = np.zeros(N + 1)
    d[:3] = [1, -1, 0] if scheme == "bdf1" else [1.5, -2, 0.5]
    d[0] += a * dt
    w = np.zeros(N + 1)
    for n in range(N + 1):
        acc = (dt if n == 0 else 0.0) - sum(d[k] * w[n - k] for k in range(1, min(n, 2) + 1))
        w[n] = acc / d[0]
    e0 = np.zeros(N + 1)
    e0[0] = 1
    y = tdcq.cq_convolve(lambda s: 1 / (s + a), grid, tdcq.CQConfig(scheme), tdcq.Signal(e0, dt))
    np.testing.assert_allclose(y.samples.real, w, atol=1e-12)


def test_zero_data_gives_zero():
    grid = tdcq.TimeGrid(0.1, 20)
    y = tdcq.cq_convolve(lambda s: np.eye(2) / s, grid, tdcq.CQConfig(), tdcq.Signal(np.zeros((21, 2)), 0.1))
    assert np.all(np.abs(y.samples) < 1e-300)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 15))
def test_shift_equivariance_and_causality(k):
    grid = tdcq.TimeGrid(0.1, 40)
    cfg = tdcq.CQConfig("bdf2")
    g = tdcq.causal_window(grid.times, 0.0, 0.5)
    gs = np.concatenate([np.zeros(k), g[:-k]])
    sym = lambda s: 1 / (s + 1) ** 2
    y = tdcq.cq_convolve(sym, grid, cfg, tdcq.Signal(g, 0.1)).samples
    ys = tdcq.cq_convolve(sym, grid, cfg, tdcq.Signal(gs, 0.1)).samples
    assert np.max(np.abs(ys[:k])) < 1e-12
    np.testing.assert_allclose(ys[k:], y[:-k], atol=1e-11)


def test_bdf2_converges_for_exponential_kernel():
    # 1/(s+1) * g with g = t^4 e^{-t}/... has a closed form via the causal window
    errs = []
    for n in (40, 80, 160):
        grid = tdcq.TimeGrid(4.0 / n, n)
        g = grid.times**3
        y = tdcq.cq_convolve(lambda s: 1 / (s + 1), grid, tdcq.CQConfig(), tdcq.Signal(g, grid.dt)).samples.real
        t = grid.times
        exact = t**3 - 3 * t**2 + 6 * t - 6 + 6 * np.exp(-t)
        errs.append(np.max(np.abs(y - exact)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.9)


def test_symbol_failure_is_wrapped():
    grid = tdcq.TimeGrid(0.1, 8)

    def bad(s):
        raise ZeroDivisionError("boom")
    with pytest.raises(SymbolEvaluationFailed) as ei:
        tdcq.cq_convolve(bad, grid, tdcq.CQConfig(), tdcq.Signal(np.ones(9), 0.1))
    assert isinstance(ei.value, ThermoError)


def test_signal_length_checked():
    with pytest.raises(DomainError):
        tdcq.cq_convolve(lambda s: 1, tdcq.TimeGrid(0.1, 8), tdcq.CQConfig(), tdcq.Signal(np.ones(5), 0.1))


def test_c_eps_values():
    assert tdcq.c_eps(1, 1.0) == pytest.approx(0.25, abs=1e-15)
    assert tdcq.c_eps(0.5, 0.0) == 0.0
    assert tdcq.c_eps(1, 1e12) == pytest.approx(0.5, rel=1e-11)
    t = np.linspace(0, 10, 50)
    np.testing.assert_allclose(tdcq.c_eps(1, t), t / (2 * (1 + t)), rtol=0, atol=1e-14)
    with pytest.raises(DomainError):
        tdcq.c_eps(0.0, 1.0)
    with pytest.raises(DomainError):
        tdcq.c_eps(0.5, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_c_eps_monotone_in_t(eps, t1, t2):
    a, b = sorted((t1, t2))
    assert tdcq.c_eps(eps, a) <= tdcq.c_eps(eps, b) + 1e-15


def test_c_eps_prefactor_oracle():
    eps = 0.3
    pre = math.gamma(eps / 2) / (2 * math.sqrt(math.pi) * math.gamma((eps + 1) / 2))
    assert tdcq.c_eps(eps, 2.0) == pytest.approx(pre * (2 / 3) ** eps, rel=1e-14)


def test_p2_on_polynomials_and_exponential():
    t = np.linspace(0, 2, 41)
    np.testing.assert_allclose(tdcq.p2_signal(t**2, t), t**2 + 4 * t + 2, atol=1e-10)
    np.testing.assert_allclose(tdcq.p2_signal(t**3, t), t**3 + 6 * t**2 + 6 * t, atol=1e-9)
    closed = tdcq.p2_signal(np.exp, t, (np.exp, np.exp))
    np.testing.assert_allclose(closed, 4 * np.exp(t), rtol=1e-15)
    ts = np.linspace(0, 2, 2001)
    approx = tdcq.p2_signal(np.sin(ts), ts)
    exact = np.sin(ts) + 2 * np.cos(ts) - np.sin(ts)
    assert np.max(np.abs(approx - exact)[50:-50]) < 1e-6
    with pytest.raises(DomainError):
        tdcq.p2_signal(np.sin, t)


def test_class_bound():
    t = np.array([0.0, 0.5, 2.0])
    b = tdcq.class_bound(t, 0.0, lambda x: 3.0 + 0 * x, 1.0)
    np.testing.assert_allclose(b, 3 * t / (2 * (1 + t)), atol=1e-15)
    with pytest.raises(DomainError):
        tdcq.class_bound(t, 1.0, lambda x: x, 1.0)


def test_p2_integral():
    t = np.linspace(0, 2, 201)
    assert tdcq.p2_integral(np.ones_like(t), t) == pytest.approx(1.0, abs=1e-12)


def test_causal_window():
    t = np.linspace(0, 10, 101)
    w = tdcq.causal_window(t, 2.0, 1.0)
    assert np.all(w[t <= 2.0] == 0)
    assert np.max(w) == pytest.approx(1.0, abs=1e-3)


def test_td_dirichlet_small(mat):
    mesh = geometry.make_mesh("circle", 12)
    grid = tdcq.TimeGrid(0.5, 32)
    g = tdcq.causal_window(grid.times, 4.0, 1.0)[:, None] * np.tile([0.1, 0.2, 0.3], mesh.size)[None, :]
    dens, field = tdcq.cq_solve_bvp("dirichlet", mat, mesh, grid, tdcq.CQConfig(), tdcq.Signal(g, 0.5),
                                    probes=[[3.0, 0.0]])
    assert dens.samples.shape == (33, mesh.ndof)
    assert field.samples.shape == (33, 1, 3)
    assert np.max(np.abs(dens.samples[:8])) < 1e-12
    assert np.max(np.abs(field.samples[:8])) < 1e-12
    assert np.max(np.abs(field.samples)) > 1e-6
