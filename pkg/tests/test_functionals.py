import math

import numpy as np
import pytest

import entrolab.functionals as F
from entrolab.analytic import BarenblattSpec, barenblatt_functionals, barenblatt_solution
from entrolab.errors import DataError
from entrolab.flow import FlowParams, ScalarField
from entrolab.geometry import Geometry


@pytest.fixture(scope="module")
def torus():
    return Geometry.torus1d(256)


@pytest.fixture(scope="module")
def pars2():
    return FlowParams(p=2.0, m=1.0, n=1)


def const_field(geo, c, t=1.0):
    return ScalarField(np.full(geo.shape, c), geo, t=t)


def barenblatt_field(n_nodes=512, extent=6.0, t=1.0, p=2.0):
    spec = BarenblattSpec.unit_mass(1, p)
    geo = Geometry.torus1d(n_nodes, extent)
    vals = barenblatt_solution(geo.nodes - extent / 2, t, spec)
    return ScalarField(vals, geo, t=t), spec


def test_pressure_values(torus, pars2):
    u = const_field(torus, 3.0)
    assert F.pressure(u, pars2).values[0] == pytest.approx(6.0, abs=1e-14)
    ph = FlowParams(p=0.5, m=1.0)
    u4 = const_field(torus, 4.0)
    assert F.pressure(u4, ph).values[0] == pytest.approx(-0.5, abs=1e-14)
    z = const_field(torus, 0.0)
    assert F.pressure(z, pars2).values[0] == 0.0


def test_renyi_entropy_and_power(torus, pars2):
    u = const_field(torus, 1.0)
    assert F.renyi_entropy(u, pars2) == pytest.approx(0.0, abs=1e-14)
    assert F.entropy_power(u, pars2) == pytest.approx(1.0, abs=1e-14)
    step_vals = np.where(torus.nodes < 0.5, 2.0, 0.0)
    hp = F.renyi_entropy(ScalarField(step_vals, torus), pars2)
    assert hp == pytest.approx(-math.log(2.0), abs=1e-12)
    with pytest.raises(DataError):
        F.renyi_entropy(const_field(torus, 1.0), FlowParams(p=1.0, m=1.0))


def test_renyi_matches_radial_oracle():
    u, spec = barenblatt_field()
    pars = FlowParams(p=2.0, m=1.0, n=1)
    ref = barenblatt_functionals(spec, 1.0)
    assert F.renyi_entropy(u, pars) == pytest.approx(ref.H_p, abs=1e-6)
    assert F.entropy_power(u, pars) == pytest.approx(ref.N_p, rel=1e-6)


def test_fisher_information(torus, pars2):
    assert F.fisher_information(const_field(torus, 2.0), pars2) == 0.0
    u, _ = barenblatt_field(t=1.5)
    pars = FlowParams(p=2.0, m=1.0, n=1)
    kappa_t = pars.kappa / 1.5
    assert F.fisher_information(u, pars) == pytest.approx(kappa_t, rel=1e-4)


def test_fisher_p_to_one_limit():
    geo = Geometry.torus1d(512, 6.0)
    x = geo.nodes - 3.0
    vals = np.exp(-(x**2) / 0.5)
    u = ScalarField(vals / geo.integrate(vals), geo)
    shan = F.shannon_fisher(u)
    for p in (1.0 + 1e-3, 1.0 - 1e-3):
        ip = F.fisher_information(u, FlowParams(p=p, m=1.0))
        assert ip == pytest.approx(shan, rel=1e-3)


def test_energy_chain_on_constants(torus):
    pars = FlowParams(p=1.7, m=1.0)
    u = const_field(torus, 2.0)
    assert F.E_value(u, pars) == pytest.approx(2.0**1.7 / 0.7, rel=1e-13)
    assert F.E_prime(u, pars) == 0.0
    assert F.E_doubleprime(u, pars) == 0.0


def test_E_prime_quadrature_oracle(torus, pars2):
    # u = 1 + sin(2 pi x)/2, e'(u) = 2u: int 4 |grad u|^2 u dx = 2 pi^2
    u = ScalarField(1.0 + 0.5 * np.sin(2 * np.pi * torus.nodes), torus)
    assert F.E_prime(u, pars2) == pytest.approx(2 * np.pi**2, rel=1e-3)


def test_energy_identity_chain(torus, pars2):
    # I_p (p-1) E = E' and the integration-by-parts identity E2-style
    u = ScalarField(1.0 + 0.4 * np.sin(2 * np.pi * torus.nodes), torus)
    ip = F.fisher_information(u, pars2)
    assert ip * (pars2.p - 1.0) * F.E_value(u, pars2) == pytest.approx(F.E_prime(u, pars2), rel=2e-3)
    v = F.pressure(u, pars2).values
    up = u.values**pars2.p
    lhs = -torus.integrate(torus.witten_laplacian(v) * up)
    assert lhs == pytest.approx(F.E_prime(u, pars2), rel=2e-3)


def test_cauchy_schwarz_direction(torus, pars2):
    u = ScalarField(1.0 + 0.4 * np.sin(2 * np.pi * torus.nodes) + 0.2 * np.cos(4 * np.pi * torus.nodes), torus)
    v = F.pressure(u, pars2).values
    up = u.values**pars2.p
    lhs = F.E_prime(u, pars2) ** 2
    rhs = torus.integrate(up) * torus.integrate(torus.witten_laplacian(v) ** 2 * up)
    assert rhs - lhs >= 0.0


def test_hessian_decomposition_identity():
    # pointwise |Hess v|^2 = |Lv|^2/m - |drift|^2/(m-n)
    #   + ((m-n)/(mn)) (Lv + m/(m-n) drift)^2 + |traceless|^2, m > n
    geo = Geometry.weighted_interval(128, phi_coeff=1.0, m=3)
    pars = FlowParams(p=1.2, m=3.0, n=1)
    xi = np.pi * (geo.nodes + 0.5)
    u = ScalarField(1.0 + 0.3 * np.cos(xi), geo)
    v = F.pressure(u, pars).values
    hd = geo.hessian_data(v)
    lv = hd.delta - hd.drift_dot
    m, n = 3.0, 1.0
    rhs = (
        lv**2 / m
        - hd.drift_dot**2 / (m - n)
        + (m - n) / (m * n) * (lv + m / (m - n) * hd.drift_dot) ** 2
        + hd.traceless_sq
    )
    assert np.max(np.abs(hd.hess_sq - rhs)) < 1e-10 * max(1.0, np.max(hd.hess_sq))


def test_trace_inequality_direction():
    geo = Geometry.zonal_sphere(128)
    pars = FlowParams(p=1.5, m=2.0, n=2)
    u = ScalarField(1.0 + 0.5 * np.cos(geo.nodes), geo)
    hd = geo.hessian_data(F.pressure(u, pars).values)
    slack = hd.hess_sq - hd.delta**2 / 2.0
    assert np.min(slack) >= -1e-12


def test_F_alpha(torus, pars2):
    u = const_field(torus, 1.5)
    assert np.max(np.abs(F.F_alpha(u, pars2, 1.0).values)) < 1e-12
    assert np.max(np.abs(F.F_alpha(u, pars2, 2.0).values)) < 1e-12
    with pytest.raises(DataError):
        F.F_alpha(u, pars2, 0.5)
    ub, _ = barenblatt_field(t=2.0)
    pars = FlowParams(p=2.0, m=1.0, n=1)
    f1 = F.F_alpha(ub, pars, 1.0).values
    interior = ub.values > 0.25 * np.max(ub.values)
    assert np.max(np.abs(f1[interior] + 1.0 / (3 * 2.0))) < 1e-3  # F_1 = -1/(3t)


def test_ni_and_w_entropy_hand_values(torus):
    pars = FlowParams(p=2.0, m=1.0, n=1)
    for t in (0.5, 1.0, 2.0):
        u = const_field(torus, 1.0, t=t)
        assert F.ni_entropy(u, pars) == pytest.approx(-2.0 * t ** (1.0 / 3.0), rel=1e-12)
        assert F.w_entropy(u, pars) == pytest.approx(-(8.0 / 3.0) * t ** (1.0 / 3.0), rel=1e-12)


def test_w_rate_constant_hand_value(torus):
    # for u = 1: dW/dt = -2 p t^(a+1) [n/((b+2)^2 t^2) + (p-1) kappa^2/t^2] |u|_p^p,
    # which is also d/dt of -(8/3) t^(1/3) for p = 2, m = 1
    pars = FlowParams(p=2.0, m=1.0, n=1)
    for t in (0.7, 1.3):
        u = const_field(torus, 1.0, t=t)
        rate = F.w_entropy_rate(u, pars)
        hand = -2 * 2 * t ** (pars.a + 1) * (1.0 / (9 * t**2) + 1.0 * (1.0 / 9) / t**2) * 1.0
        assert rate == pytest.approx(hand, rel=1e-12)
        assert rate == pytest.approx(-(8.0 / 9.0) * t ** (-2.0 / 3.0), rel=1e-12)
        assert rate < 0.0


def test_ni_rate_vanishes_on_barenblatt():
    # F_1 + a/t vanishes identically on the support; the discrete rate decays
    # to the quadrature-oracle zero at better than second order
    pars = FlowParams(p=2.0, m=1.0, n=1)
    rel = {}
    for n_nodes in (512, 4096):
        u, _ = barenblatt_field(n_nodes=n_nodes, t=1.0)
        rel[n_nodes] = abs(F.ni_entropy_rate(u, pars)) / abs(F.ni_entropy(u, pars))
    assert rel[4096] < 1e-6
    assert rel[512] / rel[4096] > 16.0


def test_d2np_formula(torus, pars2):
    u = const_field(torus, 1.0)
    assert F.d2_entropy_power(u, pars2) == pytest.approx(0.0, abs=1e-10)
    bump = ScalarField(1.0 + 0.4 * np.sin(2 * np.pi * torus.nodes), torus)
    assert F.d2_entropy_power(bump, pars2) <= 0.0  # every term a negated square at K = 0


def test_shannon_trio(torus):
    u = const_field(torus, 1.0)
    assert F.shannon_entropy(u) == pytest.approx(0.0, abs=1e-13)
    assert F.shannon_power(u, m=1.0) == pytest.approx(1.0, abs=1e-13)
    assert F.shannon_fisher(u) == 0.0

    geo = Geometry.torus1d(1024, 8.0)
    x = geo.nodes - 4.0
    s2 = 0.25
    vals = np.exp(-(x**2) / (2 * s2)) / np.sqrt(2 * np.pi * s2)
    g = ScalarField(vals, geo)
    assert F.shannon_entropy(g) == pytest.approx(0.5 * math.log(2 * math.pi * math.e * s2), abs=1e-6)
    assert F.shannon_fisher(g) == pytest.approx(1.0 / s2, rel=1e-4)
    ni = F.shannon_power(g, m=1.0) * F.shannon_fisher(g)
    assert ni == pytest.approx(2 * math.pi * math.e, rel=1e-4)


def test_renyi_to_shannon_limit(torus):
    u = ScalarField(1.0 + 0.3 * np.sin(2 * np.pi * torus.nodes), torus)
    h = F.shannon_entropy(u)
    for p in (1.0 + 1e-3, 1.0 - 1e-3):
        hp = F.renyi_entropy(u, FlowParams(p=p, m=1.0))
        assert abs(hp - h) < 1e-3 * abs(h)


def test_time_weighted_ops_reject_bad_arguments(torus):
    pars = FlowParams(p=2.0, m=1.0, n=1)
    u = const_field(torus, 1.0, t=-1.0)
    for fn in (F.ni_entropy, F.ni_entropy_rate, F.w_entropy, F.w_entropy_rate):
        with pytest.raises(DataError):
            fn(u, pars)
    # m = n with a nonzero drift potential is rejected
    geo = Geometry.weighted_interval(64, phi_coeff=1.0, m=3)
    uw = ScalarField(np.ones(64), geo, t=1.0)
    with pytest.raises(DataError):
        F.w_entropy_rate(uw, FlowParams(p=1.2, m=1.0, n=1))


def test_functional_sample_consistency(torus, pars2):
    u = ScalarField(1.0 + 0.3 * np.sin(2 * np.pi * torus.nodes), torus, t=0.5)
    s = F.functional_sample(u, pars2)
    assert s.N_p == np.exp(pars2.sigma * s.H_p)  # exact as stored
    assert s.norm_up > 0 and s.I_p >= 0
    assert len(s.row()) == len(F.CSV_COLUMNS)
