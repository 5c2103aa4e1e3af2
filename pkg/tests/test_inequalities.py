import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import entrolab.inequalities as iq
from entrolab.analytic import BarenblattSpec, RadialGrid, gaussian_reference
from entrolab.errors import ConfigError, DataError


def grid_for(n, p, num=4096):
    if p > 1:
        r_max = 1.3 * BarenblattSpec.unit_mass(n, p).support_radius()
    else:
        r_max = 12.0
    return RadialGrid.build(n, r_max, num)


def test_theta_hand_value():
    th = iq.theta_of(1.0 / 3.0, 4.0)
    assert th == pytest.approx(0.6, abs=1e-14)
    # defining relation: 1/(4/3) = 0.6/4 + 0.4/(2/3) = 0.75
    assert 1.0 / (4.0 / 3.0) == pytest.approx(0.6 / 4.0 + 0.4 / (2.0 / 3.0), abs=1e-15)


def test_theta_q_one_and_errors():
    assert iq.theta_of(1.0, 5.0) == 0.0  # the (1 - q) factor
    with pytest.raises(ConfigError):
        iq.theta_of(0.5, 2.0)
    with pytest.raises(ConfigError):
        iq.theta_of(-1.0, 4.0)


@given(q=st.floats(0.05, 0.999), m=st.floats(2.01, 20.0))
@settings(max_examples=200, deadline=None)
def test_theta_defining_relation_property(q, m):
    th = iq.theta_of(q, m)
    lhs = 1.0 / (q + 1.0)
    rhs = th * (m - 2.0) / (2.0 * m) + (1.0 - th) / (2.0 * q)
    assert abs(lhs - rhs) <= 1e-13


def test_endpoint_exponent_bookkeeping():
    # at p = 1 - 1/m the gradient-form exponent (2 + 2m(p-1))/(m(p-1)) vanishes
    # and q = 1/(2p-1) = m/(m-2) sits at the Sobolev endpoint 2q = 2*
    m = 4.0
    p = 1.0 - 1.0 / m
    assert 2.0 + 2.0 * m * (p - 1.0) == pytest.approx(0.0, abs=1e-14)
    q = 1.0 / (2.0 * p - 1.0)
    assert 2.0 * q == pytest.approx(2.0 * m / (m - 2.0), abs=1e-14)
    c = iq.convert_constants(30.0, m, p)
    assert c.sobolev_coeff == pytest.approx(((m - 2.0) / (2.0 * m - 2.0)) ** 2, abs=1e-15)
    assert math.isnan(c.theta) and math.isnan(c.A)  # interpolation degenerates


def test_sobolev_endpoint_margins():
    # m = 4, p = 3/4: the fast-diffusion extremal saturates the Sobolev form;
    # its Dirichlet tail decays like r^-2, so the truncation radius is large
    m, p = 4, 0.75
    gamma = iq.gamma_mp(m, p)
    grid = RadialGrid.build(m, 400.0, 65536)
    fb = iq.barenblatt_density(grid, m, p)
    gb = np.maximum(fb, 0.0) ** ((2 * p - 1) / 2.0)
    assert abs(iq.check_sobolev(gb, grid, float(m), gamma)) < 2e-3
    rng = np.random.default_rng(13)
    small = RadialGrid.build(m, 20.0, 8192)
    for _ in range(3):
        f = iq.random_density(small, rng)
        g = np.maximum(f, 0.0) ** ((2 * p - 1) / 2.0)
        assert iq.check_sobolev(g, small, float(m), gamma) > 0.0


def test_gamma_shannon_scaling():
    m = 3.0
    assert iq.gamma_shannon(m, 1.0) == pytest.approx(2 * math.pi * math.e * m, abs=1e-12)
    for ks in (0.3, 2.0):
        assert iq.gamma_shannon(m, ks) == pytest.approx(ks ** (2.0 / m) * iq.gamma_shannon(m, 1.0), rel=1e-15)


def test_nash_coefficient():
    c = iq.convert_constants(20.0, 3.0, 1.5)
    assert c.nash_coeff == pytest.approx(2.0 / math.sqrt(c.gamma_shannon), abs=1e-15)


def test_round_trip_identity():
    for (m, p) in [(4.0, 2.0), (3.0, 1.5), (5.0, 0.9), (1.0, 2.0)]:
        c = iq.convert_constants(17.3, m, p)
        assert iq.gamma_from_gns(c.A, c.theta, p) == pytest.approx(17.3, rel=1e-12)


def test_gamma_mp_scale_invariance_and_limit():
    g1 = iq.gamma_mp(1, 2.0)
    assert g1 == pytest.approx(iq.gamma_mp(1, 2.0), rel=1e-15)  # cached
    from entrolab.analytic import barenblatt_gamma

    assert abs(barenblatt_gamma(1, 2.0, 1.0) - barenblatt_gamma(1, 2.0, 5.0)) < 1e-8 * g1
    gm = 0.5 * (iq.gamma_mp(2, 1 + 1e-3) + iq.gamma_mp(2, 1 - 1e-3))
    assert gm == pytest.approx(iq.gamma_shannon(2.0, 1.0), rel=1e-4)


def test_isoperimetric_margins():
    for (n, p) in [(1, 2.0), (2, 1.5)]:
        grid = grid_for(n, p)
        gamma = iq.gamma_mp(n, p)
        fb = iq.barenblatt_density(grid, n, p)
        assert abs(iq.check_isoperimetric(fb, grid, p, gamma)) < 1e-4  # extremal
        rng = np.random.default_rng(11)
        for _ in range(10):
            f = iq.random_density(grid, rng)
            assert iq.check_isoperimetric(f, grid, p, gamma) > -1e-6
    with pytest.raises(DataError):
        iq.check_isoperimetric(2.0 * fb, grid, p, gamma)  # non-normalized


def test_gaussian_near_extremal_for_p_near_one():
    n = 1
    grid = RadialGrid.build(n, 14.0, 8192)
    g = gaussian_reference(n, 1.0)
    f = g.density(grid.r)
    f = f / grid.integrate(f)
    for p, tol in ((1.0 + 1e-3, 2e-3), (1.0 - 1e-3, 2e-3)):
        margin = iq.check_isoperimetric(f, grid, p, iq.gamma_mp(n, p))
        assert margin > -1e-6
        assert abs(margin) < tol


def test_gns_margins_and_scaling_invariance():
    n, p = 1, 2.0
    grid = grid_for(n, p, num=8192)
    gamma = iq.gamma_mp(n, p)
    c = iq.convert_constants(gamma, n, p)
    g_ext = iq.gns_extremal(grid, n, p)
    assert abs(iq.check_gns(g_ext, grid, c)) < 1e-4
    rng = np.random.default_rng(3)
    f = iq.random_density(grid, rng)
    g = np.maximum(f, 0.0) ** ((2 * p - 1) / 2.0)
    base = iq.check_gns(g, grid, c)
    assert base > 0
    # amplitude scaling leaves the normalized margin's sign (and value) alone
    assert iq.check_gns(3.7 * g, grid, c) == pytest.approx(base, rel=1e-9)
    # dilation on the grid: g(r/lambda) with the matching grid dilation
    lam = 1.5
    grid2 = RadialGrid.build(n, lam * grid.r[-1], grid.r.size)
    g2 = np.interp(grid2.r / lam, grid.r, g)
    assert np.sign(iq.check_gns(g2, grid2, c)) == np.sign(base)


def test_equivalence_chain_sign_consistency():
    # the isoperimetric margin of f and the gradient-form margin of
    # g = f^((2p-1)/2) must agree in sign
    n, p = 1, 1.5
    grid = grid_for(n, p)
    gamma = iq.gamma_mp(n, p)
    rng = np.random.default_rng(5)
    for _ in range(5):
        f = iq.random_density(grid, rng)
        g = np.maximum(f, 0.0) ** ((2 * p - 1) / 2.0)
        m_f = iq.check_isoperimetric(f, grid, p, gamma)
        m_g = iq.finq_margin(g, grid, gamma, n, p)
        assert np.sign(m_f) == np.sign(m_g) == 1.0
    fb = iq.barenblatt_density(grid, n, p)
    gb = np.maximum(fb, 0.0) ** ((2 * p - 1) / 2.0)
    assert abs(iq.finq_margin(gb, grid, gamma, n, p)) < 1e-3  # both sit at zero


def test_stam_logarithmic_sobolev():
    n = 2
    grid = RadialGrid.build(n, 14.0, 8192)
    gamma = iq.gamma_shannon(float(n), 1.0)
    # Gaussian extremal: equality
    u = gaussian_reference(n, 1.3).density(grid.r)
    u = u / grid.integrate(u)
    f = np.sqrt(u)
    assert abs(iq.check_stam_lsi(f, grid, float(n), gamma)) < 1e-6
    rng = np.random.default_rng(9)
    bump = iq.random_density(grid, rng)
    f2 = np.sqrt(bump / grid.integrate(bump))
    assert iq.check_stam_lsi(f2, grid, float(n), gamma) > 0.0
