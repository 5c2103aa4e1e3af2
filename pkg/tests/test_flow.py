import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrolab.analytic import BarenblattSpec, barenblatt_solution
from entrolab.errors import ConfigError, StabilityError
from entrolab.flow import FlowParams, ScalarField, cfl_dt, evolve, step
from entrolab.geometry import Geometry


@given(
    p=st.floats(0.3, 4.0),
    m=st.floats(1.0, 10.0),
)
@settings(max_examples=200, deadline=None)
def test_derived_constants(p, m):
    if p == 1.0 or p <= 1.0 - 2.0 / m:
        return
    pars = FlowParams(p=p, m=m, n=1)
    assert pars.kappa * pars.sigma == pytest.approx(1.0, abs=1e-15)
    assert pars.a == pytest.approx((p - 1.0) * pars.kappa, abs=1e-15)
    assert pars.b == pytest.approx(m * (p - 1.0), abs=1e-15)
    assert pars.nu == pytest.approx(2.0 + pars.n * (p - 1.0), abs=1e-15)


def test_params_validation():
    with pytest.raises(ConfigError):
        FlowParams(p=2.0, m=0.5, n=1)  # m < n
    with pytest.raises(ConfigError):
        FlowParams(p=-1.0, m=1.0, n=1)  # below 1 - 2/m
    with pytest.raises(ConfigError):
        FlowParams(p=0.0, m=2.0, n=1)  # p = 1 - 2/m exactly


def test_cfl_formula():
    geo = Geometry.torus1d(100)  # h = 0.01
    u = ScalarField(np.full(100, 0.7), geo)
    assert cfl_dt(u, FlowParams(p=1.0, m=1.0)) == pytest.approx(0.2e-4, rel=1e-12)
    u4 = ScalarField(np.full(100, 4.0), geo)
    assert cfl_dt(u4, FlowParams(p=2.0, m=1.0)) == pytest.approx(0.2e-4 / 8.0, rel=1e-12)
    geo2 = Geometry.torus1d(50)  # doubled h
    u2 = ScalarField(np.full(50, 4.0), geo2)
    assert cfl_dt(u2, FlowParams(p=2.0, m=1.0)) == pytest.approx(4 * 0.2e-4 / 8.0, rel=1e-12)
    with pytest.raises(StabilityError):
        cfl_dt(ScalarField(np.zeros(100), geo), FlowParams(p=2.0, m=1.0))


def test_constant_is_fixed_point():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=2.0, m=1.0)
    u = ScalarField(np.full(64, 1.3), geo)
    out = step(u, cfl_dt(u, pars), pars)
    assert np.max(np.abs(out.values - 1.3)) < 1e-14


def test_step_conserves_mass_exactly():
    geo = Geometry.torus1d(256)
    pars = FlowParams(p=2.0, m=1.0)
    u = ScalarField(1.0 + 0.5 * np.sin(2 * np.pi * geo.nodes), geo)
    out = step(u, 0.5 * cfl_dt(u, pars), pars)
    assert abs(out.mass - u.mass) / u.mass < 1e-13


def test_step_rejects_unstable_dt():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=2.0, m=1.0)
    u = ScalarField(1.0 + 0.5 * np.sin(2 * np.pi * geo.nodes), geo)
    with pytest.raises(StabilityError):
        step(u, 10.0 * cfl_dt(u, pars), pars)


def test_single_step_barenblatt_error_linear_in_dt():
    # sup error after one step is O(dt^5 + h^2 dt): linear in dt at fixed h,
    # and essentially zero away from the interface (quadratic pressure)
    spec = BarenblattSpec.unit_mass(1, 2.0)
    pars = FlowParams(p=2.0, m=1.0)
    geo = Geometry.torus1d(2048, 6.0)
    x = geo.nodes - 3.0
    u0 = ScalarField(barenblatt_solution(x, 1.0, spec), geo, t=1.0)
    errs = []
    for dt in (2e-6, 1e-6):
        u1 = step(u0, dt, pars)
        errs.append(np.max(np.abs(u1.values - barenblatt_solution(x, 1.0 + dt, spec))))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)
    mask = u0.values > 0.5 * np.max(u0.values)
    u1 = step(u0, 1e-6, pars)
    interior = np.max(np.abs(u1.values - barenblatt_solution(x, 1.0 + 1e-6, spec))[mask])
    assert interior < 1e-10


def test_evolve_constant_trajectory():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=1.5, m=1.0)
    traj = evolve(ScalarField(np.full(64, 2.0), geo), 0.0, 0.01, pars, sample_every=1e-3)
    assert len(traj.fields) == 11
    assert np.max(np.abs(traj.fields[-1].values - 2.0)) < 1e-12
    assert np.all(np.diff(traj.times) > 0)


def test_evolve_dissipates_to_mean():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=2.0, m=1.0)
    u0 = ScalarField(1.0 + 0.5 * np.sin(2 * np.pi * geo.nodes), geo)
    traj = evolve(u0, 0.0, 0.5, pars, sample_every=0.05)
    dev_early = np.max(np.abs(traj.fields[2].values - 1.0))  # t = 0.1
    dev_late = np.max(np.abs(traj.fields[-1].values - 1.0))  # t = 0.5
    assert dev_late < dev_early
    assert dev_late < 1e-6
    assert traj.stats.mass_drift_rel < 1e-10


def test_evolve_sample_times_exact():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=2.0, m=1.0)
    u0 = ScalarField(1.0 + 0.2 * np.sin(2 * np.pi * geo.nodes), geo, t=0.25)
    traj = evolve(u0, 0.25, 0.35, pars, sample_every=0.01)
    expect = 0.25 + 0.01 * np.arange(11)
    assert np.array_equal(traj.times, expect)
    assert all(f.t == t for f, t in zip(traj.fields, expect))


def test_heat_equation_amplitude_decay():
    # p = 1 reproduces exp(t L); mode decay matches exp(-4 pi^2 t) to 1e-4
    geo = Geometry.torus1d(256)
    pars = FlowParams(p=1.0, m=1.0)
    u0 = ScalarField(1.0 + 0.5 * np.sin(2 * np.pi * geo.nodes), geo)
    traj = evolve(u0, 0.0, 0.01, pars, sample_every=1e-3)
    amp = 0.5 * (np.max(traj.fields[-1].values) - np.min(traj.fields[-1].values))
    assert amp / (0.5 * np.exp(-4 * np.pi**2 * 0.01)) == pytest.approx(1.0, abs=1e-4)


def test_heat_flow_of_gaussian_stays_gaussian():
    geo = Geometry.torus1d(768, 6.0)
    pars = FlowParams(p=1.0, m=1.0)
    x = geo.nodes - 3.0
    s2 = 0.09
    u0 = ScalarField(np.exp(-(x**2) / (2 * s2)) / np.sqrt(2 * np.pi * s2), geo)
    t_end = 0.01
    traj = evolve(u0, 0.0, t_end, pars, sample_every=t_end / 4)
    widened = np.exp(-(x**2) / (2 * (s2 + 2 * t_end))) / np.sqrt(2 * np.pi * (s2 + 2 * t_end))
    err = geo.integrate(np.abs(traj.fields[-1].values - widened))
    assert err < 1e-4


def test_torus2d_flow_mass_and_decay():
    geo = Geometry.torus2d(32)
    pars = FlowParams(p=2.0, m=2.0, n=2)
    x, y = geo.nodes[..., 0], geo.nodes[..., 1]
    u0 = ScalarField(1.0 + 0.4 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y), geo)
    traj = evolve(u0, 0.0, 0.01, pars, sample_every=2e-3)
    assert traj.stats.mass_drift_rel < 1e-12
    dev0 = np.max(np.abs(traj.fields[0].values - 1.0))
    dev1 = np.max(np.abs(traj.fields[-1].values - 1.0))
    assert dev1 < dev0  # oscillation dissipates toward the mean


def test_trajectory_requires_increasing_times():
    from entrolab.errors import DataError
    from entrolab.flow import SolverStats, Trajectory

    geo = Geometry.torus1d(8)
    f = ScalarField(np.ones(8), geo)
    stats = SolverStats(steps=0, dt_min=0.0, dt_max=0.0, dts=np.array([]), mass_drift_rel=0.0)
    with pytest.raises(DataError):
        Trajectory(times=np.array([0.0, 0.0]), fields=[f, f], stats=stats)


def test_evolve_attaches_failing_time():
    from entrolab.errors import FlowError

    geo = Geometry.torus1d(32)
    pars = FlowParams(p=2.0, m=1.0)
    u0 = ScalarField(np.zeros(32), geo)  # degenerate state
    with pytest.raises(FlowError) as err:
        evolve(u0, 0.0, 0.1, pars, sample_every=0.01)
    assert err.value.t == 0.0


def test_positivity_preserved_on_barenblatt(barenblatt_run):
    _, _, traj = barenblatt_run
    for u in traj.fields[:: len(traj.fields) // 10]:
        assert np.min(u.values) >= 0.0


def test_mass_conservation_on_reference_runs(barenblatt_run, sine_run):
    for _, _, traj in (barenblatt_run, sine_run):
        assert traj.stats.mass_drift_rel < 1e-10
