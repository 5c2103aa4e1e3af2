import numpy as np
import pytest

from entrolab.diagnostics import (
    CHECKS,
    DiagnosticsReport,
    check_aronson_benilan,
    check_concavity,
    check_dissipation,
    check_fisher_w_link,
    check_w_monotonicity,
    run_checks,
    support_interior_mask,
)
from entrolab.errors import ConfigError, DataError
from entrolab.flow import FlowParams, ScalarField, evolve
from entrolab.geometry import Geometry


@pytest.fixture(scope="module")
def const_traj():
    geo = Geometry.torus1d(64)
    pars = FlowParams(p=2.0, m=1.0, n=1)
    u0 = ScalarField(np.full(64, 1.0), geo, t=0.5)
    return evolve(u0, 0.5, 0.6, pars, sample_every=0.01), pars


def test_constant_trajectory_residuals_vanish(const_traj):
    traj, pars = const_traj
    reports = run_checks(
        traj,
        pars,
        ["dissipation", "entropy-rate", "concavity", "d2np-identity", "aronson-benilan",
         "fisher-bound", "w-monotonicity", "fisher-w-link", "dissipation-bound"],
    )
    by_name = {r.name: r for r in reports}
    for name in ("dissipation-rate", "dissipation-curvature", "entropy-rate", "d2np-identity"):
        assert by_name[name].worst < 1e-10, name
    # both sides of the linking identity collapse to the same t-only expression
    assert by_name["fisher-w-link"].worst < 1e-8
    assert by_name["aronson-benilan"].worst == pytest.approx(1.0, abs=1e-9)  # L v + k/t = k/t
    assert by_name["fisher-bound"].worst == pytest.approx(1.0, abs=1e-12)  # I_p = 0
    assert by_name["w-rate-sign"].passed and np.all(by_name["w-rate-sign"].values < 0)
    assert all(r.passed for r in reports)


def test_reports_are_sorted_and_serializable(const_traj):
    traj, pars = const_traj
    reports = run_checks(traj, pars, ["dissipation", "concavity"])
    names = [r.name for r in reports]
    assert names == sorted(names)
    d = reports[0].to_dict()
    assert set(d) == {"name", "mode", "tolerance", "worst", "verdict", "per_time", "metadata"}
    assert d["verdict"] in ("pass", "fail")
    assert d["metadata"]["curvature_K1"] == 0.0
    assert isinstance(d["per_time"][0], list) and len(d["per_time"][0]) == 2


def test_floor_stability_metadata(const_traj):
    traj, pars = const_traj
    (rep,) = run_checks(traj, pars, ["fisher-bound"])
    assert rep.metadata["floor_stability"]["stable"] is True


def test_too_few_samples_rejected():
    geo = Geometry.torus1d(32)
    pars = FlowParams(p=2.0, m=1.0)
    traj = evolve(ScalarField(np.full(32, 1.0), geo, t=0.5), 0.5, 0.52, pars, sample_every=0.01)
    with pytest.raises(DataError):
        check_dissipation(traj, pars)


def test_unknown_check_rejected(const_traj):
    traj, pars = const_traj
    with pytest.raises(ConfigError):
        run_checks(traj, pars, ["no-such-check"])


def test_time_dependent_geometry_rejected_for_static_checks():
    geo = Geometry.scaled_torus(32, scale_rate=0.1)
    pars = FlowParams(p=2.0, m=1.0)
    traj = evolve(ScalarField(np.full(32, 1.0), geo, t=0.5), 0.5, 0.6, pars, sample_every=0.01)
    with pytest.raises(ConfigError):
        check_w_monotonicity(traj, pars)
    with pytest.raises(ConfigError):
        check_aronson_benilan(traj, pars)


def test_support_interior_mask():
    geo = Geometry.torus1d(64)
    vals = np.zeros(64)
    vals[20:45] = 1.0
    mask = support_interior_mask(vals, geo, level=0.2)
    assert not mask[:20].any() and not mask[45:].any()
    assert mask.sum() == 25 - 2 * (2 * 2)  # eroded by two stencil widths per side


def test_concavity_uses_certified_curvature(sphere_run):
    _, pars, traj = sphere_run
    (rep,) = check_concavity(traj, pars)
    assert rep.metadata["curvature_K1"] == 1.0
    assert not rep.metadata["flat_case"]
    assert rep.passed


def test_registry_complete():
    assert set(CHECKS) == {
        "dissipation", "entropy-rate", "concavity", "d2np-identity",
        "aronson-benilan", "fisher-bound", "w-monotonicity", "fisher-w-link",
        "rigidity-ode", "dissipation-bound",
    }


def test_report_dataclass_verdict_rule():
    rep = DiagnosticsReport(
        name="x", mode="residual", tolerance=1e-3, worst=2e-3, passed=False,
        times=np.array([0.0]), values=np.array([2e-3]),
    )
    assert rep.to_dict()["verdict"] == "fail"
