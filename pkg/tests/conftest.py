"""Shared fixtures: the reference runs are expensive, build each once."""

import json

import pytest

from entrolab.config import ExperimentConfig, bundled_config
from entrolab.flow import evolve


def _run(name: str, overrides=None):
    with open(bundled_config(name), "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if overrides:
        for path, value in overrides.items():
            node = raw
            keys = path.split(".")
            for k in keys[:-1]:
                node = node.setdefault(k, {})
            node[keys[-1]] = value
    cfg = ExperimentConfig.from_dict(raw)
    geo = cfg.build_geometry()
    params = cfg.build_params(geo)
    traj = evolve(cfg.build_initial(geo), float(cfg.time["t0"]), float(cfg.time["t1"]), params, cfg.sample_every())
    return cfg, params, traj


@pytest.fixture(scope="session")
def sine_run():
    return _run("sine-torus-p2")


@pytest.fixture(scope="session")
def sine_run_128():
    return _run("sine-torus-p2", {"geometry.nodes": 128, "time.sample_every": 1e-4})


@pytest.fixture(scope="session")
def barenblatt_run():
    return _run("barenblatt-n1-p2")


@pytest.fixture(scope="session")
def barenblatt_run_1024():
    # convergence twin of the N = 512 oracle run; sparse sampling, no checks
    return _run("barenblatt-n1-p2", {"geometry.nodes": 1024, "time.sample_every": 0.125, "checks": []})


@pytest.fixture(scope="session")
def weighted_run():
    return _run("weighted-interval-p12")


@pytest.fixture(scope="session")
def sphere_run():
    return _run("zonal-sphere-p15")


@pytest.fixture(scope="session")
def scaled_run():
    return _run("scaled-torus-p2")


@pytest.fixture(scope="session")
def fast_run():
    return _run("fast-diffusion-p09")
