"""Experiment configuration: JSON schema, validation, and builders.

A config names a geometry, flow parameters, an initial-data preset, a time
window, the checks to run, and optional tolerance overrides.  Validation
happens before any compute and reports the offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .analytic import BarenblattSpec, barenblatt_solution
from .diagnostics import CHECKS
from .errors import ConfigError
from .flow import FlowParams, ScalarField
from .geometry import (
    SCALED_TORUS,
    TORUS_1D,
    TORUS_2D,
    WEIGHTED_INTERVAL,
    ZONAL_SPHERE,
    Geometry,
)
from .tolerances import merge_tolerances

_TIME_CHECKS = {"aronson-benilan", "fisher-bound", "w-monotonicity", "fisher-w-link", "rigidity-ode"}


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: Dict
    flow: Dict
    initial: str
    time: Dict
    checks: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: Dict) -> "ExperimentConfig":
        cfg = cls(
            geometry=dict(raw.get("geometry", {})),
            flow=dict(raw.get("flow", {})),
            initial=str(raw.get("initial", "constant")),
            time=dict(raw.get("time", {})),
            checks=list(raw.get("checks", [])),
            tolerances=dict(raw.get("tolerances", {})),
            seed=int(raw.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    # ------------------------------------------------------------------ #

    def validate(self) -> None:
        kind = self.geometry.get("kind")
        if kind not in (TORUS_1D, TORUS_2D, WEIGHTED_INTERVAL, ZONAL_SPHERE, SCALED_TORUS):
            raise ConfigError(f"geometry.kind: unknown kind {kind!r}")
        nodes = self.geometry.get("nodes")
        if kind == TORUS_2D:
            ok = isinstance(nodes, (list, tuple)) and len(nodes) == 2 and all(int(v) > 3 for v in nodes)
            ok = ok or (isinstance(nodes, int) and nodes > 3)
        else:
            ok = isinstance(nodes, int) and nodes > 3
        if not ok:
            raise ConfigError("geometry.nodes: need an integer (or pair for torus2d) > 3")

        n_dim = 2 if kind in (TORUS_2D, ZONAL_SPHERE) else 1
        p = self.flow.get("p")
        m = self.flow.get("m", float(n_dim))
        if not isinstance(p, (int, float)):
            raise ConfigError("flow.p: missing")
        if m < n_dim:
            raise ConfigError(f"flow.m: need m >= n = {n_dim}")
        if p <= 1.0 - 2.0 / m:
            raise ConfigError(f"flow.p: need p > 1 - 2/m = {1.0 - 2.0 / m:.6g}")
        if p <= 0.0 or p == 1.0:
            raise ConfigError("flow.p: need p > 0 and p != 1 (the p -> 1 limit has its own operations)")

        phi = self.geometry.get("phi", "zero")
        if kind == WEIGHTED_INTERVAL:
            if phi != "zero" and not str(phi).startswith("quadratic:"):
                raise ConfigError("geometry.phi: expected 'zero' or 'quadratic:<a>'")
            if str(phi).startswith("quadratic:") and m <= 1:
                raise ConfigError("flow.m: weighted interval with nonzero phi needs m > 1")
        elif phi not in (None, "zero"):
            raise ConfigError(f"geometry.phi: {kind} is unweighted, got {phi!r}")
        if kind == SCALED_TORUS and not str(self.geometry.get("scale", "exp:0.1")).startswith("exp:"):
            raise ConfigError("geometry.scale: expected 'exp:<rate>'")

        t0, t1 = self.time.get("t0"), self.time.get("t1")
        if t0 is None or t1 is None or not t1 > t0:
            raise ConfigError("time: need t1 > t0")
        dt = self.time.get("sample_every")
        if dt is not None:
            n_s = (t1 - t0) / dt
            if abs(n_s - round(n_s)) > 1e-9 * n_s:
                raise ConfigError("time.sample_every: must divide (t1 - t0)")

        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ConfigError(f"checks: unknown {sorted(unknown)}")
        if t0 <= 0.0 and (set(self.checks) & _TIME_CHECKS):
            raise ConfigError("time.t0: t-weighted checks need t0 > 0")
        merge_tolerances(self.tolerances)

        name = self.initial.split(":")[0]
        if name not in ("constant", "sine-bump", "barenblatt", "gaussian", "random-smooth"):
            raise ConfigError(f"initial: unknown preset {self.initial!r}")
        if name == "barenblatt":
            if kind not in (TORUS_1D,):
                raise ConfigError("initial: barenblatt preset needs a torus1d geometry")
            if p <= 1.0:
                raise ConfigError("initial: barenblatt preset needs p > 1 (compact support)")
            spec = self._barenblatt_spec()
            radius = spec.support_radius(t1)
            extent = float(self.geometry.get("extent", 1.0))
            if 1.05 * radius > extent / 2.0:
                raise ConfigError(
                    f"initial: barenblatt support radius {radius:.3f} at t1 does not fit in extent {extent}"
                )

    # ------------------------------------------------------------------ #

    def _barenblatt_spec(self) -> BarenblattSpec:
        arg = self.initial.split(":", 1)[1] if ":" in self.initial else "auto"
        p = float(self.flow["p"])
        if arg == "auto":
            return BarenblattSpec.unit_mass(1, p)
        return BarenblattSpec(n=1, p=p, C=float(arg))

    @property
    def free_boundary(self) -> bool:
        return self.initial.startswith("barenblatt")

    @property
    def equality_case(self) -> bool:
        return self.initial.startswith("barenblatt")

    def build_geometry(self) -> Geometry:
        g = self.geometry
        kind = g["kind"]
        nodes = g["nodes"]
        if kind == TORUS_1D:
            return Geometry.torus1d(int(nodes), float(g.get("extent", 1.0)))
        if kind == TORUS_2D:
            return Geometry.torus2d(nodes, g.get("extent", 1.0))
        if kind == ZONAL_SPHERE:
            return Geometry.zonal_sphere(int(nodes))
        if kind == SCALED_TORUS:
            rate = float(str(g.get("scale", "exp:0.1")).split(":", 1)[1])
            return Geometry.scaled_torus(int(nodes), float(g.get("extent", 1.0)), rate)
        phi = str(g.get("phi", "zero"))
        coeff = 0.0 if phi == "zero" else float(phi.split(":", 1)[1])
        x0, x1 = g.get("interval", (-0.5, 0.5))
        return Geometry.weighted_interval(int(nodes), float(x0), float(x1), coeff, m=self.flow.get("m"))

    def build_params(self, geo: Geometry) -> FlowParams:
        return FlowParams(
            p=float(self.flow["p"]),
            m=float(self.flow.get("m", geo.dim_n)),
            n=geo.dim_n,
            positivity_floor=self.flow.get("positivity_floor"),
        )

    def build_initial(self, geo: Geometry) -> ScalarField:
        t0 = float(self.time["t0"])
        name, _, arg = self.initial.partition(":")
        if name == "constant":
            c = float(arg) if arg else 1.0
            values = np.full(geo.shape, c)
        elif name == "sine-bump":
            a = float(arg) if arg else 0.5
            values = _sine_bump(geo, a)
        elif name == "gaussian":
            s2 = float(arg) if arg else 0.01
            values = _torus_gaussian(geo, s2)
        elif name == "random-smooth":
            seed = int(arg) if arg else self.seed
            values = _random_smooth(geo, seed)
        else:  # barenblatt
            spec = self._barenblatt_spec()
            extent = float(self.geometry.get("extent", 1.0))
            values = barenblatt_solution(geo.nodes - extent / 2.0, t0, spec)
        return ScalarField(values=values, geometry=geo, t=t0)

    def sample_every(self) -> float:
        dt = self.time.get("sample_every")
        if dt is None:
            dt = 1e-3 * (float(self.time["t1"]) - float(self.time["t0"]))
        return float(dt)


def _sine_bump(geo: Geometry, a: float) -> np.ndarray:
    if abs(a) >= 1.0:
        raise ConfigError("initial: sine-bump amplitude must keep the field positive")
    if geo.kind in (TORUS_1D, SCALED_TORUS):
        return 1.0 + a * np.sin(2.0 * np.pi * geo.nodes / geo.extent[0])
    if geo.kind == TORUS_2D:
        x = geo.nodes[..., 0] / geo.extent[0]
        y = geo.nodes[..., 1] / geo.extent[1]
        return 1.0 + a * np.sin(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y)
    if geo.kind == ZONAL_SPHERE:
        return 1.0 + a * np.cos(geo.nodes)
    # weighted interval: Neumann-compatible cosine
    x0 = geo.nodes[0] - 0.5 * geo.spacing[0]
    return 1.0 + a * np.cos(np.pi * (geo.nodes - x0) / geo.extent[0])


def _torus_gaussian(geo: Geometry, s2: float) -> np.ndarray:
    if geo.kind not in (TORUS_1D, SCALED_TORUS):
        raise ConfigError("initial: gaussian preset needs a 1d torus")
    x = geo.nodes - 0.5 * geo.extent[0]
    values = np.exp(-(x**2) / (2.0 * s2))
    return values / geo.integrate(values)


def _random_smooth(geo: Geometry, seed: int) -> np.ndarray:
    """1 + a few low-frequency modes, scaled so the field stays >= 0.3."""
    rng = np.random.default_rng(seed)
    if geo.kind in (TORUS_1D, SCALED_TORUS):
        x = geo.nodes / geo.extent[0]
        bump = np.zeros_like(x)
        for k in range(1, 4):
            w = 1.0 / k**2
            bump += w * (rng.normal() * np.sin(2 * np.pi * k * x) + rng.normal() * np.cos(2 * np.pi * k * x))
    elif geo.kind == TORUS_2D:
        x = geo.nodes[..., 0] / geo.extent[0]
        y = geo.nodes[..., 1] / geo.extent[1]
        bump = np.zeros_like(x)
        for kx in range(1, 3):
            for ky in range(1, 3):
                bump += rng.normal() / (kx**2 + ky**2) * np.sin(2 * np.pi * kx * x) * np.sin(2 * np.pi * ky * y)
    elif geo.kind == ZONAL_SPHERE:
        bump = sum(rng.normal() / k**2 * np.cos(k * geo.nodes) for k in range(1, 4))
    else:
        x0 = geo.nodes[0] - 0.5 * geo.spacing[0]
        xi = np.pi * (geo.nodes - x0) / geo.extent[0]
        bump = sum(rng.normal() / k**2 * np.cos(k * xi) for k in range(1, 4))
    amp = float(np.max(np.abs(bump)))
    return 1.0 + (0.7 / amp) * bump


def bundled_config(name: str) -> Path:
    """Path of a packaged experiment config (no .json suffix needed)."""
    fname = name if name.endswith(".json") else name + ".json"
    ref = resources.files("entrolab").joinpath("configs", fname)
    with resources.as_file(ref) as path:
        if not path.exists():
            raise ConfigError(f"no bundled config named {name!r}")
        return Path(path)


def bundled_config_names() -> List[str]:
    ref = resources.files("entrolab").joinpath("configs")
    return sorted(p.name[:-5] for p in ref.iterdir() if p.name.endswith(".json"))
