"""Experiment driver.

Subcommands:

* ``simulate``   run the flow and write functionals.csv (+ figures)
* ``verify``     simulate, run the configured checks, write report.json,
                 report_summary.csv and constants.json; exit 0 iff all pass
* ``sweep``      repeat verify along one axis (p | K | m | N), one summary row
                 per value
* ``gns-check``  sampled-density margins for the entropy-isoperimetric and
                 Gagliardo-Nirenberg inequalities
* ``constants``  emit the isoperimetric constant chain for (m, p)

CSV output is a header row plus %.17g-formatted values with LF endings;
identical config + seed gives byte-identical delimited output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import analytic, inequalities
from .config import ExperimentConfig
from .diagnostics import run_checks
from .errors import ConfigError, DataError, FlowError, QuadratureError, StabilityError
from .flow import evolve
from .functionals import CSV_COLUMNS, evaluate_trajectory


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_lines(path: Path, lines: List[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sanitize(obj):
    """Map non-finite floats to null so the JSON stays strictly valid."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_sanitize(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_functionals_csv(samples, path: Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    lines += [",".join(_fmt(v) for v in s.row()) for s in samples]
    _write_lines(path, lines)


def _write_summary_csv(reports, path: Path) -> None:
    lines = ["check,mode,worst,tolerance,verdict"]
    for r in reports:
        lines.append(f"{r.name},{r.mode},{_fmt(r.worst)},{_fmt(r.tolerance)},{'pass' if r.passed else 'fail'}")
    _write_lines(path, lines)


def _constants_block(params) -> Dict:
    block = {
        "p": params.p,
        "m": params.m,
        "n": params.n,
        "sigma": params.sigma,
        "kappa": params.kappa,
        "a": params.a,
        "b": params.b,
        "nu": params.nu,
    }
    try:
        gamma = inequalities.gamma_mp(params.m, params.p)
        iso = dataclasses.asdict(inequalities.convert_constants(gamma, params.m, params.p))
        iso["convention"] = "integer-n" if float(params.m).is_integer() else "computed-mn"
    except (ConfigError, DataError, QuadratureError):
        iso = None
    return {"flow": block, "isoperimetric": iso}


def _execute(cfg: ExperimentConfig, outdir: Path, with_checks: bool, plots: bool) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    geo = cfg.build_geometry()
    params = cfg.build_params(geo)
    u0 = cfg.build_initial(geo)
    t0, t1 = float(cfg.time["t0"]), float(cfg.time["t1"])
    traj = evolve(u0, t0, t1, params, sample_every=cfg.sample_every())
    samples = evaluate_trajectory(traj, params)
    _write_functionals_csv(samples, outdir / "functionals.csv")
    if plots:
        from . import figures

        figures.render_functionals(samples, params.kappa, outdir / "fig_functionals.png")
    if not with_checks:
        print(f"simulate: {len(samples)} samples -> {outdir / 'functionals.csv'}")
        return 0

    reports = run_checks(
        traj,
        params,
        cfg.checks,
        tolerances=cfg.tolerances or None,
        free_boundary=cfg.free_boundary,
        equality_case=cfg.equality_case,
    )
    payload = {
        "config": {
            "geometry": cfg.geometry,
            "flow": cfg.flow,
            "initial": cfg.initial,
            "time": cfg.time,
            "checks": sorted(cfg.checks),
            "seed": cfg.seed,
        },
        "solver": {
            "steps": traj.stats.steps,
            "dt_min": traj.stats.dt_min,
            "dt_max": traj.stats.dt_max,
            "mass_drift_rel": traj.stats.mass_drift_rel,
        },
        "checks": [r.to_dict() for r in reports],
    }
    _write_json(outdir / "report.json", payload)
    _write_summary_csv(reports, outdir / "report_summary.csv")
    _write_json(outdir / "constants.json", _constants_block(params))
    if plots:
        from . import figures

        figures.render_residuals(reports, outdir / "fig_residuals.png")
    ok = all(r.passed for r in reports)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: worst={r.worst:.3e} tol={r.tolerance:.1e}")
    print(f"verify: {'all checks passed' if ok else 'FAILURES PRESENT'} -> {outdir / 'report.json'}")
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    return _execute(cfg, Path(args.out), with_checks=False, plots=not args.no_plots)


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    return _execute(cfg, Path(args.out), with_checks=True, plots=not args.no_plots)


def _load_config(args) -> ExperimentConfig:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if getattr(args, "checks", None):
        raw["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return ExperimentConfig.from_dict(raw)


def cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep: empty values list")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    worsts: Dict[str, List[float]] = {}
    all_ok = True
    for val in values:
        point = json.loads(json.dumps(raw))
        if args.axis == "p":
            point["flow"]["p"] = float(val)
        elif args.axis == "m":
            point["flow"]["m"] = float(val)
        elif args.axis == "N":
            point["geometry"]["nodes"] = int(val)
        elif args.axis == "K":
            if point["geometry"].get("kind") != "weighted_interval":
                raise ConfigError("sweep: K axis varies the drift and needs a weighted_interval geometry")
            point["geometry"]["phi"] = f"quadratic:{float(val)}"
        else:
            raise ConfigError(f"sweep: unknown axis {args.axis!r}")
        cfg = ExperimentConfig.from_dict(point)
        geo = cfg.build_geometry()
        params = cfg.build_params(geo)
        traj = evolve(cfg.build_initial(geo), float(cfg.time["t0"]), float(cfg.time["t1"]), params, cfg.sample_every())
        reports = run_checks(
            traj,
            params,
            cfg.checks,
            tolerances=cfg.tolerances or None,
            free_boundary=cfg.free_boundary,
            equality_case=cfg.equality_case,
        )
        row = {"value": float(val), "pass": all(r.passed for r in reports)}
        for r in reports:
            row[r.name] = r.worst
            worsts.setdefault(r.name, []).append(r.worst)
        rows.append(row)
        all_ok = all_ok and row["pass"]
        print(f"sweep {args.axis}={val}: {'pass' if row['pass'] else 'FAIL'}")
    names = sorted(worsts)
    lines = [",".join([args.axis] + names + ["pass"])]
    for row in rows:
        lines.append(
            ",".join([_fmt(row["value"])] + [_fmt(row.get(n, float("nan"))) for n in names] + [str(row["pass"]).lower()])
        )
    _write_lines(outdir / "sweep.csv", lines)
    if not args.no_plots:
        from . import figures

        figures.render_sweep([r["value"] for r in rows], worsts, args.axis, outdir / "fig_sweep.png")
    return 0 if all_ok else 1


def cmd_gns_check(args) -> int:
    n, p = args.n, args.p
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    gamma = inequalities.gamma_mp(n, p)
    constants = inequalities.convert_constants(gamma, n, p)
    spec = analytic.BarenblattSpec.unit_mass(n, p)
    r_max = 1.3 * spec.support_radius() if p > 1.0 else 12.0
    grid = analytic.RadialGrid.build(n, r_max, args.grid_size)

    rows = []
    iso_margins, gns_margins = [], []
    fb = inequalities.barenblatt_density(grid, n, p)
    rows.append(("extremal", inequalities.check_isoperimetric(fb, grid, p, gamma),
                 inequalities.check_gns(inequalities.gns_extremal(grid, n, p), grid, constants)))
    for i in range(args.samples):
        rng = np.random.default_rng(args.seed + i)
        f = inequalities.random_density(grid, rng)
        mi = inequalities.check_isoperimetric(f, grid, p, gamma)
        mg = inequalities.check_gns(np.maximum(f, 0.0) ** ((2.0 * p - 1.0) / 2.0), grid, constants)
        iso_margins.append(mi)
        gns_margins.append(mg)
        rows.append((f"seed-{args.seed + i}", mi, mg))

    lines = ["case,margin_isoperimetric,margin_gns"]
    lines += [f"{c},{_fmt(a)},{_fmt(b)}" for c, a, b in rows]
    _write_lines(outdir / "gns_margins.csv", lines)
    block = dataclasses.asdict(constants)
    block["convention"] = "integer-n" if float(n).is_integer() else "computed-mn"
    _write_json(outdir / "constants.json", block)
    if not args.no_plots:
        from . import figures

        figures.render_margin_histogram(
            {"isoperimetric": iso_margins, "gns": gns_margins}, outdir / "fig_margins.png"
        )
    ok = all(m >= -1e-6 for m in iso_margins + gns_margins)
    ok = ok and abs(rows[0][1]) < 1e-4 and abs(rows[0][2]) < 1e-4
    print(f"gns-check n={n} p={p}: gamma={gamma:.9g}, {len(rows) - 1} sampled densities, "
          f"{'all margins ok' if ok else 'VIOLATIONS'}")
    return 0 if ok else 1


def cmd_constants(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    gamma = args.gamma if args.gamma is not None else inequalities.gamma_mp(args.m, args.p)
    constants = inequalities.convert_constants(gamma, args.m, args.p, kappa_star=args.kappa_star)
    block = dataclasses.asdict(constants)
    block["convention"] = "integer-n" if float(args.m).is_integer() else "computed-mn"
    _write_json(outdir / "constants.json", block)
    print(json.dumps(block, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entrolab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="experiment config JSON")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    sp = sub.add_parser("simulate", help="run the flow and write functionals.csv")
    common(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("verify", help="run the flow and the configured checks")
    common(sp)
    sp.add_argument("--checks", default=None, help="comma list overriding the config checks")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("sweep", help="verify along one axis")
    common(sp)
    sp.add_argument("--axis", required=True, choices=["p", "K", "m", "N"])
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("gns-check", help="sampled-density inequality margins")
    common(sp, needs_config=False)
    sp.add_argument("--n", type=int, default=1, help="dimension")
    sp.add_argument("--p", type=float, default=2.0, help="diffusion exponent")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--grid-size", type=int, default=8192)
    sp.set_defaults(fn=cmd_gns_check, seed=0)

    sp = sub.add_parser("constants", help="emit the isoperimetric constant chain")
    common(sp, needs_config=False)
    sp.add_argument("--m", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--kappa-star", type=float, default=1.0)
    sp.add_argument("--gamma", type=float, default=None, help="override the computed gamma")
    sp.set_defaults(fn=cmd_constants)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = 0 if args.command in ("gns-check",) else None
    try:
        return args.fn(args)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FlowError, StabilityError, QuadratureError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
