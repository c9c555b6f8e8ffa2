"""Command-line interface: scenario-driven runs with reproducible artifacts.

Subcommands::

    ergosphere <config>   locate the degenerate locus along probe rays
    rays <config>         integrate a fan of null characteristics
    horizon <config>      full report: locus, limit cycles, classification
    classify <config>     classification records for the detected cycles
    wave <config>         forward wave run with energy accounting
    dn-compare <config>   hidden-perturbation boundary-data experiment
    gauge-test <config>   gradient-flow sign-flip experiment
    list-scenarios        names of the built-in scenarios
    validate <config>     parse and validate only (no artifacts)

``<config>`` is a path or a built-in scenario name.  Exit codes: 0 on
success, 1 on configuration/validation failure, 2 on numerical failure
(with diagnostics recorded in the manifest).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, builtin_scenarios, parse_config
from .errors import NumericalFailure, ToolkitError, ValidationFailure
from .horizons import ergosphere_locus, horizon_report
from .inverse import (
    PerturbationSpec,
    gradient_flow_pair,
    nonuniqueness_experiment,
)
from .io_utils import (
    write_csv,
    write_curve_csv,
    write_json,
    write_manifest,
    write_snapshot,
)
from .metrics import spatial_det
from .rays import RayOptions, integrate_ray, null_phase_point
from .chargeo import spatial_null_covectors
from .wave.operators import cfl_dt, first_order_reduce
from .wave.solver import WaveSolver, trapping_metric


def _search_annulus(cfg: ScenarioConfig) -> tuple[float, float]:
    hs = cfg["horizon_search"]
    lo = hs["r_lo"] if hs["r_lo"] is not None else cfg["grid"]["r_min"]
    hi = hs["r_hi"] if hs["r_hi"] is not None else cfg["grid"]["r_max"]
    return lo, hi


def _cycle_window(cfg: ScenarioConfig):
    hs = cfg["horizon_search"]
    if hs["cycle_lo"] is not None and hs["cycle_hi"] is not None:
        return (hs["cycle_lo"], hs["cycle_hi"])
    return None


# ---------------------------------------------------------------------------
# Subcommand implementations (each returns the list of artifacts written)
# ---------------------------------------------------------------------------

def _run_ergosphere(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    metric = cfg.build_metric()
    tol = cfg.tolerances()
    locus = ergosphere_locus(metric, _search_annulus(cfg),
                             cfg["horizon_search"]["n_probes"], tol)
    radii = np.linalg.norm(locus, axis=1)
    arts = []
    if "csv" in fmts:
        arts.append(write_curve_csv(out / "ergosphere.csv", locus))
    if "json" in fmts:
        arts.append(write_json(out / "ergosphere.json", {
            "n_probes": len(locus),
            "radius_min": float(np.min(radii)),
            "radius_max": float(np.max(radii)),
            "radius_mean": float(np.mean(radii)),
        }))
    print(f"ergosphere: {len(locus)} probe roots, radius "
          f"[{np.min(radii):.9f}, {np.max(radii):.9f}]")
    return arts


def _run_rays(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    metric = cfg.build_metric()
    tol = cfg.tolerances()
    lo, hi = _search_annulus(cfg)
    bounds = (max(cfg["grid"]["r_min"] * 0.5, 1e-3), cfg["grid"]["r_max"] * 1.5)
    opts = RayOptions(r_bounds=bounds, xi_budget=1e4)
    arts = []
    summary = []
    angles = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
    mid = 0.5 * (lo + hi)
    for i, ang in enumerate(angles):
        x = mid * np.array([math.cos(ang), math.sin(ang)])
        delta = float(spatial_det(metric, x))
        if delta < -tol.ergo:
            xi = spatial_null_covectors(metric, x, tol).xi_plus
            p0 = null_phase_point(metric, x, xi, planar=True)
        else:
            xi = -x / np.linalg.norm(x)
            p0 = null_phase_point(metric, x, xi, planar=False)
        ray = integrate_ray(metric, p0, 4.0, opts, tol)
        rows = zip(ray.s, ray.x0, ray.x[:, 0], ray.x[:, 1], ray.xi0,
                   ray.xi[:, 0], ray.xi[:, 1], ray.h_residuals)
        if "csv" in fmts:
            arts.append(write_csv(
                out / f"ray_{i:02d}.csv",
                ["s", "x0", "x1", "x2", "xi0", "xi1", "xi2", "H_residual"],
                rows))
        xi2 = ray.xi0**2 + np.sum(ray.xi**2, axis=1)
        scaled = np.max(np.abs(ray.h_residuals) / np.maximum(1.0, xi2))
        summary.append({
            "angle": float(ang),
            "termination": ray.termination,
            "samples": len(ray),
            "max_h_residual": float(np.max(np.abs(ray.h_residuals))),
            "max_h_residual_scaled": float(scaled),
            "xi0_drift": float(np.max(np.abs(ray.xi0 - ray.xi0[0]))),
        })
    if "json" in fmts:
        arts.append(write_json(out / "rays.json", {"rays": summary}))
    worst = max(s["max_h_residual_scaled"] for s in summary)
    print(f"rays: {len(summary)} integrated, worst covector-scaled "
          f"|H| residual {worst:.3e}")
    return arts


def _report(cfg: ScenarioConfig):
    metric = cfg.build_metric()
    flow = cfg.build_flow()
    hs = cfg["horizon_search"]
    return horizon_report(
        metric,
        _search_annulus(cfg),
        theta0=hs["theta0"],
        cycle_window=_cycle_window(cfg),
        scan_n=hs["scan_n"],
        n_probes=hs["n_probes"],
        families=cfg.families(),
        s1_radius=hs["s1_radius"],
        flow=flow if cfg["metric"]["family"] == "gordon" else None,
        tol=cfg.tolerances(),
    )


def _run_horizon(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    rep = _report(cfg)
    arts = []
    if "json" in fmts:
        arts.append(write_json(out / "horizon_report.json", rep.to_dict()))
    if "csv" in fmts:
        arts.append(write_curve_csv(out / "ergosphere.csv", rep.ergosphere))
        for i, c in enumerate(rep.cycles):
            arts.append(write_curve_csv(out / f"cycle_{i:02d}.csv", c.curve))
    for c, k in zip(rep.cycles, rep.classes):
        print(f"cycle r = {c.fixed_r:.9f}  family {c.family}  {k.kind}  "
              f"margin {k.margin:.4f}")
    if not rep.cycles:
        print("no limit cycles detected")
    return arts


def _run_classify(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    rep = _report(cfg)
    records = [
        {"kind": k.kind, "margin": k.margin, "residual": k.residual,
         "fixed_r": c.fixed_r, "family": c.family}
        for c, k in zip(rep.cycles, rep.classes)
    ]
    arts = []
    if "json" in fmts:
        arts.append(write_json(out / "classification.json",
                               {"cycles": records}))
    for r in records:
        print(f"r = {r['fixed_r']:.6f}: {r['kind']} "
              f"(margin {r['margin']:.4f}, residual {r['residual']:.2e})")
    if not records:
        print("nothing to classify: no cycles found")
    return arts


def _run_wave(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    metric = cfg.build_metric()
    grid = cfg.build_grid()
    source = cfg.build_source()
    opts = cfg.build_wave_options()
    op = first_order_reduce(metric, grid)
    solver = WaveSolver(op, source, opts)
    state = solver.run(cfg["evolution"]["t_end"])
    arts = []
    hist = state.energy_array()
    if "csv" in fmts:
        arts.append(write_csv(
            out / "energy.csv",
            ["t", "E_total", "E_exterior", "E_interior", "boundary_flux"],
            hist))
        if state.probe_history:
            n_probes = len(state.probe_history[0]) - 1
            for k in range(n_probes):
                arts.append(write_csv(
                    out / f"probe_{k:02d}.csv", ["t", "u"],
                    [(row[0], row[1 + k]) for row in state.probe_history]))
    summary = {
        "t_end": state.t,
        "steps": state.step_count,
        "dt_max": cfl_dt(op, 1.0),
        "energy_initial": float(hist[0, 1]),
        "energy_final": float(hist[-1, 1]),
        "backend": __import__("acoustic_horizons.wave.kernels",
                              fromlist=["backend_name"]).backend_name(),
    }
    if source is not None and source.kind == "interior_pulse":
        summary["trapping_metric"] = trapping_metric(state)
        print(f"wave: trapping metric {summary['trapping_metric']:.3e}")
    elif hist[:, 1].max() > 0:
        summary["interior_fraction"] = float(np.max(hist[:, 3])
                                             / np.max(hist[:, 1]))
        print(f"wave: interior energy fraction {summary['interior_fraction']:.3e}")
    if "json" in fmts:
        arts.append(write_json(out / "wave_summary.json", summary))
    if cfg["evolution"]["snapshot"]:
        arts.extend(write_snapshot(out / "u_final.bin", state.u, grid, state.t))
        arts.extend(write_snapshot(out / "pi_final.bin", state.pi, grid, state.t))
    return arts


def _dn_thresholds(report: dict) -> dict:
    checks = {
        "dn_order_in_window": abs(report["dn_order"] - 2.0) <= 0.3,
        "exterior_order_in_window": abs(report["exterior_order"] - 2.0) <= 0.3,
        "interior_ratio_above_100":
            report["interior_over_finest_exterior"] > 100.0,
    }
    checks["pass"] = all(checks.values())
    return checks


def _run_dn_compare(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    metric = cfg.build_metric()
    exp = cfg["experiment"]
    rep = _report(cfg)
    if not rep.cycles:
        raise NumericalFailure("no horizon cycle found for the base metric")
    cyc = min(rep.cycles,
              key=lambda c: abs(c.fixed_r - exp["horizon_radius"]))
    kind = rep.classes[rep.cycles.index(cyc)].kind
    pert = PerturbationSpec(
        amplitude=exp["bump_amplitude"],
        r_outer=exp["bump_r_outer"],
        r_inner=exp["bump_r_inner"],
        coefficient=exp["bump_coefficient"],
    )
    report = nonuniqueness_experiment(
        metric, pert, cfg.build_source(), cfg.experiment_grids(),
        exp["t_end"], cyc.fixed_r, kind, cfg.build_wave_options(),
        exterior_margin=exp["exterior_margin"],
    )
    report["thresholds"] = _dn_thresholds(report)
    arts = []
    if "json" in fmts:
        arts.append(write_json(out / "nonuniqueness_report.json", report))
    if "csv" in fmts:
        arts.append(write_csv(
            out / "differences.csv",
            ["h", "dn_diff", "exterior_diff", "interior_diff"],
            zip(report["h"], report["dn_differences"],
                report["exterior_differences"],
                report["interior_differences"])))
    print(f"dn-compare: orders dn {report['dn_order']:.2f} / "
          f"ext {report['exterior_order']:.2f}, interior/exterior "
          f"{report['interior_over_finest_exterior']:.0f}, "
          f"pass={report['thresholds']['pass']}")
    return arts


def _run_gauge_test(cfg: ScenarioConfig, out: Path, fmts: set) -> list[Path]:
    exp = cfg["experiment"]
    beta = exp["beta"]
    r_lo, r_hi = cfg["grid"]["r_min"], cfg["grid"]["r_max"]

    def b(x):
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        return beta * (r_hi**2 - r2) * (r2 - r_lo**2)

    def grad_b(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x**2, axis=-1, keepdims=True)
        return 2.0 * beta * x * (r_hi**2 + r_lo**2 - 2.0 * r2)

    report = gradient_flow_pair(
        b, grad_b, exp["n_index"], cfg.experiment_grids(),
        cfg.build_source(), exp["t_end"], cfg.build_wave_options(),
        control_kappa=exp["control_kappa"],
    )
    checks = {"dn_order_in_window": abs(report["dn_order"] - 2.0) <= 0.3}
    if "control_max_change" in report:
        checks["control_stable"] = report["control_max_change"] < 0.2
    checks["pass"] = all(checks.values())
    report["thresholds"] = checks
    arts = []
    if "json" in fmts:
        arts.append(write_json(out / "gradient_pair_report.json", report))
    if "csv" in fmts:
        arts.append(write_csv(out / "differences.csv", ["h", "dn_diff"],
                              zip(report["h"], report["dn_differences"])))
    print(f"gauge-test: dn order {report['dn_order']:.2f}, "
          f"pass={checks['pass']}")
    return arts


_COMMANDS = {
    "ergosphere": _run_ergosphere,
    "rays": _run_rays,
    "horizon": _run_horizon,
    "classify": _run_classify,
    "wave": _run_wave,
    "dn-compare": _run_dn_compare,
    "gauge-test": _run_gauge_test,
}


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acoustic-horizons",
        description="Acoustic spacetimes: ergospheres, horizons, trapping, "
                    "and boundary-data experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(_COMMANDS) + ["validate"]:
        p = sub.add_parser(name)
        p.add_argument("config", help="scenario file path or built-in name")
        p.add_argument("--out", default=None, help="output directory root")
        p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply all tolerances by this factor")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for the jitted kernels")
        p.add_argument("--format", choices=["csv", "json", "csv,json"],
                       default="csv,json", help="artifact formats to write")
    sub.add_parser("list-scenarios")
    return parser


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    try:
        import numba
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
    except Exception:
        pass


def cli_dispatch(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in builtin_scenarios():
            print(name)
        return 0

    try:
        cfg = parse_config(args.config)
        if args.tol_scale != 1.0:
            cfg.data["tolerances"]["scale"] *= args.tol_scale
        if args.command == "validate":
            cfg.build_metric()
            cfg.build_grid()
            cfg.build_source()
            cfg.build_wave_options()
            if cfg["experiment"]["kind"] != "none":
                cfg.experiment_grids()
            print(f"ok: {cfg.name} ({cfg.origin})")
            return 0
    except ValidationFailure as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1

    _apply_threads(args.threads)
    root = Path(args.out) if args.out else Path(cfg["outputs"]["directory"])
    out = root / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    fmts = set(args.format.split(","))

    try:
        artifacts = _COMMANDS[args.command](cfg, out, fmts)
    except ValidationFailure as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, ToolkitError) as exc:
        write_manifest(out, [], status="error",
                       error={"type": type(exc).__name__, "message": str(exc)},
                       extra={"scenario": cfg.name, "command": args.command})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_manifest(out, artifacts, extra={"scenario": cfg.name,
                                          "command": args.command})
    return 0


def main() -> None:
    sys.exit(cli_dispatch())
