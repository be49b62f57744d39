"""Command-line entry point: ``rodtip {tiptime,evolve,validate,sweep}``.

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 domain error.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis, oracle, plotting, report
from . import semiclassical as sc
from .config import ENGINES, POTENTIALS, UNITS, build_config, load_file
from .core import GaussianState
from .errors import ConfigError, ParameterError, RodTipError
from .grid import AngularGrid

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3


def _common(parser):
    g = parser.add_argument_group("parameters")
    g.add_argument("--config", type=Path, help="flat key: value file (keys: mass, half_length, gravity, hbar, sigma, units_mode, ...)")
    g.add_argument("--units", choices=UNITS)
    g.add_argument("--hbar", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--mass", type=float)
    g.add_argument("--half-length", dest="half_length", type=float)
    g.add_argument("--gravity", type=float)
    g.add_argument("--grid", dest="n_points", type=int, help="interior grid nodes (default 1024)")
    g.add_argument("--dt", type=float, help="time step of the grid solver")
    g.add_argument("--potential", choices=POTENTIALS)
    g.add_argument("--engine", dest="engines", action="append", choices=ENGINES)
    g.add_argument("--out", help="output directory")
    g.add_argument("--jobs", type=int)


def _parser():
    parser = argparse.ArgumentParser(prog="rodtip", description="Tipping time of a quantum rod.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tiptime", help="closed-form tipping times and validity diagnostics")
    _common(p)
    p.add_argument("--write", action="store_true", help="also write tiptime.json to --out")

    p = sub.add_parser("evolve", help="evolve the initial Gaussian; write snapshots and density curves")
    _common(p)
    p.add_argument("--t", type=float, help="final time (default: exact tipping time)")
    p.add_argument("--snapshots", type=int, default=4, help="number of snapshot intervals")
    p.add_argument("--theta-points", default="0,0.3,0.5,sigma",
                   help="comma-separated angles for density-vs-time curves; 'sigma' allowed")
    p.add_argument("--t-max", type=float, help="end of the density-vs-time lattice")
    p.add_argument("--lattice", type=int, default=400, help="points in the density-vs-time lattice")

    p = sub.add_parser("validate", help="cross-validate against the grid solver; exit 1 on failure")
    _common(p)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--quadratic-tolerance", dest="quadratic_tolerance", type=float)

    p = sub.add_parser("sweep", help="sweep sigma, omega or hbar; CSV + JSON fits + figure")
    _common(p)
    p.add_argument("--variable", choices=analysis.SWEEP_VARIABLES, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--values", help="comma-separated values")
    grp.add_argument("--range", nargs=3, metavar=("START", "STOP", "NUM"),
                     help="NUM evenly spaced values (log-spaced with --log)")
    p.add_argument("--log", action="store_true")
    p.add_argument("--outputs", default="t_tip_exact,t_tip_approx,validity_ratio",
                   help=f"comma-separated, from {','.join(analysis.SWEEP_OUTPUTS)}")
    p.add_argument("--sigma-scaling", choices=("fixed", "sqrt_hbar"), default="fixed")
    p.add_argument("--probe", default="0.3,1.0", help="theta,t for density outputs")
    p.add_argument("--fit-window", nargs=2, type=float, metavar=("LO", "HI"))
    return parser


_CONFIG_KEYS = ("units", "hbar", "sigma", "mass", "half_length", "gravity", "n_points", "dt",
                "potential", "engines", "out", "jobs", "tolerance", "quadratic_tolerance")


def _config(args):
    file_values = load_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return build_config(file_values, overrides)


def _parse_floats(text, sigma=None):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "sigma" and sigma is not None:
            out.append(sigma)
            continue
        try:
            out.append(float(tok))
        except ValueError:
            raise ConfigError([f"cannot parse {tok!r} as a number"]) from None
    return out


def cmd_tiptime(args, cfg) -> int:
    params = cfg.params()
    rep = sc.tipping_report(params, cfg.sigma, cfg.validity_threshold)
    body = rep.to_dict()
    try:
        body["t_tip_peak_search"] = sc.density_peak_time(params, cfg.sigma, cfg.sigma)
    except RodTipError as exc:
        body["t_tip_peak_search"] = None
        body["peak_search_error"] = str(exc)
    body["t_tip_original_variables"] = sc.tipping_time_original_variables(params, cfg.sigma)
    config = cfg.resolved()
    sys.stdout.write(report.dumps({**body, "config": config}))
    if args.write:
        report.write_json(Path(cfg.out) / "tiptime.json", body, config)
    return EXIT_OK


def cmd_evolve(args, cfg) -> int:
    params = cfg.params()
    state = GaussianState(cfg.sigma)
    grid = AngularGrid(cfg.n_points)
    config = cfg.resolved()
    t_tip = sc.tipping_time_exact(params, state)
    t_end = t_tip if args.t is None else args.t
    if t_end < 0:
        raise ConfigError([f"--t must be >= 0, got {t_end}"])
    out = Path(cfg.out)
    n_snap = max(1, args.snapshots)
    times = [0.0] if t_end == 0 else list(np.linspace(0.0, t_end, n_snap + 1))
    config = {**config, "t_end": t_end, "snapshot_times": times}

    snaps = {}
    if "analytic" in cfg.engines:
        snaps["analytic"] = [sc.evolve_analytic(params, state, t, grid, threshold=cfg.validity_threshold)
                             for t in times]
    if "numeric" in cfg.engines:
        pot = oracle.PotentialSpec(cfg.potential, params)
        if t_end == 0:
            snaps["numeric"] = [oracle.discretize_initial(state, grid)]
        else:
            _, got = oracle.evolve_numeric(state, t_end, grid, pot, cfg.dt, snapshot_every=t_end / n_snap)
            snaps["numeric"] = got[: len(times)]

    summary = []
    for k, t in enumerate(times):
        row = {"index": k, "time": t}
        for engine, states in snaps.items():
            psi = states[k]
            row[f"norm_{engine}"] = psi.norm()
            extra = None
            if engine == "numeric" and "analytic" in snaps:
                extra = {"density_diff": psi.density - snaps["analytic"][k].density}
            report.write_snapshot(out / f"snapshot_{engine}_{k:03d}.csv", psi, config, extra)
        if len(snaps) == 2:
            diff = snaps["numeric"][k].density - snaps["analytic"][k].density
            row["diff_l2"] = math.sqrt(float(np.sum(diff ** 2)) * grid.spacing)
            row["diff_linf"] = float(np.max(np.abs(diff)))
            row["diff_linf_rel"] = analysis.density_linf_error(snaps["numeric"][k].density,
                                                               snaps["analytic"][k].density)
        summary.append(row)
    cols = ["index", "time"] + [f"norm_{e}" for e in snaps]
    if len(snaps) == 2:
        cols += ["diff_l2", "diff_linf", "diff_linf_rel"]
    report.write_csv(out / "evolve_summary.csv", summary, cols, config)
    plotting.plot_snapshots(snaps, out / "snapshots.svg")

    thetas = _parse_floats(args.theta_points, sigma=cfg.sigma)
    t_max = args.t_max or sc.validity_time_limit(params, sc.VALIDITY_HARD_LIMIT)
    lattice = np.linspace(0.0, t_max, max(3, args.lattice))
    surface = analysis.figure1_curves(params, state, thetas, lattice)
    names = [f"P_theta_{i}" for i in range(len(thetas))]
    rows = [{"t": t, **{n: surface.density[i, j] for i, n in enumerate(names)}} for j, t in enumerate(lattice)]
    report.write_csv(out / "density_vs_time.csv", rows, ["t", *names], config,
                     comments=[f"{n}: theta = {report.format_cell(th)}" for n, th in zip(names, thetas)])
    report.write_json(out / "evolve.json", {
        "t_tip_exact": t_tip,
        "summary": summary,
        "curves": [{"theta": th, "peak_time": surface.peak_time[i], "monotone_decreasing": surface.monotone_decreasing[i],
                    "unimodal": surface.unimodal[i]} for i, th in enumerate(thetas)],
        "checks": surface.checks,
    }, config)
    plotting.plot_density_curves(surface, out / "density_vs_time.svg")
    sys.stdout.write(f"wrote {len(summary)} snapshot time(s) for {', '.join(snaps)} to {out}\n")
    return EXIT_OK


def _invariant_checks(params, sigma, n_points, dt):
    """(name, value, tolerance, passed) for the cheap invariants."""
    checks = []
    t_exact = sc.tipping_time_exact(params, sigma)
    t_peak = sc.density_peak_time(params, sigma, sigma)
    rel = abs(t_peak - t_exact) / t_exact
    checks.append(("peak_search_matches_closed_form", rel, 1e-8, rel <= 1e-8))
    rel14 = abs(sc.tipping_time_original_variables(params, sigma) - t_exact) / t_exact
    checks.append(("original_variables_form", rel14, 1e-14, rel14 <= 1e-14))
    grid = AngularGrid(n_points)
    psi = sc.evolve_analytic(params, GaussianState(sigma), t_exact, grid)
    drift = abs(psi.norm() - 1.0)
    checks.append(("analytic_norm_at_t_tip", drift, 1e-4, drift <= 1e-4))
    ratio = sc.validity(params, t_exact).ratio
    checks.append(("validity_ratio_below_4_sigma2", ratio, 4 * sigma ** 2, ratio < 4 * sigma ** 2))
    thetas = [0.0, sigma, 2 * sigma, 3 * sigma]
    lattice = np.linspace(0.0, sc.validity_time_limit(params, 1.0), 400)
    surf = analysis.figure1_curves(params, GaussianState(sigma), thetas, lattice)
    ok = all(surf.checks.values())
    checks.append(("density_curve_shapes", float(ok), 1.0, ok))
    return checks


def cmd_validate(args, cfg) -> int:
    params = cfg.params()
    config = cfg.resolved()
    cv = analysis.cross_validate(params, cfg.sigma, cfg.n_points, cfg.dt, cfg.tolerance, cfg.quadratic_tolerance)
    lines = []
    for kind in ("cosine", "quadratic"):
        tol = cv.tolerances[kind]
        lines.append((f"t_tip_numeric[{kind}]", cv.t_tip_rel_error[kind], tol, cv.passes[f"t_tip_{kind}"]))
        err = max(cv.density_error_half[kind], cv.density_error_tip[kind])
        lines.append((f"density_linf[{kind}]", err, tol, cv.passes[f"density_{kind}"]))
        lines.append((f"norm_drift[{kind}]", cv.norm_drift[kind], 1e-8, cv.norm_drift[kind] <= 1e-8))
    lines.append(("quadratic_not_worse", float(cv.passes["quadratic_not_worse"]), 1.0, cv.passes["quadratic_not_worse"]))
    lines.append(("validity_at_t_tip", cv.validity_ratio, cfg.validity_threshold, cv.validity_ratio < cfg.validity_threshold))
    lines.extend(_invariant_checks(params, cfg.sigma, cfg.n_points, cfg.dt))
    for name, value, tol, ok in lines:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name:36s} value={value:.6g}  tol={tol:.3g}\n")
    passed = all(ok for *_, ok in lines)
    sys.stdout.write(("all checks passed" if passed else "validation FAILED") + "\n")
    report.write_json(Path(cfg.out) / "validate.json", {
        "cross_validation": cv.to_dict(),
        "checks": [{"name": n, "value": v, "tolerance": t, "passed": ok} for n, v, t, ok in lines],
        "passed": passed,
    }, config)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_sweep(args, cfg) -> int:
    params = cfg.params()
    if args.values is not None:
        values = _parse_floats(args.values)
    else:
        try:
            start, stop, num = float(args.range[0]), float(args.range[1]), int(args.range[2])
        except ValueError:
            raise ConfigError([f"--range expects START STOP NUM, got {args.range}"]) from None
        values = list(np.geomspace(start, stop, num) if args.log else np.linspace(start, stop, num))
    outputs = [o.strip() for o in args.outputs.split(",") if o.strip()]
    probe = _parse_floats(args.probe)
    if len(probe) != 2:
        raise ConfigError([f"--probe expects theta,t; got {args.probe!r}"])
    spec = analysis.SweepSpec(variable=args.variable, values=values, params=params, sigma=cfg.sigma,
                              outputs=outputs, sigma_scaling=args.sigma_scaling, probe=tuple(probe),
                              n_points=cfg.n_points, dt=cfg.dt, potential=cfg.potential)
    rows = analysis.run_sweep(spec, jobs=cfg.jobs)
    config = {**cfg.resolved(), "sweep": {"variable": spec.variable, "values": list(spec.values),
                                          "outputs": list(spec.outputs), "sigma_scaling": spec.sigma_scaling,
                                          "probe": list(spec.probe)}}
    base = ["sigma", "hbar", "omega", "Omega", "de_broglie_ratio", "regime"]
    cols = [args.variable] + [c for c in base if c != args.variable] + list(spec.outputs) + ["warnings", "error"]
    out = Path(cfg.out)
    report.write_csv(out / "sweep.csv", rows, cols, config)

    fits, monotone = {}, {}
    xs = [r[args.variable] for r in rows]
    for name in spec.outputs:
        ys = np.array([r.get(name, np.nan) for r in rows], dtype=float)
        finite = ys[np.isfinite(ys)]
        if finite.size > 1:
            d = np.diff(finite)
            monotone[name] = "increasing" if np.all(d > 0) else "decreasing" if np.all(d < 0) else "none"
        if name.startswith("t_tip") or name == "validity_ratio":
            try:
                fits[name] = analysis.fit_power_law(xs, ys, args.fit_window).__dict__
            except RodTipError:
                pass
    report.write_json(out / "sweep.json", {"fits": fits, "monotone": monotone,
                                           "failed_points": sum(1 for r in rows if r["error"])}, config)
    plot_ys = [o for o in spec.outputs if o != "log_density_probe"]
    plotting.plot_sweep(rows, args.variable, plot_ys or list(spec.outputs), out / "sweep.svg",
                        logx=args.log or args.variable in ("sigma", "hbar"), logy=True)
    for name, fit in fits.items():
        sys.stdout.write(f"{name}: exponent {fit['exponent']:.6g}  r^2 {fit['r_squared']:.6g}\n")
    sys.stdout.write(f"wrote {len(rows)} rows to {out / 'sweep.csv'}\n")
    return EXIT_OK


COMMANDS = {"tiptime": cmd_tiptime, "evolve": cmd_evolve, "validate": cmd_validate, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        cfg.params()
    except (ConfigError, ParameterError) as exc:
        sys.stderr.write(f"rodtip: {exc}\n")
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"rodtip: {exc}\n")
        return EXIT_CONFIG
    except RodTipError as exc:
        sys.stderr.write(f"rodtip: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
