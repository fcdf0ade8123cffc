"""Command-line front end.

Commands: simulate, phase-diagram, stationary, stability, pulling,
spectrum. All output is tidy CSV (UTF-8, '.' decimal, LF endings) plus a
JSON summary; every file carries a header block with the config hash,
seed and toolkit version, and re-running a configuration reproduces
byte-identical CSV bodies. Exit codes: 0 ok, 2 config error, 3
numerical failure.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import RunConfig, SweepSpec
from .dynamics import simulate
from .errors import (ConfigError, NoRootFound, NoSuperradiantSolution,
                     NonFiniteState, SrbeamError)
from .observables import g2_zero, output_power, peak_find, spectrum
from .stability import (Phase, build_sr_linearization, find_root_nonsr,
                        find_root_sr, threshold_nonsr_rate)
from .steady import (pulling_coefficient, solve_steady_state_groups,
                     threshold_collective_rate)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, config, colnames, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# srbeam {__version__}\n")
        fh.write(f"# config_hash {config.hash()}\n")
        fh.write(f"# seed {config.seed}\n")
        fh.write(",".join(colnames) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _write_summary(path, config, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    doc = {"toolkit_version": __version__,
           "config_hash": config.hash(),
           "config": config.to_dict(),
           **payload}
    with open(path, "w", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _map_points(fn, jobs, threads):
    """Evaluate jobs (index order preserved) on an optional worker pool."""
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))
    out = []
    for i, job in enumerate(jobs):
        out.append(fn(job))
        if len(jobs) >= 20 and (i + 1) % max(1, len(jobs) // 10) == 0:
            print(f"  {i + 1}/{len(jobs)} points", file=sys.stderr)
    return out


def _axes(config, default_axis="delta_over_halfkappa"):
    sweep = config.sweep or SweepSpec(axis=default_axis,
                                      min=getattr(config, default_axis),
                                      max=getattr(config, default_axis), points=1)
    return sweep, config.sweep2


def _point_kwargs(config, sweep, value, sweep2=None, value2=None):
    kw = {}
    kw[sweep.axis] = value
    if sweep2 is not None:
        kw[sweep2.axis] = value2
    return kw


# ---------------------------------------------------------------- simulate

def _simulate_point(config, **overrides):
    params = config.system_params(**overrides)
    records = simulate(params, config.mode, config.total_time * params.tau,
                       config.n_runs, config.sample_dt * params.tau,
                       n_workers=config.threads,
                       poisson=config.poisson_arrivals)
    power = output_power(records, params, config.t0 * params.tau)
    g2 = g2_zero(records, config.t0 * params.tau)
    spec = spectrum(records, config.t0 * params.tau, config.t_cut * params.tau,
                    nu_max=config.nu_max / params.tau,
                    sliding=config.sliding_correlation)
    peaks = peak_find(spec)
    return params, records, power, g2, spec, peaks


def cmd_simulate(config):
    """Single-point stochastic runs with observables summary."""
    params, records, power, g2, spec, peaks = _simulate_point(config)
    out = config.out_dir
    artifacts = {}
    if config.save_trajectories:
        traj_dir = os.path.join(out, "trajectories")
        os.makedirs(traj_dir, exist_ok=True)
        for rec in records:
            if "csv" in config.formats:
                rec.to_csv(os.path.join(traj_dir, f"run_{rec.run_index:04d}.csv"))
            if "binary" in config.formats:
                rec.to_binary(os.path.join(traj_dir, f"run_{rec.run_index:04d}.bin"))
        artifacts["trajectories"] = traj_dir
    artifacts["spectrum"] = _write_csv(
        os.path.join(out, "spectrum.csv"), config, ["nu_tau", "magnitude"],
        [(f * params.tau, m) for f, m in zip(spec.frequencies, spec.magnitude)])
    artifacts["summary"] = _write_summary(
        os.path.join(out, "summary.json"), config,
        {"power_per_atom": power, "g2_zero": g2,
         "spectrum_peaks_nu_tau": [f * params.tau for f in peaks],
         "spectrum_estimator": spec.metadata,
         "n_records": len(records)})
    return artifacts


# ---------------------------------------------------------------- spectrum

def cmd_spectrum(config):
    """Spectrum export; with a sweep, a long-format heatmap CSV."""
    sweep, _ = _axes(config)
    rows_long = []
    rows_summary = []
    for value in sweep.values():
        params, records, power, g2, spec, peaks = _simulate_point(
            config, **{sweep.axis: value})
        for f, m in zip(spec.frequencies, spec.magnitude):
            rows_long.append((value, f * params.tau, m))
        rows_summary.append((value, power, g2,
                             peaks[0] * params.tau if peaks else None))
    out = config.out_dir
    artifacts = {
        "heatmap": _write_csv(os.path.join(out, "spectrum_sweep.csv"), config,
                              [sweep.axis, "nu_tau", "magnitude"], rows_long),
        "observables": _write_csv(os.path.join(out, "observables.csv"), config,
                                  [sweep.axis, "power_per_atom", "g2_zero",
                                   "peak_nu_tau"], rows_summary),
    }
    artifacts["summary"] = _write_summary(
        os.path.join(out, "summary.json"), config,
        {"points": len(rows_summary)})
    return artifacts


# ---------------------------------------------------------------- stationary

def _stationary_point(job):
    config, g, dok = job
    state = solve_steady_state_groups(g, dok)
    try:
        params = config.system_params(n_gamma_tau=g, delta_over_halfkappa=dok)
        pull = pulling_coefficient(params)
    except (NoSuperradiantSolution, ConfigError, ValueError):
        pull = None
    if state.is_superradiant:
        return (g, dok, state.branch.value, state.xi, state.f, state.j0_par,
                state.omega, pull)
    return (g, dok, state.branch.value, None, None, 0.0, None, pull)


def cmd_stationary(config):
    """Fixed-point sweep: (xi, f, j0_par, omega tau, pulling) per point."""
    sweep, sweep2 = _axes(config, default_axis="n_gamma_tau")
    jobs = []
    for v2 in (sweep2.values() if sweep2 else [None]):
        for v1 in sweep.values():
            kw = _point_kwargs(config, sweep, v1, sweep2, v2)
            g = kw.get("n_gamma_tau", config.n_gamma_tau)
            dok = kw.get("delta_over_halfkappa", config.delta_over_halfkappa)
            jobs.append((config, g, dok))
    rows = _map_points(_stationary_point, jobs, config.threads)
    return {"stationary": _write_csv(
        os.path.join(config.out_dir, "stationary.csv"), config,
        ["n_gamma_tau", "delta_over_halfkappa", "branch", "xi", "f",
         "j0_par", "omega_tau", "pulling"], rows)}


# ---------------------------------------------------------------- stability

def _stability_point(job):
    config, g, dok = job
    params = config.system_params(n_gamma_tau=g, delta_over_halfkappa=dok)
    if g <= 0:
        return (g, dok, None, None, None, None, Phase.NON_SUPERRADIANT.value)
    try:
        nu0 = find_root_nonsr(params).nu
    except NoRootFound:
        nu0 = None
    state = solve_steady_state_groups(g, dok)
    nu1 = None
    if state.is_superradiant:
        try:
            nu1 = find_root_sr(build_sr_linearization(state, params)).nu
        except NoRootFound:
            nu1 = None
    # same decision tree as classify_phase, reusing the roots from above
    tau = params.tau
    governing = nu1 if state.is_superradiant else nu0
    if governing is None:
        phase = ""
    elif abs(governing.real) * tau < 1e-6:
        phase = "inconclusive"
    elif state.is_superradiant:
        phase = (Phase.STEADY_SUPERRADIANT if governing.real < 0
                 else Phase.MULTICOMPONENT).value
    else:
        phase = Phase.NON_SUPERRADIANT.value
    return (g, dok,
            None if nu0 is None else nu0.real * tau,
            None if nu0 is None else nu0.imag * tau,
            None if nu1 is None else nu1.real * tau,
            None if nu1 is None else nu1.imag * tau, phase)


def _stability_grid(config):
    sweep, sweep2 = _axes(config, default_axis="n_gamma_tau")
    jobs = []
    for v2 in (sweep2.values() if sweep2 else [None]):
        for v1 in sweep.values():
            kw = _point_kwargs(config, sweep, v1, sweep2, v2)
            g = kw.get("n_gamma_tau", config.n_gamma_tau)
            dok = kw.get("delta_over_halfkappa", config.delta_over_halfkappa)
            jobs.append((config, g, dok))
    return _map_points(_stability_point, jobs, config.threads)


def cmd_stability(config):
    """Dispersion-root sweep with phase labels."""
    rows = _stability_grid(config)
    return {"stability": _write_csv(
        os.path.join(config.out_dir, "stability.csv"), config,
        ["n_gamma_tau", "delta_over_halfkappa", "re_nu0_tau", "im_nu0_tau",
         "re_nu1_tau", "im_nu1_tau", "phase"], rows)}


# ------------------------------------------------------------ phase diagram

def _sr_boundary_bisect(config, dok, g_lo, g_hi, iters=24):
    """Re(nu1) sign change between g_lo and g_hi at fixed detuning."""
    def re_nu1(g):
        params = config.system_params(n_gamma_tau=g, delta_over_halfkappa=dok)
        state = solve_steady_state_groups(g, dok)
        if not state.is_superradiant:
            return -1.0
        return find_root_sr(build_sr_linearization(state, params)).nu.real
    lo, hi = g_lo, g_hi
    f_lo = re_nu1(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (re_nu1(mid) > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_phase_diagram(config):
    """2-D grid of roots/fixed-point data plus boundary polylines."""
    rows = _stability_grid(config)
    sweep, sweep2 = _axes(config, default_axis="n_gamma_tau")
    grid_path = _write_csv(
        os.path.join(config.out_dir, "phase_grid.csv"), config,
        ["n_gamma_tau", "delta_over_halfkappa", "re_nu0_tau", "im_nu0_tau",
         "re_nu1_tau", "im_nu1_tau", "phase"], rows)
    # boundary polylines: non-emitting threshold + collective instability
    boundary_rows = []
    if sweep2 is not None and sweep.axis == "n_gamma_tau" \
            and sweep2.axis == "delta_over_halfkappa":
        g_vals = sweep.values()
        for dok in sweep2.values():
            try:
                g_thr = threshold_nonsr_rate(dok)
                if min(g_vals) <= g_thr <= max(g_vals):
                    boundary_rows.append((g_thr, dok, "threshold"))
            except NoRootFound:
                pass
            col = [r for r in rows if r[1] == dok]
            re1 = [r[4] for r in col]
            for i in range(len(col) - 1):
                a, b = re1[i], re1[i + 1]
                if a is not None and b is not None and (a > 0) != (b > 0):
                    g_b = _sr_boundary_bisect(config, dok, col[i][0],
                                              col[i + 1][0])
                    boundary_rows.append((g_b, dok, "multicomponent"))
    boundary_path = _write_csv(
        os.path.join(config.out_dir, "phase_boundaries.csv"), config,
        ["n_gamma_tau", "delta_over_halfkappa", "boundary"], boundary_rows)
    return {"grid": grid_path, "boundaries": boundary_path}


# ---------------------------------------------------------------- pulling

def cmd_pulling(config):
    """Pulling-coefficient grid over (n_gamma_tau, kappa_tau)."""
    sweep, sweep2 = _axes(config, default_axis="n_gamma_tau")
    if sweep2 is None:
        sweep2 = SweepSpec(axis="kappa_tau", min=config.kappa_tau,
                           max=config.kappa_tau, points=1)
    rows = []
    for g in sweep.values():
        for kt in sweep2.values():
            params = config.system_params(n_gamma_tau=g, kappa_tau=kt)
            try:
                p = pulling_coefficient(params)
                rows.append((g, kt, p, p * kt))
            except (NoSuperradiantSolution, ValueError):
                rows.append((g, kt, None, None))
    grid_path = _write_csv(
        os.path.join(config.out_dir, "pulling.csv"), config,
        ["n_gamma_tau", "kappa_tau", "pulling", "pulling_kappa_tau"], rows)
    # analytic large-kappa limit of P * kappa * tau
    limit_rows = []
    for g in sweep.values():
        try:
            from .steady import solve_xi
            xi = solve_xi(g)
            limit_rows.append((g, 4.0 * xi ** 2 / (g * (1.0 - math.sin(xi) / xi))))
        except NoSuperradiantSolution:
            limit_rows.append((g, None))
    limit_path = _write_csv(
        os.path.join(config.out_dir, "pulling_limit.csv"), config,
        ["n_gamma_tau", "pulling_kappa_tau_limit"], limit_rows)
    return {"pulling": grid_path, "limit": limit_path}


# ---------------------------------------------------------------- main

_COMMANDS = {
    "simulate": cmd_simulate,
    "phase-diagram": cmd_phase_diagram,
    "stationary": cmd_stationary,
    "stability": cmd_stability,
    "pulling": cmd_pulling,
    "spectrum": cmd_spectrum,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="srbeam",
        description="Collective emission of an atomic beam through an "
                    "off-resonant cavity: simulation and analysis")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="flat JSON config file")
    parser.add_argument("--preset", metavar="NAME",
                        help="named preset configuration")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override one config field (repeatable)")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--threads", type=int, metavar="K")
    parser.add_argument("--seed", type=int, metavar="U64")
    return parser


def resolve_config(args):
    if args.preset and args.config:
        raise ConfigError("--preset and --config are mutually exclusive")
    if args.preset:
        config = RunConfig.from_preset(args.preset)
    elif args.config:
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    for assignment in args.overrides:
        config = config.apply_set(assignment)
    if args.out is not None:
        config = config.apply_set(f"out_dir={args.out}")
    if args.threads is not None:
        config = config.apply_set(f"threads={args.threads}")
    if args.seed is not None:
        config = config.apply_set(f"seed={args.seed}")
    return config.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        artifacts = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteState, SrbeamError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for name, path in artifacts.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
