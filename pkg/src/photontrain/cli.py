"""Command-line front end: ``photontrain <subcommand> [options]``.

Subcommands
-----------
simulate   reduced-model trajectory          -> trajectory.csv
g2         train-integrated correlation      -> correlation.csv
oracle     full master equation + comparison -> oracle.csv, oracle_comparison.csv
converge   Fock-cutoff convergence report    -> fock_convergence.csv
sweep      scan one scalar config key        -> sweep.csv

Examples::

    photontrain simulate --preset paper-d2 --out runs/d2
    photontrain g2 --preset paper-d1 --override n_subpulses=6
    photontrain sweep --preset paper-d2 --override sweep_param=omega1_mhz \\
        --override sweep_values=5,10,20 --jobs 3
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (INTEGER_KEYS, PRESET_VERSION, PRESETS, ConfigError, Scenario, dump_config,
                     load_config, with_overrides)
from .correlation import g2_grid
from .dynamics import RegimeWarning, default_time_grid, simulate
from .integrator import IntegrationError
from .lindblad import PositivityError, build_generators, compare_with_adiabatic, evolve, fock_convergence
from .params import check_regime

SUBCOMMANDS = ("simulate", "g2", "oracle", "converge", "sweep")


def fmt(x) -> str:
    """Nine significant digits, stable across platforms."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def header_lines(scenario: Scenario, subcommand: str) -> list[str]:
    lines = [f"photontrain {__version__}", f"subcommand = {subcommand}",
             f"preset_version = {PRESET_VERSION}"]
    lines += dump_config(scenario).splitlines()
    d = scenario.derived
    for key in ("G1", "G2", "alpha1", "alpha2", "Gamma1", "Gamma2", "Gamma1_out", "Gamma2_out"):
        lines.append(f"derived {key}_rad_per_us = {fmt(getattr(d, key))}")
    lines.append(f"derived R_sn = {fmt(d.R_sn)}")
    return lines


def write_csv(path: Path, header: list[str], columns: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def _grid(scenario: Scenario) -> np.ndarray:
    return default_time_grid(scenario.train, scenario.grids.points_per_fwhm)


def _tau_grid(scenario: Scenario, t_grid) -> np.ndarray:
    h = float(t_grid[1] - t_grid[0])
    n = int(round(scenario.tau_max / h))
    return h * np.arange(n + 1)


def run_simulation(scenario: Scenario):
    return simulate(scenario.derived, scenario.train, _grid(scenario),
                    rel_tol=scenario.rel_tol, abs_tol=scenario.abs_tol)


def run_g2(scenario: Scenario, traj=None):
    traj = run_simulation(scenario) if traj is None else traj
    return g2_grid(scenario.derived, scenario.train, traj, _tau_grid(scenario, traj.times),
                   rel_tol=scenario.rel_tol, abs_tol=scenario.abs_tol)


def cmd_simulate(scenario: Scenario, out: Path, header) -> None:
    traj = run_simulation(scenario)
    rows = zip(traj.times, traj.f1, traj.f2, traj.p11, traj.p22, traj.pop_total,
               traj.flux, traj.n_out_cum)
    write_csv(out / "trajectory.csv", header,
              ["t_us", "f1", "f2", "p11", "p22", "pop_total", "flux_per_us", "n_out_cum"], rows)
    print(f"n_out total = {fmt(traj.n_out_cum[-1])}, final pop_total = {fmt(traj.pop_total[-1])}")
    if scenario.toggles.oracle:
        _oracle_outputs(scenario, traj, out, header)


def cmd_g2(scenario: Scenario, out: Path, header) -> None:
    result = run_g2(scenario)
    rows = zip(result.taus, result.g2_of_tau, result.g2_normalized)
    write_csv(out / "correlation.csv", header, ["tau_us", "g2_raw", "g2_normalized"], rows)
    peak = float(result.g2_of_tau.max())
    ratio = result.g2_of_tau[0] / peak if peak > 0 else math.nan
    print(f"G2(0) = {fmt(result.g2_of_tau[0])}, max G2 = {fmt(peak)}, ratio = {fmt(ratio)}")


def _oracle_outputs(scenario: Scenario, traj, out: Path, header) -> None:
    gen = build_generators(scenario.derived, scenario.get("n_max"))
    res = evolve(gen, scenario.train, grid=traj.times)
    rows = zip(res.times, res.mean_photon, res.flux, res.p11, res.p22, res.trace)
    write_csv(out / "oracle.csv", header,
              ["t_us", "mean_photon", "flux_per_us", "p11", "p22", "trace"], rows)
    summary = compare_with_adiabatic(res, traj)
    write_csv(out / "oracle_comparison.csv", header, ["metric", "value"],
              [(k, v) for k, v in summary.items()])
    print(f"flux deviation: max rel = {fmt(summary['max_rel_flux_deviation'])}, "
          f"L2 rel = {fmt(summary['l2_rel_flux_deviation'])}; "
          f"n_out full = {fmt(summary['n_out_full'])}, adiabatic = {fmt(summary['n_out_adiabatic'])}")


def cmd_oracle(scenario: Scenario, out: Path, header) -> None:
    _oracle_outputs(scenario, run_simulation(scenario), out, header)


def cmd_converge(scenario: Scenario, out: Path, header) -> None:
    report = fock_convergence(scenario.derived, scenario.train, scenario.get("fock_cutoffs"),
                              grid=_grid(scenario))
    rows = [(a, b, report.max_abs_diff[(a, b)], report.max_rel_diff[(a, b)])
            for (a, b) in report.max_abs_diff]
    write_csv(out / "fock_convergence.csv", header,
              ["n_max_a", "n_max_b", "max_abs_flux_diff", "max_rel_flux_diff"], rows)
    for a, b, d_abs, d_rel in rows:
        print(f"n_max {a} vs {b}: max rel flux difference {fmt(d_rel)}")


def sweep_point(scenario: Scenario, key: str, value: float):
    """Summary observables for one sweep value (runs in a worker process)."""
    text = str(int(value)) if key in INTEGER_KEYS else repr(float(value))
    point = with_overrides(scenario, [f"{key}={text}"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        traj = run_simulation(point)
        corr = run_g2(point, traj)
    peak = float(corr.g2_of_tau.max())
    ratio = corr.g2_of_tau[0] / peak if peak > 0 else math.nan
    return value, float(traj.n_out_cum[-1]), float(traj.pop_total[-1]), ratio


def cmd_sweep(scenario: Scenario, out: Path, header, jobs: int = 1) -> None:
    key = scenario.get("sweep_param")
    values = scenario.get("sweep_values")
    if not key or not values:
        raise ConfigError("sweep needs sweep_param and sweep_values")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_point, [scenario] * len(values), [key] * len(values), values))
    else:
        rows = [sweep_point(scenario, key, v) for v in values]
    write_csv(out / "sweep.csv", header,
              [key, "n_out_total", "final_pop_total", "g2_zero_over_max"], rows)
    print(f"sweep over {key}: {len(rows)} points")


COMMANDS = {
    "simulate": cmd_simulate,
    "g2": cmd_g2,
    "oracle": cmd_oracle,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photontrain",
        description="Simulate a double-Raman single-photon-train cavity source.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            scenario = load_config(args.config, args.override, base=args.preset)
        elif args.preset is not None:
            scenario = load_config(args.preset, args.override)
        else:
            raise ConfigError("give --config PATH and/or --preset NAME")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        for issue in check_regime(scenario.raw_params, scenario.derived):
            print(f"warning: {issue}", file=sys.stderr)
        header = header_lines(scenario, args.subcommand)
        with warnings.catch_warnings():
            # already reported above via check_regime
            warnings.simplefilter("ignore", RegimeWarning)
            if args.subcommand == "sweep":
                cmd_sweep(scenario, args.out, header, args.jobs)
            else:
                COMMANDS[args.subcommand](scenario, args.out, header)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, PositivityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
