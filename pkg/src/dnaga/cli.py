"""Command-line entry point: ``dnaga {generate,analyze,simulate,compare,macro}``.

Exit codes: 0 success, 2 configuration or input error, 3 scenario generation
or UE sampling failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from ._util import DnagaError, GenerationError, NumericalError, SamplingError
from .core import CdfCurve, analyze_cell
from .macroscopic import analytical_hex_bound, semi_analytical, simulate_deployments
from .simulator import EmpiricalCdf, SimConfig, ks_distance, max_cdf_deviation, simulate, supports_overlap

log = logging.getLogger("dnaga")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_NUMERICAL = 4


def _load(args):
    cfg = cfgmod.load(args.config)
    return cfg.with_overrides(seed=args.seed, threads=args.threads,
                              grid_points=getattr(args, "grid_points", None))


def _out_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_parameters(analysis, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "value"])
        for name, value in analysis.parameter_rows():
            w.writerow([name, f"{value:.15g}" if isinstance(value, float) else value])


def write_analysis(analysis, out):
    analysis.signal_cdf.to_csv(out / "signal_cdf.csv")
    analysis.interference_cdf.to_csv(out / "interference_cdf.csv")
    analysis.sir_cdf.to_csv(out / "sir_cdf.csv")
    write_parameters(analysis, out / "parameters.csv")


def _analyze(cfg):
    a = cfg.analysis
    return analyze_cell(cfg.deployment(), cfg.scenario.victim, cfg.channel_params(), cfg.fading_model(),
                        m0=a.m0, n_samples=a.n_samples, seed=cfg.seed, grid_points=a.grid_points,
                        threads=cfg.threads, fit_samples=a.fit_samples)


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args):
    cfg = _load(args)
    dep = cfg.deployment()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dep.to_csv(out)
    print(f"wrote {len(dep)} cells to {out}")
    return EXIT_OK


def cmd_analyze(args):
    cfg = _load(args)
    a = _analyze(cfg)
    out = _out_dir(args.out)
    write_analysis(a, out)
    print(f"mu_G1={a.signal.mean:.4f} var_G1={a.signal.var:.4f} "
          f"lambda={a.aggregate.lam:.4f} mu_Q={a.aggregate.mu_q:.4f} var_Q={a.aggregate.var_q:.4f}")
    print(f"median SIR {a.sir_cdf.median():.3f} dB; outputs in {out}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load(args)
    s = cfg.simulation
    sim = SimConfig(s.n_ue_drops, s.n_channel_draws, cfg.seed, cfg.scenario.victim)
    res = simulate(cfg.deployment(), cfg.channel_params(), cfg.fading_model(), sim, threads=cfg.threads)
    out = _out_dir(args.out)
    res.signal.to_csv(out / "signal_empirical.csv")
    res.interference.to_csv(out / "interference_empirical.csv")
    res.sir.to_csv(out / "sir_empirical.csv")
    print(f"{len(res.sir)} samples; median SIR {res.sir.median():.3f} dB; outputs in {out}")
    return EXIT_OK


def _read_curve(path):
    try:
        return CdfCurve.from_csv(path)
    except (OSError, ValueError) as exc:
        raise cfgmod.ConfigError(str(path), f"cannot read analytic CDF ({exc})") from None


def _read_empirical(path):
    try:
        return EmpiricalCdf.from_csv(path)
    except (OSError, ValueError) as exc:
        raise cfgmod.ConfigError(str(path), f"cannot read empirical CDF ({exc})") from None


def cmd_compare(args):
    curve = _read_curve(args.analytic)
    emp = _read_empirical(args.empirical)
    if not supports_overlap(emp, curve):
        log.warning("analytic and empirical supports do not overlap")
        ks = 1.0
    else:
        ks = ks_distance(emp, curve)
    dev = max_cdf_deviation(emp, curve)
    print(f"ks_distance={ks:.6f}")
    print(f"max_deviation={dev:.6f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ks_distance", "max_deviation", "n_samples", "analytic_median_db", "empirical_median_db"])
            w.writerow([f"{ks:.15g}", f"{dev:.15g}", len(emp), f"{curve.median():.15g}", f"{emp.median():.15g}"])
    return EXIT_OK


def cmd_macro(args):
    cfg = _load(args)
    out = _out_dir(args.out)
    params, fading = cfg.channel_params(), cfg.fading_model()
    if args.mode == "hex":
        s, a = cfg.scenario, cfg.analysis
        res, g1, pl = analytical_hex_bound(cfg.hotspot_config(), params, fading, m0=a.m0,
                                           n_samples=a.n_samples, seed=cfg.seed,
                                           grid_points=a.grid_points, threads=cfg.threads,
                                           density=s.density_per_km2, count=s.n_cells,
                                           fit_samples=a.fit_samples)
        write_analysis(res.analysis, out)
        print(f"hex bound: median SIR {res.median():.3f} dB (lambda={pl.lam:.4f}, mu_Q={pl.mu_q:.4f})")
        return EXIT_OK
    m = cfg.macro
    hot = cfg.hotspot_config()
    res = semi_analytical(hot, params, fading, m.n_deployments, cfg.seed, m.victim_policy,
                          m0=cfg.analysis.m0, n_samples=m.n_samples, grid_step=m.grid_step_db,
                          fit_samples=m.fit_samples, threads=cfg.threads)
    if not args.no_reference:
        emp = simulate_deployments(hot, params, fading, m.n_deployments, cfg.seed, m.n_ue_drops,
                                   m.n_channel_draws, m.victim_policy, threads=cfg.threads)
        emp.to_csv(out / "sir_pooled_empirical.csv")
        res = res.compare(emp)
    res.to_csv(out / "sir_mean_cdf.csv")
    res.write_summary(out / "summary.csv")
    msg = f"{m.n_deployments} deployments: median SIR {res.median():.3f} dB"
    if res.max_dev is not None:
        msg += f", max deviation vs simulation {res.max_dev:.4f}"
    print(msg)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="dnaga", description="Uplink SIR analysis of dense small-cell networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", required=True, help="output file or directory")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        if grid:
            sp.add_argument("--grid-points", type=int, help="points per output CDF")

    common(sub.add_parser("generate", help="write the deployment as CSV"), grid=False)
    common(sub.add_parser("analyze", help="signal, interference and SIR CDFs for the tagged cell"))
    common(sub.add_parser("simulate", help="Monte Carlo empirical CDFs"), grid=False)
    cp = sub.add_parser("compare", help="KS distance between an analytic and an empirical CDF")
    cp.add_argument("analytic", help="analytic CDF CSV (value_db, cdf)")
    cp.add_argument("empirical", help="empirical CSV (samples or value_db, cdf)")
    cp.add_argument("--out", help="optional summary CSV")
    mp = sub.add_parser("macro", help="deployment-averaged CDF or hex-lattice bound")
    common(mp)
    mp.add_argument("--mode", choices=("semi", "hex"), default="semi")
    mp.add_argument("--no-reference", action="store_true",
                    help="skip the pooled simulation used for the deviation summary")
    return p


COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "macro": cmd_macro,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GenerationError, SamplingError) as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DnagaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
