"""Command-line front end.

Subcommands: run, sweep, lamb-oseen, pv, check-theory. Exit codes: 0 on
success, 2 for configuration errors, 3 for numerical aborts (CFL, sign
guard, collisions), 4 for a theory-check violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import ConfigError, NumericalAbort
from .experiments import run_experiment, run_sweep, validate_lamb_oseen, write_pv_csv
from .point_vortex import PVState, pv_run
from .theory_checks import run_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_THEORY = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Viscous 2D vortex dynamics laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single paired NS + point-vortex run")
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep", help="(eps, nu) sweep with summary and rate fits")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel runs (VORTEXLAB_JOBS overrides)")

    p = sub.add_parser("lamb-oseen", help="self-similar vortex validation run")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)

    p = sub.add_parser("pv", help="point-vortex-only integration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".", help="directory for pv.csv (default: cwd)")

    sub.add_parser("check-theory", help="verify the closed-form inequality estimates")
    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    artifacts = run_experiment(config, args.out)
    print(f"run complete: {artifacts.out_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = ExperimentConfig.load(args.config)
    summary, rates = run_sweep(config, args.out, jobs=args.jobs)
    print(f"sweep complete: {summary}")
    print(f"rate fits: {rates}")
    return EXIT_OK


def _cmd_lamb_oseen(args) -> int:
    report = validate_lamb_oseen(args.nu, args.n, args.L, args.t0, args.t_end)
    print(f"nu={report['nu']:g} n={report['n']} L={report['L']:g} "
          f"t0={report['t0']:g} t_end={report['t_end']:g}")
    print(f"max relative L2 field error:      {report['max_rel_l2_error']:.6e}")
    print(f"max moment-law deviation (rel):   {report['max_moment_law_rel_deviation']:.6e}")
    print(f"max relative sup-norm error:      {report['max_linf_rel_error']:.6e}")
    print(f"final intensity error:            {report['intensity_error']:.6e}")
    return EXIT_OK


def _cmd_pv(args) -> int:
    config = ExperimentConfig.load(args.config)
    positions = [list(b.center) for b in config.layout]
    strengths = [b.a for b in config.layout]
    traj = pv_run(
        PVState(positions, strengths),
        t_end=config.solver.t_end,
        dt=config.pv.dt,
        schedule=config.solver.resolve_diag_times(),
        collision_floor=config.pv.collision_floor,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pv_csv(out / "pv.csv", traj)
    if traj.aborted:
        print(f"pv aborted: {traj.abort_reason} (partial trajectory in {out / 'pv.csv'})",
              file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"pv run complete: {out / 'pv.csv'}")
    return EXIT_OK


def _cmd_check_theory(_args) -> int:
    report = run_checks()
    a = report.truncated_exponential
    b = report.falling_factorial
    print(f"truncated exponential bound: min slack {a.slack:.6e} at {a.at}")
    print(f"falling factorial bound:     min slack {b.slack:.6e} at {b.at}")
    if not report.passed:
        print("THEORY CHECK FAILED: inequality violated", file=sys.stderr)
        return EXIT_THEORY
    print("all inequality checks passed")
    return EXIT_OK


_DISPATCH = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "lamb-oseen": _cmd_lamb_oseen,
    "pv": _cmd_pv,
    "check-theory": _cmd_check_theory,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
