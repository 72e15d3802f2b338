"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import meanfield
from .core import InitLaw
from .errors import ParameterError
from .harness import (
    ConfigError,
    TABLES,
    emit_report,
    load_config,
    report_text,
    run_phase,
    run_sweep,
    run_table,
    success_rate,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _write(result, args) -> None:
    if args.out:
        emit_report(result, args.format, args.out)
    else:
        sys.stdout.write(report_text(result, args.format))


def _load(args):
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["root_seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        changes["repetitions"] = args.reps
    return replace(config, **changes) if changes else config


def cmd_run(args) -> int:
    _write(success_rate(_load(args), workers=args.workers), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    if config.sweep is None:
        raise ConfigError("sweep", "config has no sweep axes")
    _write(run_sweep(config, workers=args.workers), args)
    return EXIT_OK


def cmd_table(args) -> int:
    _write(run_table(args.preset, args.reps, args.seed or 0, workers=args.workers), args)
    return EXIT_OK


def cmd_phase(args) -> int:
    _write(run_phase(args.preset, args.reps, args.seed or 0, workers=args.workers), args)
    return EXIT_OK


def cmd_meanfield(args) -> int:
    m = math.inf if args.M is None else args.M
    params = meanfield.LimitParams(
        lam=args.lam, sigma=args.sigma, dim=args.dim, dt=args.dt, horizon=args.horizon,
        samples=args.samples, trunc_m=m,
        init=InitLaw.isotropic(args.dim, args.init_mean, args.init_var),
        record_every=args.record_every, scheme=args.scheme,
    )
    if args.mode == "standard":
        traj = meanfield.simulate_limit_standard(params, args.p, args.seed)
        predicted = meanfield.rate_standard(args.lam, args.sigma, args.dim, args.p)
        print(f"fitted rate {meanfield.fit_rate(traj):.6g}, predicted {predicted:.6g}",
              file=sys.stderr)
    else:
        traj = meanfield.simulate_limit_truncated(params, args.p, args.seed)
        bound = meanfield.bound_truncated(args.lam, args.sigma, m, args.dim, args.p,
                                          traj.times[-1], traj.moments[0])
        print(f"final moment {traj.moments[-1]:.6g}, bound {bound:.6g}", file=sys.stderr)
    if traj.diverged:
        print("moment estimate overflowed; series truncated", file=sys.stderr)
    if args.out:
        meanfield.write_csv(traj, args.out)
    else:
        sys.stdout.write("t,moment,stderr\n")
        for row in zip(traj.times, traj.moments, traj.stderr):
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
    return EXIT_OK


def _inf_float(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbotrunc",
        description="Consensus-based optimization with truncated noise: experiments and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=None,
                       help="worker threads (default: CBO_THREADS or CPU count)")

    p = sub.add_parser("run", help="success rate of one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int, help="override repetitions")
    output_opts(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="success rates over the config's sweep grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int, help="override repetitions")
    output_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table", help="recompute a success-rate table")
    p.add_argument("--preset", required=True, choices=sorted(TABLES))
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    output_opts(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("phase", help="sigma x M phase diagram")
    p.add_argument("--preset", required=True, choices=("fig1a", "fig1b"))
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    output_opts(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("meanfield", help="moment diagnostics of the limit dynamics")
    p.add_argument("--mode", required=True, choices=("standard", "truncated"))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--M", type=_inf_float, default=None)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--init-mean", type=float, default=0.0)
    p.add_argument("--init-var", type=float, default=1.0)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--scheme", choices=("exponential", "euler"), default="exponential")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_meanfield)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything raised while computing
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
