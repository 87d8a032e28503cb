"""Command-line interface: simulate, plan, verify."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .bench import load_config, run_experiment, write_csv, write_meta, write_raw
from .exceptions import InfClipError
from .planners import (
    ZoConfig,
    ball_prox_geometry,
    plan_parameters,
    simplex_prox_geometry,
    theorem1_planner,
)
from .verify import verify_all

THREADS_ENV_VAR = "INFCLIP_THREADS"


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    result = run_experiment(cfg, threads=args.threads)
    stem = os.path.splitext(os.path.basename(args.config))[0]
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    write_csv(result, csv_path)
    write_meta(result, os.path.join(out_dir, f"{stem}.meta.json"))
    if cfg.dump_raw:
        write_raw(result, out_dir)
    print(f"wrote {csv_path}")
    return 0


def _cmd_plan(args) -> int:
    if args.theorem == 1:
        plan = theorem1_planner(args.T, args.alpha, args.n, args.M)
        values = {"lambda": plan.lam, "mu": plan.mu, "average_regret_bound": plan.bound}
    else:
        q = math.inf if args.q == "inf" else float(args.q)
        p = 1.0 if math.isinf(q) else q / (q - 1.0)
        cfg = ZoConfig(
            T=args.T, alpha=args.alpha, tau=args.tau, B=args.B, n=args.n,
            q=q, p=p, gamma=args.gamma, delta=args.delta,
            lipschitz_M=args.lipschitz, smooth_L=args.smooth,
        )
        if args.R1 is not None and args.D_psi is not None:
            r1, d_psi = args.R1, args.D_psi
        elif args.domain == "simplex":
            r1, d_psi = simplex_prox_geometry(args.n, args.gamma, args.alpha)
        elif args.domain == "ball":
            r1, d_psi = ball_prox_geometry(args.radius, args.alpha)
        else:
            raise InfClipError("give --R1 and --D-psi, or --domain {simplex,ball}")
        out = plan_parameters(cfg, r1, d_psi, eps=args.eps)
        values = {
            "a_q": out.a_q, "sigma_q": out.sigma_q, "mu": out.mu_star,
            "lambda": out.lambda_star, "tau": out.tau_star,
            "R1": out.R1, "D_psi": out.D_psi,
        }
        if out.iterations is not None:
            values["iterations"] = out.iterations
    if args.json:
        print(json.dumps(values, indent=2, sort_keys=True))
    else:
        for key, val in values.items():
            print(f"{key} = {val!r}")
    return 0


def _cmd_verify(args) -> int:
    report = verify_all(level=args.level)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        for check in report.checks:
            print(check.line())
        print(f"{'all checks passed' if report.passed else 'FAILURES PRESENT'} ({args.level})")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infclip",
        description="Clipped online-mirror-descent bandits: experiments, planners, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment config and write CSV output")
    sim.add_argument("--config", required=True, help="TOML experiment file")
    sim.add_argument("--out", default=None, help="output directory (default: cwd)")
    sim.add_argument("--threads", type=int, default=_default_threads(),
                     help=f"worker count (default from ${THREADS_ENV_VAR} or 1)")
    sim.set_defaults(func=_cmd_simulate)

    plan = sub.add_parser("plan", help="print closed-form parameter schedules")
    plan.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    plan.add_argument("--alpha", type=float, required=True)
    plan.add_argument("--T", type=int, required=True)
    plan.add_argument("--n", type=int, required=True)
    plan.add_argument("--M", type=float, default=1.0, help="moment scale (theorem 1)")
    plan.add_argument("--q", default="2", help="dual norm index in [2, inf] (theorem 2)")
    plan.add_argument("--tau", type=float, default=0.1)
    plan.add_argument("--B", type=float, default=1.0)
    plan.add_argument("--delta", type=float, default=0.0)
    plan.add_argument("--gamma", type=float, default=1e-3)
    plan.add_argument("--R1", type=float, default=None)
    plan.add_argument("--D-psi", dest="D_psi", type=float, default=None)
    plan.add_argument("--domain", choices=("simplex", "ball"), default=None)
    plan.add_argument("--radius", type=float, default=1.0)
    plan.add_argument("--eps", type=float, default=None, help="target accuracy")
    plan.add_argument("--lipschitz", type=float, default=None, help="Lipschitz constant M")
    plan.add_argument("--smooth", type=float, default=None, help="smoothness constant L")
    plan.add_argument("--json", action="store_true")
    plan.set_defaults(func=_cmd_plan)

    ver = sub.add_parser("verify", help="run the invariant verification suites")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    ver.add_argument("--json", action="store_true")
    ver.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfClipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
