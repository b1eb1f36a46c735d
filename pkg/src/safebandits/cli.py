"""Command-line entry point.

Subcommands: ``simulate`` (sweep a config file), ``reproduce`` (the reference
3-setup privacy-permutation experiment), ``allocate`` (privacy levels for a
regret budget), and ``geometry`` (shrinkage and sharpness queries on a safe
set file). Worker-process count comes from the SAFEBANDITS_WORKERS
environment variable; any hard error exits nonzero.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np
import yaml

from . import allocator, geometry, harness


def _cmd_simulate(args) -> int:
    config = harness.load_config(args.config)
    vectors = config.privacy_vectors or [config.base_alpha]
    tasks = [(1, config, alphas, seed)
             for alphas in vectors for seed in config.seeds]
    rows = harness.run_sweep(tasks, args.out)
    print(f"wrote {len(rows)} runs to {args.out}")
    return 0


def _cmd_reproduce(args) -> int:
    rows = harness.reproduce_experiment(args.out, horizon=args.horizon,
                                        t_prime=args.t_prime,
                                        n_seeds=args.seeds)
    print(f"wrote {len(rows)} runs to {args.out}")
    return 0


def _cmd_allocate(args) -> int:
    with open(args.input) as f:
        raw = yaml.safe_load(f)
    inputs = allocator.BudgetInputs(
        U=float(raw["u_budget"]), L=float(raw["lipschitz"]),
        K=float(raw["k_bound"]), S=float(raw["s_bound"]),
        d=int(raw["d"]), M=int(raw["m"]), sigma=float(raw["sigma"]),
        R=float(raw["r_sub_gaussian"]),
        c=np.asarray(raw["c"], dtype=float),
        lambda_check=float(raw["lambda_check"]))
    a_star = allocator.allocate(inputs)
    report = allocator.verify_unimprovable(
        a_star, inputs, n_samples=args.samples,
        rng=np.random.default_rng(args.seed))
    print("a* =", " ".join(repr(float(v)) for v in a_star.a))
    print("r(a*) =", repr(float(allocator.r_of_a(a_star, inputs))))
    print("f(a*) =", repr(float(allocator.f_of_a(a_star, inputs.c, inputs.R,
                                                 inputs.sigma))))
    print(report.summary())
    return 0 if report.passed else 1


def _cmd_geometry(args) -> int:
    with open(args.polytope) as f:
        poly = geometry.geometry_from_text(f.read())
    if args.operation == "max-shrinkage":
        print(repr(float(geometry.max_shrinkage(poly))))
    elif args.operation == "shrink":
        if args.delta is None:
            raise ValueError("shrink needs --delta")
        print(geometry.shrink(poly, args.delta).to_text(), end="")
    elif args.operation == "sharpness":
        if args.delta is None:
            raise ValueError("sharpness needs --delta")
        print(repr(float(geometry.sharpness(poly, args.delta))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safebandits",
        description="Safe linear bandit simulation under local differential privacy")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the sweep described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reproduce", help="run the reference privacy-permutation sweep")
    p.add_argument("--out", required=True)
    p.add_argument("--t-prime", type=int, default=None)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--horizon", type=int, default=10000)
    p.set_defaults(func=_cmd_reproduce)

    p = sub.add_parser("allocate", help="privacy levels for a regret budget")
    p.add_argument("--input", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("geometry", help="safe-set shrinkage and sharpness queries")
    p.add_argument("operation", choices=["sharpness", "shrink", "max-shrinkage"])
    p.add_argument("--polytope", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(func=_cmd_geometry)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # CLI boundary: report and exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
