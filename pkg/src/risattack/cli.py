"""Command-line entry point: ``run``, ``lemma1`` and ``selftest`` subcommands."""

from __future__ import annotations

import argparse
import itertools
import sys

import numpy as np

from .closed_form import LosInstance, lemma1_best

EXIT_USAGE = 2


def _cmd_run(args) -> int:
    from .harness import ConfigError, load_config, run_experiment

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        records = run_experiment(cfg, args.out)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    failed = sum(r.status.startswith("Error") for r in records)
    print(f"{len(records)} records written to {args.out}" + (f" ({failed} errored)" if failed else ""))
    return 0


def _cmd_lemma1(args) -> int:
    print(f"{'hs':>12} {'rho':>12} {'N':>5} {'xi':>14} {'snr':>14} {'snr_db':>9}")
    for hs, rho, n in itertools.product(args.hs, args.rho, args.n):
        if hs < 0 or rho < 0 or n < 1:
            print(f"error: need hs >= 0, rho >= 0, n >= 1 (got {hs}, {rho}, {n})", file=sys.stderr)
            return EXIT_USAGE
        inst = LosInstance(hs, 0.0, rho, (0.0,) * n, args.sigma2)
        xi, snr = lemma1_best(inst)
        db = 10 * np.log10(snr) if snr > 0 else float("-inf")
        print(f"{hs:12.6g} {rho:12.6g} {n:5d} {xi:14.8g} {snr:14.8g} {max(db, -120.0):9.3f}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(verbose=not args.quiet)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risattack", description="Destructive RIS beamforming experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a Monte-Carlo sweep from a YAML config")
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("lemma1", help="closed-form LoS attack over value grids")
    p.add_argument("--hs", type=float, nargs="+", required=True, help="static path magnitude(s)")
    p.add_argument("--rho", type=float, nargs="+", required=True, help="per-element reflected magnitude(s)")
    p.add_argument("--n", type=int, nargs="+", required=True, help="number(s) of elements")
    p.add_argument("--sigma2", type=float, default=1.0, help="noise power (default 1)")
    p.set_defaults(func=_cmd_lemma1)

    p = sub.add_parser("selftest", help="quick oracle and invariant checks")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code) if exc.code is not None else 0
    if getattr(args, "sigma2", 1.0) <= 0:
        parser.print_usage(sys.stderr)
        print("error: --sigma2 must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
