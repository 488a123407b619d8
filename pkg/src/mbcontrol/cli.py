"""Command-line batch runner."""

import argparse
import logging
import sys

from .experiment import default_config, load_config, run_batch


def build_parser():
    p = argparse.ArgumentParser(
        prog="mbcontrol",
        description="Run seeded Monte Carlo trials of the robust "
                    "multi-Bernoulli sensor-control loop and write CSVs.")
    p.add_argument("--config", help="YAML experiment config "
                   "(defaults to the built-in scenario)")
    p.add_argument("--runs", type=int, default=1, metavar="N")
    p.add_argument("--seed", type=int, default=12345, metavar="S")
    p.add_argument("--mode", choices=("robust", "baseline", "both"),
                   default="robust")
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--alpha", type=float, default=None,
                   help="Renyi divergence order in (0, 1)")
    p.add_argument("--reward-samples", type=int, default=None, metavar="L",
                   help="Monte Carlo sample sets per reward evaluation")
    p.add_argument("--workers", type=int, default=None, metavar="W",
                   help="trial pool size (default: CPU count)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.alpha is not None:
        cfg.control.alpha = args.alpha
    if args.reward_samples is not None:
        cfg.control.n_samples = args.reward_samples
    modes = ("robust", "baseline") if args.mode == "both" else (args.mode,)
    try:
        run_batch(cfg, args.runs, modes, args.out, args.seed, args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
