"""Command line entry point: render figures from an aggregate CSV."""

import argparse
import sys

from .figures import FigureSpec, SchemaError, render_figures


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Render clutter-rate and cardinality figures from "
                    "a batch aggregate CSV.")
    parser.add_argument("aggregate_csv",
                        help="aggregate.csv written by the batch driver")
    parser.add_argument("out_dir", help="directory for the output images")
    parser.add_argument("--clutter-truth", type=float, default=10.0)
    parser.add_argument("--cardinality-truth", type=float, default=5.0)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    spec = FigureSpec(args.aggregate_csv, args.out_dir,
                      clutter_truth=args.clutter_truth,
                      cardinality_truth=args.cardinality_truth,
                      dpi=args.dpi)
    try:
        paths = render_figures(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
