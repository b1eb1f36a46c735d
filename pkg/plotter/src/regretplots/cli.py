"""Command-line figure generation: `plot setup ...` and `plot normalized ...`."""

from __future__ import annotations

import argparse
import sys

from . import figures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from simulation CSV output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="cumulative regret curves for one setup")
    p.add_argument("--dir", required=True)
    p.add_argument("--setup", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("normalized", help="averaged normalized regret curves")
    p.add_argument("--dir", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "setup":
            figures.plot_setup_regret(args.dir, args.setup, args.out)
        else:
            figures.plot_normalized_average(args.dir, args.out)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
