"""Command line: plot <kind> --csv <path> --out <path> [--t0 --t1] [--umax]."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, PlotError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from simulation CSV logs"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--csv", required=True, help="input CSV log")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--t0", type=float, default=None, help="window start (s)")
    parser.add_argument("--t1", type=float, default=None, help="window end (s)")
    parser.add_argument("--umax", type=float, default=23.0,
                        help="torque bound drawn on torque plots")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(args.csv, args.kind, args.out, args.t0, args.t1, args.umax)
        out = render(spec)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
