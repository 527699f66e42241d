"""Reproduce the single vs. cascaded convolution comparison.

Usage: python scripts/run_figure4.py [-o OUTDIR] [--cost FILE]
Writes figure4.csv, figure4.dat and figure4.gp; run ``gnuplot figure4.gp`` for the chart.
"""

import argparse
import sys

from layered_hls.cli import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output", default="build")
    ap.add_argument("--cost")
    args = ap.parse_args()
    argv = ["bench", "figure4", "-o", args.output]
    if args.cost:
        argv += ["--cost", args.cost]
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
