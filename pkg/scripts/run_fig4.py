#!/usr/bin/env python3
"""Relaxed infected-signal fidelity: stationary infection over the grid.

Integrates every (mu_s, mu_i) cell to stationarity and writes the level
matrix plus the per-mu_i optimum.  The full 0.005 grid takes a few minutes;
pass --coarse for a quick 0.02-step version.
"""

import argparse
import sys

from sis_persuasion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig4", help="output directory")
    parser.add_argument("--coarse", action="store_true", help="0.02-step grid instead of 0.005")
    args = parser.parse_args()
    argv = ["grid-mui", "--preset", "fig4", "--out", args.out, "-v"]
    if args.coarse:
        argv += ["--set", "experiment.step=0.02"]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
