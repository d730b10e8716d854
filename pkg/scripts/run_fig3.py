#!/usr/bin/env python3
"""Dynamic signaling with the credibility-penalised stage cost.

Runs the optimizer with stage cost y + c*(1 - mu_s)^2 (default c = 0.8);
run with --weight 0 to produce the plain-cost counterpart for comparison.
"""

import argparse
import sys

from sis_persuasion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig3", help="output directory")
    parser.add_argument("--weight", type=float, default=0.8, help="penalty weight c")
    parser.add_argument("--max-iter", type=int, default=500, help="solver iteration cap")
    args = parser.parse_args()
    return cli_main(
        [
            "optimize",
            "--preset",
            "fig3",
            "--out",
            args.out,
            "--set",
            f"experiment.cost_weight={args.weight}",
            "--set",
            f"experiment.max_iter={args.max_iter}",
            "-v",
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
