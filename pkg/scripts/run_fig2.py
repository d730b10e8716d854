#!/usr/bin/env python3
"""Static versus dynamic signaling over a finite horizon.

Solves the optimal-control problem, simulates the optimal static signal,
and writes both trajectories, the dynamic control, and a comparison JSON.
"""

import argparse
import sys

from sis_persuasion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig2", help="output directory")
    parser.add_argument("--max-iter", type=int, default=500, help="solver iteration cap")
    args = parser.parse_args()
    return cli_main(
        [
            "compare",
            "--preset",
            "fig2",
            "--out",
            args.out,
            "--set",
            f"experiment.max_iter={args.max_iter}",
            "-v",
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
