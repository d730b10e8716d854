#!/usr/bin/env python3
"""Static-signal sweeps: infection level at the SNE versus mu_s.

Writes one sweep CSV per panel (protection cost above / below its floor).
"""

import argparse
import sys

from sis_persuasion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig1", help="output directory root")
    args = parser.parse_args()
    for panel in ("left", "right"):
        code = cli_main(
            [
                "static-sweep",
                "--preset",
                f"fig1-{panel}",
                "--out",
                f"{args.out}/{panel}",
            ]
        )
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
