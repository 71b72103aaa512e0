#!/usr/bin/env python3
"""Map the bistable region for geometric edge weights at branching factor 14.

The window opens and closes again as the edge rate grows, so the sweep
covers both crossings (at 7/8 and 8/7).  Writes geometric_window_sweep.csv
unless --out overrides it.
"""
import sys

from treeloss.cli import main

ARGS = [
    "sweep-region",
    "--q", "14", "--cap", "2", "--weights", "geometric",
    "--lam-min", "0.5", "--lam-max", "1.5", "--lam-step", "0.005",
    "--out", "geometric_window_sweep.csv",
]

if __name__ == "__main__":
    sys.exit(main(ARGS + sys.argv[1:]))
