#!/usr/bin/env python3
"""Trace the admission-probability branches across the bistable range.

Sweeps the node arrival weight over a range that starts below the lower
window endpoint and ends above the upper one, so the output shows the
unique-regime curve, the fork into even/odd branches, and the merge back.
Writes branch_curves.csv unless --out overrides it.
"""
import sys

from treeloss.cli import main

ARGS = [
    "blocking-curve",
    "--q", "10", "--cap", "2", "--cv", "1", "--ce", "2",
    "--weights", "poisson", "--lam", "0.75",
    "--nu-min", "1", "--nu-max", "150", "--nu-step", "0.5",
    "--out", "branch_curves.csv",
]

if __name__ == "__main__":
    sys.exit(main(ARGS + sys.argv[1:]))
