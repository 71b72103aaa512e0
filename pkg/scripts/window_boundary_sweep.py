#!/usr/bin/env python3
"""Locate the edge-rate threshold where a bistable window first opens.

Sweeps the Poisson edge rate through the critical value (6 for branching
factor 6 and budget 2) and records, at each rate, whether the window is
present together with its endpoints.  Writes window_boundary_sweep.csv
unless --out overrides it.
"""
import sys

from treeloss.cli import main

ARGS = [
    "sweep-region",
    "--q", "6", "--cap", "2", "--weights", "poisson",
    "--lam-min", "5.5", "--lam-max", "8", "--lam-step", "0.01",
    "--out", "window_boundary_sweep.csv",
]

if __name__ == "__main__":
    sys.exit(main(ARGS + sys.argv[1:]))
