#!/usr/bin/env python3
"""Probe for branch splitting when both call types are capped at 2.

With node and edge caps both equal to the joint budget, the fixed-point
state is two-dimensional and the scalar window analysis does not apply;
this sweep finds the node rates where iteration still detects distinct
even/odd limits.  Writes two_cap_probe.csv unless --out overrides it.
"""
import sys

from treeloss.cli import main

ARGS = [
    "blocking-curve",
    "--q", "10", "--cap", "2", "--cv", "2", "--ce", "2",
    "--weights", "poisson", "--lam", "0.72",
    "--nu-min", "10", "--nu-max", "60", "--nu-step", "1",
    "--out", "two_cap_probe.csv",
]

if __name__ == "__main__":
    sys.exit(main(ARGS + sys.argv[1:]))
