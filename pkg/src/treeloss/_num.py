"""Small numeric helpers shared across modules."""

from __future__ import annotations

import math
from typing import Iterable


def power(base: float, exponent: float) -> float:
    """base**exponent for base >= 0 via exp-of-log; overflow saturates to inf.

    The exp-of-log route keeps large integer exponents (tree branching numbers)
    from tripping pow()'s OverflowError and gives a well-defined 0**e = 0.
    """
    if base == 0.0:
        return 0.0
    if base < 0.0:
        raise ValueError(f"power() requires base >= 0, got {base}")
    try:
        return math.exp(exponent * math.log(base))
    except OverflowError:
        return math.inf


def log_sum_exp(values: Iterable[float]) -> float:
    """log(sum(exp(v))) over a short sequence; -inf entries drop out."""
    vals = list(values)
    m = max(vals, default=-math.inf)
    if m == -math.inf:
        return -math.inf
    if math.isinf(m):
        return m
    return m + math.log(sum(math.exp(v - m) for v in vals))
