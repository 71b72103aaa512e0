"""Activity weight vectors and their cached partial sums.

A weight vector assigns a nonnegative activity ``w[i]`` to each occupancy
level ``i = 0 .. top_index`` of a network element, with ``w[0] > 0``.
Partial sums ``S_k = w[0] + ... + w[k]`` are cached at construction because
every downstream formula consumes partial sums, never the raw entries.

Entries may be floats or exact rationals (``fractions.Fraction``); arithmetic
follows the entry type, so vectors built from Fraction rates stay exact all
the way through the partial sums. The exact accessors convert float entries
to the rationals they represent, which makes sign decisions (log-concavity,
window existence) free of rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from pathlib import Path

__all__ = [
    "WeightVector",
    "poisson_weights",
    "geometric_weights",
    "load_weight_file",
    "log_concavity_margin",
    "partial_sums_log_concave",
]


def _is_valid_entry(x) -> bool:
    if isinstance(x, float):
        return x >= 0.0 and x == x and x != float("inf")
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return x >= 0
    return False


@dataclass(frozen=True)
class WeightVector:
    """Immutable per-occupancy activities with cached partial sums.

    Invariants: ``entries[0] > 0``, all entries nonnegative and finite, and
    ``partial_sums[k] == partial_sums[k-1] + entries[k]`` by construction
    (running recurrence, so the identity holds exactly even in floats).
    """

    entries: tuple
    partial_sums: tuple = None  # derived; any value passed in is ignored

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("weight vector needs at least one entry")
        if not all(_is_valid_entry(e) for e in entries):
            raise ValueError(f"weight entries must be finite and >= 0: {entries!r}")
        if not entries[0] > 0:
            raise ValueError("entries[0] must be positive (normalize before building)")
        sums = []
        acc = entries[0]
        sums.append(acc)
        for e in entries[1:]:
            acc = acc + e
            sums.append(acc)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "partial_sums", tuple(sums))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def top_index(self) -> int:
        return len(self.entries) - 1

    def partial_sum(self, k: int):
        """S_k = entries[0] + ... + entries[k]; k outside [0, top_index] is rejected."""
        if not isinstance(k, int) or isinstance(k, bool):
            raise ValueError(f"partial sum index must be an int, got {k!r}")
        if not 0 <= k <= self.top_index:
            raise ValueError(f"partial sum index {k} outside [0, {self.top_index}]")
        return self.partial_sums[k]

    def exact_entries(self) -> tuple:
        """Entries as exact Fractions (floats convert losslessly)."""
        return tuple(Fraction(e) for e in self.entries)

    def exact_partial_sum(self, k: int) -> Fraction:
        if not isinstance(k, int) or isinstance(k, bool):
            raise ValueError(f"partial sum index must be an int, got {k!r}")
        if not 0 <= k <= self.top_index:
            raise ValueError(f"partial sum index {k} outside [0, {self.top_index}]")
        total = Fraction(0)
        for e in self.entries[: k + 1]:
            total += Fraction(e)
        return total


def poisson_weights(rate, top_index: int) -> WeightVector:
    """Entries rate**i / i! for i = 0..top_index. Exact when rate is a Fraction."""
    if not (isinstance(top_index, int) and top_index >= 0):
        raise ValueError(f"top_index must be an int >= 0, got {top_index!r}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    one = rate / rate  # unit in the arithmetic of `rate`
    entries = [one]
    for i in range(1, top_index + 1):
        entries.append(entries[-1] * rate / i)
    return WeightVector(tuple(entries))


def geometric_weights(rate, top_index: int) -> WeightVector:
    """Entries rate**i for i = 0..top_index (processor-sharing service)."""
    if not (isinstance(top_index, int) and top_index >= 0):
        raise ValueError(f"top_index must be an int >= 0, got {top_index!r}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    one = rate / rate
    entries = [one]
    for i in range(1, top_index + 1):
        entries.append(entries[-1] * rate)
    return WeightVector(tuple(entries))


def load_weight_file(path) -> WeightVector:
    """Parse a weight file: one decimal real per line.

    Blank lines are skipped; everything after a ``#`` is a comment. The usual
    vector validation (first entry positive, all nonnegative) applies.
    """
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not a number: {raw!r}") from exc
    if not values:
        raise ValueError(f"{path}: no weight entries found")
    return WeightVector(tuple(values))


def log_concavity_margin(w: WeightVector, cap: int) -> Fraction:
    """S_{cap-1}**2 - S_cap * S_{cap-2} as an exact rational.

    Positive iff the partial-sum sequence is strictly log-concave at index
    cap-1, which is what makes the scalar occupancy-ratio map decreasing.
    """
    if not (isinstance(cap, int) and cap >= 2):
        raise ValueError(f"cap must be an int >= 2, got {cap!r}")
    if w.top_index < cap:
        raise ValueError(f"need entries up to index {cap}, have {w.top_index}")
    s = w.exact_partial_sum
    return s(cap - 1) ** 2 - s(cap) * s(cap - 2)


def partial_sums_log_concave(w: WeightVector, cap: int) -> bool:
    """True iff the log-concavity margin at cap is strictly positive.

    Decided in exact rational arithmetic; a margin of exactly zero (e.g. a
    vector whose partial sums are constant from cap-2 on) returns False.
    """
    return log_concavity_margin(w, cap) > 0
