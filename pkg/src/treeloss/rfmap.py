"""Occupancy-ratio recursion on the regular tree and uniqueness classification.

The model: calls at nodes (cap ``cv`` per node) and calls at edges (cap ``ce``
per edge) of an infinite tree in which every node has ``q`` children, subject
to a joint budget ``cap`` on each edge: node + edge + node occupancy along an
edge can never exceed ``cap``. Stationary laws are built from per-occupancy
activity weights at nodes and edges.

State here is the ratio vector ``xi = (xi_1, ..., xi_cv)`` of partition values
normalized by the empty-occupancy one (the component ``xi_0 = 1`` is implied).
One application of the map grows the tree by one generation. In partial-sum
form, with ``S(a) = sum of edge weights up to min(a, ce)`` and ``S(a) = 0``
for ``a < 0``:

    Phi_k(xi) = nu_k * ( sum_j S(cap-k-j) xi_j / sum_j S(cap-j) xi_j )**q

for k = 1..cv, xi_0 = 1. This equals the direct double sum over the edge and
child occupancies (swap the order of summation); the numerator coefficients
are termwise dominated by the denominator ones, so 0 <= Phi_k <= nu_k always.

The infinite-tree law is unique exactly when iterating the map from the zero
vector converges; a persistent two-cycle of the iterates witnesses multiple
laws. ``classify_by_iteration`` implements that test with an honest
Inconclusive fallback when the iteration budget runs out.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from ._num import power
from .weights import WeightVector

__all__ = [
    "ModelParams",
    "Uniqueness",
    "UniquenessVerdict",
    "random_field_map",
    "classify_by_iteration",
    "pair_interaction",
    "interaction_map",
    "conjugate_maps",
]


@dataclass(frozen=True)
class ModelParams:
    """Branching number, caps, and activity weights of the tree model.

    ``q >= 1`` is the branching number (every node has q children; the tree
    degree is q+1). ``cap`` is the per-edge joint budget, ``cv`` the node cap,
    ``ce`` the edge cap. ``node_weights`` has length cv+1 with first entry 1;
    ``edge_weights`` has length ce+1.
    """

    q: int
    cap: int
    cv: int
    ce: int
    node_weights: WeightVector
    edge_weights: WeightVector

    def __post_init__(self):
        for name in ("q", "cap", "cv", "ce"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"{name} must be an int, got {v!r}")
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.cap < 1:
            raise ValueError(f"cap must be >= 1, got {self.cap}")
        if not 1 <= self.cv <= self.cap:
            raise ValueError(f"cv must lie in [1, cap={self.cap}], got {self.cv}")
        if not 0 <= self.ce <= self.cap:
            raise ValueError(f"ce must lie in [0, cap={self.cap}], got {self.ce}")
        if len(self.node_weights) != self.cv + 1:
            raise ValueError(
                f"node_weights needs length cv+1={self.cv + 1}, got {len(self.node_weights)}"
            )
        if len(self.edge_weights) != self.ce + 1:
            raise ValueError(
                f"edge_weights needs length ce+1={self.ce + 1}, got {len(self.edge_weights)}"
            )
        if float(self.node_weights.entries[0]) != 1.0:
            raise ValueError("node_weights[0] must equal 1")


@lru_cache(maxsize=512)
def _coefficients(p: ModelParams):
    """Partial-sum coefficient rows of the map: (numerator rows, denominator row).

    num[k-1][j] = S(min(cap-k-j, ce)), den[j] = S(min(cap-j, ce)), as floats,
    with S of a negative index equal to 0.
    """

    def clipped(a: int) -> float:
        if a < 0:
            return 0.0
        return float(p.edge_weights.partial_sum(min(a, p.ce)))

    den = tuple(clipped(p.cap - j) for j in range(p.cv + 1))
    num = tuple(
        tuple(clipped(p.cap - k - j) for j in range(p.cv + 1))
        for k in range(1, p.cv + 1)
    )
    return num, den


def _check_ratio_vector(p: ModelParams, xi) -> tuple:
    vec = tuple(float(x) for x in xi)
    if len(vec) != p.cv:
        raise ValueError(f"ratio vector needs length cv={p.cv}, got {len(vec)}")
    for x in vec:
        if not (x >= 0.0 and math.isfinite(x)):
            raise ValueError(f"ratio entries must be finite and >= 0: {vec!r}")
    return vec


def random_field_map(p: ModelParams, xi) -> tuple:
    """One application of the ratio map Phi to a ratio vector of length cv."""
    vec = _check_ratio_vector(p, xi)
    num, den = _coefficients(p)
    nus = p.node_weights.entries
    d = den[0]
    for j in range(p.cv):
        d += den[j + 1] * vec[j]
    out = []
    for k in range(p.cv):
        nu_k = float(nus[k + 1])
        if nu_k == 0.0:
            out.append(0.0)
            continue
        row = num[k]
        n = row[0]
        for j in range(p.cv):
            n += row[j + 1] * vec[j]
        out.append(nu_k * power(n / d, p.q) if n > 0.0 else 0.0)
    return tuple(out)


class Uniqueness(enum.Enum):
    UNIQUE = "unique"
    MULTIPLE = "multiple"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class UniquenessVerdict:
    """Outcome of the iteration test.

    ``fixed_point`` is set for Unique. ``even_limit``/``odd_limit`` are the
    stabilized two-cycle points for Multiple; for Inconclusive they hold the
    last even/odd iterates (not converged - useful for diagnostics, flagged
    by the kind).
    """

    kind: Uniqueness
    iterations: int
    fixed_point: tuple | None = None
    even_limit: tuple | None = None
    odd_limit: tuple | None = None


def _sup_gap(a: tuple, b: tuple) -> float:
    return max(abs(x - y) for x, y in zip(a, b))


def classify_by_iteration(
    p: ModelParams,
    tol: float = 1e-12,
    sep: float = 1e-8,
    max_iter: int = 10**6,
) -> UniquenessVerdict:
    """Iterate Phi from the zero vector and classify the limiting behavior.

    Unique: successive iterates agree within ``tol`` (sup norm, relative to
    1 + ||xi||_inf). Multiple: both parity subsequences have stabilized to
    within ``tol`` but sit further than ``sep`` apart, and each limit is
    numerically fixed under Phi∘Phi. Inconclusive: budget exhausted.
    ``tol < sep`` is required so that slow convergence cannot masquerade as a
    two-cycle.

    For cv == 1 with a nonincreasing map the parity subsequences must form a
    monotone sandwich (evens rise, odds fall, evens below odds); that ordering
    is asserted on every run and a violation raises RuntimeError, since it
    would mean the iteration itself is buggy.
    """
    if not 0.0 < tol < sep:
        raise ValueError(f"need 0 < tol < sep, got tol={tol}, sep={sep}")
    if not (isinstance(max_iter, int) and max_iter >= 4):
        raise ValueError(f"max_iter must be an int >= 4, got {max_iter!r}")

    num, den = _coefficients(p)
    nus = tuple(float(v) for v in p.node_weights.entries[1:])
    q, cv = p.q, p.cv

    def step(x: tuple) -> tuple:
        d = den[0]
        for j in range(cv):
            d += den[j + 1] * x[j]
        out = []
        for k in range(cv):
            nu_k = nus[k]
            if nu_k == 0.0:
                out.append(0.0)
                continue
            row = num[k]
            n = row[0]
            for j in range(cv):
                n += row[j + 1] * x[j]
            out.append(nu_k * power(n / d, q) if n > 0.0 else 0.0)
        return tuple(out)

    # scalar map slope sign: decreasing iff num[0] x den cross-difference <= 0
    monotone = cv == 1 and (num[0][1] * den[0] - num[0][0] * den[1]) <= 0.0

    zero = (0.0,) * cv
    xs = [zero]  # xs[n] = xi^(n); only the last four are kept
    last_even, last_odd = zero[0] if cv == 1 else None, None

    for n in range(1, max_iter + 1):
        x_new = step(xs[-1])
        xs.append(x_new)
        scale = 1.0 + max(x_new)

        if monotone:
            v = x_new[0]
            slack = tol * scale
            if n % 2 == 0:
                if v < last_even - slack or (last_odd is not None and v > last_odd + slack):
                    raise RuntimeError(
                        "internal consistency: even iterates left the monotone sandwich"
                    )
                last_even = v
            else:
                if (last_odd is not None and v > last_odd + slack) or v < last_even - slack:
                    raise RuntimeError(
                        "internal consistency: odd iterates left the monotone sandwich"
                    )
                last_odd = v

        if _sup_gap(x_new, xs[-2]) <= tol * scale:
            return UniquenessVerdict(Uniqueness.UNIQUE, n, fixed_point=x_new)

        if len(xs) >= 4:
            gap_here = _sup_gap(x_new, xs[-3])
            gap_prev = _sup_gap(xs[-2], xs[-4])
            cycle = _sup_gap(x_new, xs[-2])
            if gap_here <= tol * scale and gap_prev <= tol * scale and cycle > sep * scale:
                a, b = x_new, xs[-2]  # parities n and n-1
                even_limit, odd_limit = (a, b) if n % 2 == 0 else (b, a)
                # each limit must be numerically fixed under the doubled map
                if (
                    _sup_gap(step(step(a)), a) <= 50 * tol * scale
                    and _sup_gap(step(step(b)), b) <= 50 * tol * scale
                ):
                    return UniquenessVerdict(
                        Uniqueness.MULTIPLE, n, even_limit=even_limit, odd_limit=odd_limit
                    )

        if len(xs) > 4:
            xs.pop(0)

    a, b = xs[-1], xs[-2]
    even_tail, odd_tail = (a, b) if max_iter % 2 == 0 else (b, a)
    return UniquenessVerdict(
        Uniqueness.INCONCLUSIVE, max_iter, even_limit=even_tail, odd_limit=odd_tail
    )


def pair_interaction(p: ModelParams, i: int, j: int) -> float:
    """Symmetric interaction weight between adjacent node occupancies i and j.

    Zero when i + j exceeds the budget; otherwise the geometric-mean node
    activity (nu_i nu_j)**(1/(q+1)) times the partial sum of edge weights
    that still fit over the shared edge.
    """
    for name, v in (("i", i), ("j", j)):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= p.cv:
            raise ValueError(f"{name} must be an int in [0, cv={p.cv}], got {v!r}")
    if i + j > p.cap:
        return 0.0
    room = float(p.edge_weights.partial_sum(min(p.ce, p.cap - i - j)))
    prod = float(p.node_weights.entries[i]) * float(p.node_weights.entries[j])
    return power(prod, 1.0 / (p.q + 1)) * room


def _check_interaction_vector(p: ModelParams, psi) -> tuple:
    vec = tuple(float(x) for x in psi)
    if len(vec) != p.cv + 1:
        raise ValueError(f"interaction vector needs length cv+1={p.cv + 1}, got {len(vec)}")
    if vec[0] != 1.0:
        raise ValueError(f"interaction vector must have first entry 1, got {vec[0]!r}")
    for x in vec:
        if not (x >= 0.0 and math.isfinite(x)):
            raise ValueError(f"interaction entries must be finite and >= 0: {vec!r}")
    return vec


def interaction_map(p: ModelParams, psi) -> tuple:
    """Normalized interaction form of the recursion, acting on psi with psi_0 = 1.

    Component i is (sum_j phi(i,j) psi_j / sum_j phi(0,j) psi_j)**q, the sums
    running over j = 0..min(cap-i, cv). Component 0 is identically 1.
    """
    vec = _check_interaction_vector(p, psi)
    den = sum(pair_interaction(p, 0, j) * vec[j] for j in range(min(p.cap, p.cv) + 1))
    out = [1.0]
    for i in range(1, p.cv + 1):
        n = sum(pair_interaction(p, i, j) * vec[j] for j in range(min(p.cap - i, p.cv) + 1))
        out.append(power(n / den, p.q) if n > 0.0 else 0.0)
    return tuple(out)


def conjugate_maps(p: ModelParams):
    """Coordinate changes linking the interaction form to the ratio form.

    Returns ``(to_ratio, from_ratio)``: ``to_ratio`` maps an interaction
    vector psi (length cv+1, psi_0 = 1) to a ratio vector xi (length cv) via
    xi_k = nu_k**(1/(q+1)) psi_k; ``from_ratio`` inverts it. Requires every
    node weight positive, else the inverse does not exist.
    """
    if any(float(v) == 0.0 for v in p.node_weights.entries):
        raise ValueError("conjugation needs strictly positive node weights")
    root = 1.0 / (p.q + 1)
    factors = tuple(power(float(v), root) for v in p.node_weights.entries)

    def to_ratio(psi) -> tuple:
        vec = _check_interaction_vector(p, psi)
        return tuple(factors[k] * vec[k] for k in range(1, p.cv + 1))

    def from_ratio(xi) -> tuple:
        vec = _check_ratio_vector(p, xi)
        return (1.0,) + tuple(vec[k - 1] / factors[k] for k in range(1, p.cv + 1))

    return to_ratio, from_ratio
