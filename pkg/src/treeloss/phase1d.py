"""Closed-form phase analysis for unit node cap and full edge cap.

With ``cv = 1`` and ``ce = cap`` the ratio recursion collapses to a scalar map

    m(x) = nu * ((S_{cap-1} + x S_{cap-2}) / (S_cap + x S_{cap-1}))**q

in the cached partial sums S of the edge weights. Under strict log-concavity
of the partial sums at cap-1 the map is decreasing with a unique fixed point,
and everything reduces to two ingredients:

* ``nu_of_fixed_point``, the increasing bijection sending a prescribed fixed
  point x to the nu that realizes it, and
* ``stability_quadratic``, a quadratic in x whose sign at the fixed point
  decides whether the fixed point attracts (nonnegative) or repels.

When the window inequality ``(q-1)^2 S_{cap-1}^2 > (q+1)^2 S_cap S_{cap-2}``
holds (``condition_a``), the quadratic has two positive roots and mapping them
through ``nu_of_fixed_point`` yields the open interval of nu with multiple
limiting laws. Sign decisions run in exact rational arithmetic so that points
on the boundary are detected exactly rather than by float luck.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._num import power
from .rfmap import Uniqueness
from .weights import WeightVector, log_concavity_margin, poisson_weights

__all__ = [
    "AssumptionViolation",
    "BracketError",
    "PhaseParams",
    "PhaseWindow",
    "ClosedFormVerdict",
    "ratio_map",
    "ratio_map_derivative",
    "ratio_map_second_derivative",
    "ratio_map_third_derivative",
    "schwarzian",
    "fixed_point",
    "nu_of_fixed_point",
    "stability_quadratic",
    "condition_a_margin",
    "condition_a",
    "phase_window",
    "classify_closed_form",
    "poisson_window_statistic",
]


class AssumptionViolation(ValueError):
    """Edge weights whose partial sums are not strictly log-concave at cap."""


class BracketError(RuntimeError):
    """Fixed-point bracket [0, nu] fails its sign conditions; reported, never widened."""


def _validate_qcw(q: int, cap: int, w: WeightVector, min_q: int = 1) -> None:
    if not isinstance(q, int) or isinstance(q, bool) or q < min_q:
        raise ValueError(f"q must be an int >= {min_q}, got {q!r}")
    if not isinstance(cap, int) or isinstance(cap, bool) or cap < 2:
        raise ValueError(f"cap must be an int >= 2, got {cap!r}")
    if len(w) != cap + 1:
        raise ValueError(f"edge weights need length cap+1={cap + 1}, got {len(w)}")


def _require_assumption(q: int, cap: int, w: WeightVector, min_q: int = 1) -> None:
    _validate_qcw(q, cap, w, min_q)
    if not log_concavity_margin(w, cap) > 0:
        raise AssumptionViolation(
            f"partial sums not strictly log-concave at cap={cap}; phase analysis undefined"
        )


@dataclass(frozen=True)
class PhaseParams:
    """Scalar-map parameters: branching q >= 2, joint cap >= 2, edge weights, nu > 0.

    Construction enforces strict log-concavity of the edge partial sums at
    ``cap``; vectors failing it raise AssumptionViolation.
    """

    q: int
    cap: int
    edge_weights: WeightVector
    nu: float

    def __post_init__(self):
        _require_assumption(self.q, self.cap, self.edge_weights, min_q=2)
        nu = float(self.nu)
        if not (nu > 0.0 and math.isfinite(nu)):
            raise ValueError(f"nu must be positive and finite, got {self.nu!r}")
        object.__setattr__(self, "nu", nu)


def _lams(cap: int, w: WeightVector) -> tuple[float, float, float]:
    """(S_{cap-2}, S_{cap-1}, S_cap) as floats."""
    s = w.partial_sum
    return float(s(cap - 2)), float(s(cap - 1)), float(s(cap))


def _check_point(x) -> float:
    x = float(x)
    if not (x >= 0.0 and math.isfinite(x)):
        raise ValueError(f"evaluation point must be finite and >= 0, got {x!r}")
    return x


def ratio_map(p: PhaseParams, x) -> float:
    """The scalar occupancy-ratio map at x >= 0."""
    x = _check_point(x)
    sm2, sm1, sc = _lams(p.cap, p.edge_weights)
    return p.nu * power((sm1 + x * sm2) / (sc + x * sm1), p.q)


def ratio_map_derivative(p: PhaseParams, x) -> float:
    """First derivative; strictly negative under the log-concavity assumption."""
    x = _check_point(x)
    sm2, sm1, sc = _lams(p.cap, p.edge_weights)
    d = sm1 + x * sm2
    e = sc + x * sm1
    return ratio_map(p, x) * p.q * (sc * sm2 - sm1 * sm1) / (d * e)


def _curvature_factor(p: PhaseParams, x: float) -> tuple[float, float, float]:
    """(M, D*E, B) with m''= m' M/(DE) and m''' = m' (M B - 2 S_{c-1} S_{c-2} DE)/(DE)^2."""
    sm2, sm1, sc = _lams(p.cap, p.edge_weights)
    d = sm1 + x * sm2
    e = sc + x * sm1
    m = (p.q - 1) * sc * sm2 - (p.q + 1) * sm1 * sm1 - 2 * x * sm1 * sm2
    b = (p.q - 2) * sc * sm2 - (p.q + 2) * sm1 * sm1 - 4 * x * sm1 * sm2
    return m, d * e, b


def ratio_map_second_derivative(p: PhaseParams, x) -> float:
    x = _check_point(x)
    m, de, _ = _curvature_factor(p, x)
    return ratio_map_derivative(p, x) * m / de


def ratio_map_third_derivative(p: PhaseParams, x) -> float:
    x = _check_point(x)
    sm2, sm1, _ = _lams(p.cap, p.edge_weights)
    m, de, b = _curvature_factor(p, x)
    g = m * b - 2 * sm1 * sm2 * de
    return ratio_map_derivative(p, x) * g / (de * de)


def schwarzian(p: PhaseParams, x) -> float:
    """Schwarzian derivative m'''/m' - (3/2)(m''/m')^2; negative under the assumption."""
    x = _check_point(x)
    sm2, sm1, _ = _lams(p.cap, p.edge_weights)
    m, de, b = _curvature_factor(p, x)
    second_ratio = m / de  # m''/m'
    third_ratio = (m * b - 2 * sm1 * sm2 * de) / (de * de)  # m'''/m'
    return third_ratio - 1.5 * second_ratio * second_ratio


def fixed_point(p: PhaseParams, tol: float = 1e-13) -> float:
    """Locate the unique fixed point in [0, nu] by bisection.

    The bracket must satisfy m(0) > 0 and m(nu) <= nu; anything else is a
    violated precondition and raises BracketError rather than widening the
    bracket silently.
    """
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError(f"tol must be positive and finite, got {tol!r}")
    lo, hi = 0.0, p.nu
    if not ratio_map(p, lo) > lo:
        raise BracketError("map value at 0 is not positive; bracket [0, nu] invalid")
    if ratio_map(p, hi) - hi > 0.0:
        raise BracketError("map value at nu exceeds nu; bracket [0, nu] invalid")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * (1.0 + mid):
            break
        if ratio_map(p, mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nu_of_fixed_point(q: int, cap: int, w: WeightVector, x) -> float:
    """The nu for which x is the fixed point of the scalar map (increasing in x)."""
    _require_assumption(q, cap, w)
    x = _check_point(x)
    sm2, sm1, sc = _lams(cap, w)
    return x * power((sc + x * sm1) / (sm1 + x * sm2), q)


def stability_quadratic(q: int, cap: int, w: WeightVector, alpha) -> float:
    """Quadratic whose sign at the fixed point decides its stability.

    Value S_{cap-1} S_{cap-2} a^2 + ((1-q) S_{cap-1}^2 + (1+q) S_cap S_{cap-2}) a
    + S_cap S_{cap-1}; nonnegative at the fixed point means |slope| <= 1 there.
    """
    _validate_qcw(q, cap, w)
    a = _check_point(alpha)
    sm2, sm1, sc = _lams(cap, w)
    return sm1 * sm2 * a * a + ((1 - q) * sm1 * sm1 + (1 + q) * sc * sm2) * a + sc * sm1


def condition_a_margin(q: int, cap: int, w: WeightVector):
    """(q-1)^2 S_{cap-1}^2 - (q+1)^2 S_cap S_{cap-2} as an exact rational."""
    _validate_qcw(q, cap, w)
    s = w.exact_partial_sum
    return (q - 1) ** 2 * s(cap - 1) ** 2 - (q + 1) ** 2 * s(cap) * s(cap - 2)


def condition_a(q: int, cap: int, w: WeightVector) -> bool:
    """True iff the window-existence inequality holds strictly (exact arithmetic)."""
    _require_assumption(q, cap, w)
    return condition_a_margin(q, cap, w) > 0


@dataclass(frozen=True)
class PhaseWindow:
    """Multiplicity window in nu; absent when ``present`` is False.

    ``boundary`` marks exact equality in the window inequality (a degenerate,
    measure-zero situation the float path would otherwise misreport).
    """

    present: bool
    boundary: bool = False
    alpha_minus: float | None = None
    alpha_plus: float | None = None
    nu_minus: float | None = None
    nu_plus: float | None = None


def phase_window(q: int, cap: int, w: WeightVector) -> PhaseWindow:
    """Compute the open interval of nu with multiple limiting laws, if any.

    Roots of the stability quadratic are taken sign-aware: the larger root
    from the quadratic formula's additive branch (the linear coefficient is
    negative whenever the window exists), the smaller from the root product
    S_cap / S_{cap-2}. Coefficients and discriminant are formed exactly first.
    """
    _require_assumption(q, cap, w)
    margin = condition_a_margin(q, cap, w)
    if margin < 0:
        return PhaseWindow(present=False)
    if margin == 0:
        return PhaseWindow(present=False, boundary=True)

    s = w.exact_partial_sum
    a2 = s(cap - 1) * s(cap - 2)
    a1 = (1 - q) * s(cap - 1) ** 2 + (1 + q) * s(cap) * s(cap - 2)
    a0 = s(cap) * s(cap - 1)
    disc = a1 * a1 - 4 * a2 * a0
    if disc <= 0 or a1 >= 0:
        raise RuntimeError(
            "internal consistency: window inequality holds but the quadratic "
            f"does not have two positive roots (disc={float(disc)}, a1={float(a1)})"
        )
    alpha_plus = (float(-a1) + math.sqrt(float(disc))) / (2.0 * float(a2))
    alpha_minus = float(a0 / a2) / alpha_plus
    nu_minus = nu_of_fixed_point(q, cap, w, alpha_minus)
    nu_plus = nu_of_fixed_point(q, cap, w, alpha_plus)
    if not (alpha_minus <= alpha_plus and nu_minus <= nu_plus):
        raise RuntimeError("internal consistency: window endpoints out of order")
    return PhaseWindow(
        present=True,
        alpha_minus=alpha_minus,
        alpha_plus=alpha_plus,
        nu_minus=nu_minus,
        nu_plus=nu_plus,
    )


@dataclass(frozen=True)
class ClosedFormVerdict:
    kind: Uniqueness
    near_boundary: bool
    window: PhaseWindow


def classify_closed_form(p: PhaseParams, boundary_rtol: float = 1e-9) -> ClosedFormVerdict:
    """Unique/Multiple by the window: Multiple iff nu lies strictly inside.

    Window endpoints themselves classify Unique. A nu within ``boundary_rtol``
    (relative) of either endpoint keeps its verdict but is flagged
    ``near_boundary`` - numerics this close to the edge deserve distrust.
    """
    win = phase_window(p.q, p.cap, p.edge_weights)
    if not win.present:
        return ClosedFormVerdict(Uniqueness.UNIQUE, False, win)
    inside = win.nu_minus < p.nu < win.nu_plus
    near = any(
        abs(p.nu - endpoint) <= boundary_rtol * max(1.0, endpoint)
        for endpoint in (win.nu_minus, win.nu_plus)
    )
    kind = Uniqueness.MULTIPLE if inside else Uniqueness.UNIQUE
    return ClosedFormVerdict(kind, near, win)


def poisson_window_statistic(q: int, cap: int, rate):
    """Sign-equivalent window statistic for the Poisson weight family.

    (1+q)^2 (w_{cap-1} S_{cap-1} - w_cap S_{cap-2}) - 4 q S_{cap-1}^2 for the
    Poisson entries at ``rate``; positive exactly when the window exists. Once
    positive it stays positive as the rate grows, so threshold hunting in the
    rate is a single bracket search. Exact when ``rate`` is a Fraction.
    """
    if not isinstance(q, int) or isinstance(q, bool) or q < 1:
        raise ValueError(f"q must be an int >= 1, got {q!r}")
    if not isinstance(cap, int) or isinstance(cap, bool) or cap < 2:
        raise ValueError(f"cap must be an int >= 2, got {cap!r}")
    w = poisson_weights(rate, cap)
    e = w.entries
    s = w.partial_sums
    return (1 + q) ** 2 * (e[cap - 1] * s[cap - 1] - e[cap] * s[cap - 2]) - 4 * q * s[cap - 1] ** 2
