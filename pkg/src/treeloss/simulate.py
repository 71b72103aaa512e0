"""Event-driven continuous-time simulation of the loss process on a finite tree.

Calls arrive in independent Poisson streams: one per node (rate = second node
weight entry) and one per edge (rate = second edge weight entry; absent when
the per-edge call cap is zero). An arrival is admitted iff the element's own
cap and every touched budget constraint still hold with one more call.

Two service disciplines:

* ``per_call`` — every admitted call holds its slot for an independent
  unit-mean duration (sampled exponential, or exactly 1 in deterministic
  mode), so an element with occupancy n drains at rate n.
* ``shared_server`` — each busy element completes one call per unit-mean
  service period, regardless of how many are queued on it.

Estimates use arrival counting (admitted/offered) after a warmup interval,
plus the time-averaged occupancy of a designated center node. Replications
run on independent counter-based RNG streams spawned from one seed, so
results are reproducible bit-for-bit and replications could be farmed out
in parallel without changing the answer; aggregation is in replication
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Optional

import numpy as np

from .oracle import Configuration, build_tree, is_feasible
from .rfmap import ModelParams
from .treecalc import TreeSpec

__all__ = [
    "SimConfig",
    "SimStats",
    "CompareEntry",
    "CompareReport",
    "run",
    "compare",
    "compare_runs",
]

_SERVICE_MODES = ("per_call", "shared_server")
_DURATION_MODES = ("exponential", "deterministic")


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    tree: TreeSpec
    service_mode: str = "per_call"
    duration_mode: str = "exponential"
    warmup_time: Optional[float] = None  # None: 10 * (1 + node rate + edge rate)
    horizon_time: float = 1000.0
    replications: int = 8
    seed: int = 0
    node_target: int = 0
    edge_target: Optional[tuple] = None  # None: first tree edge
    check_feasibility: bool = False

    def __post_init__(self):
        if self.service_mode not in _SERVICE_MODES:
            raise ValueError(f"service_mode must be one of {_SERVICE_MODES}")
        if self.duration_mode not in _DURATION_MODES:
            raise ValueError(f"duration_mode must be one of {_DURATION_MODES}")
        if not isinstance(self.replications, int) or isinstance(self.replications, bool) or self.replications < 1:
            raise ValueError(f"replications must be an int >= 1, got {self.replications!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative int, got {self.seed!r}")
        warmup = self.warmup_time
        if warmup is None:
            warmup = 10.0 * (1.0 + _node_rate(self.params) + _edge_rate(self.params))
        warmup = float(warmup)
        if not math.isfinite(warmup) or warmup < 0:
            raise ValueError(f"warmup_time must be finite and >= 0, got {warmup!r}")
        object.__setattr__(self, "warmup_time", warmup)
        horizon = float(self.horizon_time)
        if not math.isfinite(horizon) or horizon <= warmup:
            raise ValueError("horizon_time must be finite and exceed the warmup")
        object.__setattr__(self, "horizon_time", horizon)


@dataclass(frozen=True)
class SimStats:
    """Aggregated estimates; per-replication values kept for reproducibility checks."""

    replications: int
    post_warmup_events: int
    node_offered: int
    node_blocked: int
    edge_offered: int
    edge_blocked: int
    node_beta: float
    node_beta_se: float
    edge_beta: float
    edge_beta_se: float
    occupancy: tuple
    occupancy_se: tuple
    rep_node_beta: tuple
    rep_edge_beta: tuple
    rep_occupancy: tuple


def _node_rate(p: ModelParams) -> float:
    return float(p.node_weights.entries[1])


def _edge_rate(p: ModelParams) -> float:
    return float(p.edge_weights.entries[1]) if p.ce >= 1 else 0.0


def _simulate_once(cfg: SimConfig, tree, rng) -> tuple:
    p = cfg.params
    node_rate = _node_rate(p)
    edge_rate = _edge_rate(p)
    n, e = len(tree.nodes), len(tree.edges)
    occ_n = [0] * n
    occ_e = [0] * e
    center = tree.node_index(cfg.node_target)
    if cfg.edge_target is not None:
        target_edge = tree.edge_index(cfg.edge_target)
    else:
        target_edge = 0 if tree.edges else -1  # -1: no edges, nothing to count
    warmup, horizon = cfg.warmup_time, cfg.horizon_time
    shared = cfg.service_mode == "shared_server"
    deterministic = cfg.duration_mode == "deterministic"

    def duration() -> float:
        return 1.0 if deterministic else float(rng.exponential(1.0))

    heap: list = []
    seq = 0

    def push(t: float, kind: str, idx: int):
        nonlocal seq
        heappush(heap, (t, seq, kind, idx))
        seq += 1

    if node_rate > 0:
        for i in range(n):
            push(float(rng.exponential(1.0 / node_rate)), "an", i)
    if edge_rate > 0:
        for k in range(e):
            push(float(rng.exponential(1.0 / edge_rate)), "ae", k)

    occ_time = [0.0] * (p.cv + 1)
    offered_n = blocked_n = offered_e = blocked_e = events = 0
    last = 0.0

    def admit_node(i: int) -> bool:
        if occ_n[i] + 1 > p.cv:
            return False
        for wp, ei in tree.adjacency[i]:
            if occ_n[i] + 1 + occ_e[ei] + occ_n[wp] > p.cap:
                return False
        return True

    def admit_edge(k: int) -> bool:
        if occ_e[k] + 1 > p.ce:
            return False
        up, vp = tree.edge_ends[k]
        return occ_n[up] + occ_e[k] + 1 + occ_n[vp] <= p.cap

    def assert_legal():
        cfg_now = Configuration(
            node_occ={v: occ_n[i] for i, v in enumerate(tree.nodes)},
            edge_occ={ed: occ_e[k] for k, ed in enumerate(tree.edges)},
        )
        if not is_feasible(p, tree, cfg_now):
            raise RuntimeError("internal consistency: simulated state left the feasible set")

    while heap:
        t, _, kind, idx = heappop(heap)
        if t > horizon:
            break
        lo, hi = max(last, warmup), t
        if hi > lo:
            occ_time[occ_n[center]] += hi - lo
        last = t

        if kind == "an":
            counted = t >= warmup
            if counted:
                events += 1
                if idx == center:
                    offered_n += 1
            if admit_node(idx):
                if shared:
                    if occ_n[idx] == 0:
                        push(t + duration(), "cn", idx)
                    occ_n[idx] += 1
                else:
                    occ_n[idx] += 1
                    push(t + duration(), "dn", idx)
            elif counted and idx == center:
                blocked_n += 1
            push(t + float(rng.exponential(1.0 / node_rate)), "an", idx)
        elif kind == "ae":
            counted = t >= warmup
            if counted:
                events += 1
                if idx == target_edge:
                    offered_e += 1
            if admit_edge(idx):
                if shared:
                    if occ_e[idx] == 0:
                        push(t + duration(), "ce", idx)
                    occ_e[idx] += 1
                else:
                    occ_e[idx] += 1
                    push(t + duration(), "de", idx)
            elif counted and idx == target_edge:
                blocked_e += 1
            push(t + float(rng.exponential(1.0 / edge_rate)), "ae", idx)
        elif kind == "dn":
            occ_n[idx] -= 1
        elif kind == "de":
            occ_e[idx] -= 1
        elif kind == "cn":
            occ_n[idx] -= 1
            if occ_n[idx] >= 1:
                push(t + duration(), "cn", idx)
        else:  # "ce"
            occ_e[idx] -= 1
            if occ_e[idx] >= 1:
                push(t + duration(), "ce", idx)

        if cfg.check_feasibility:
            assert_legal()

    lo = max(last, warmup)
    if horizon > lo:
        occ_time[occ_n[center]] += horizon - lo
    span = horizon - warmup
    occupancy = tuple(x / span for x in occ_time)
    return offered_n, blocked_n, offered_e, blocked_e, occupancy, events


def _mean_se(values: list) -> tuple:
    r = len(values)
    mean = math.fsum(values) / r
    if r < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in values) / (r - 1)
    return mean, math.sqrt(var / r)


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else math.nan


def run(cfg: SimConfig) -> SimStats:
    tree, _ = build_tree(cfg.tree, cfg.params.q)
    if cfg.node_target not in tree.nodes:
        raise ValueError(f"node target {cfg.node_target!r} not in tree")
    if cfg.edge_target is not None and tuple(sorted(cfg.edge_target)) not in tree.edges:
        raise ValueError(f"edge target {cfg.edge_target!r} not in tree")
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    reps = [
        _simulate_once(cfg, tree, np.random.Generator(np.random.Philox(s)))
        for s in streams
    ]
    rep_node_beta = tuple(_ratio(b, o) for o, b, _, _, _, _ in reps)
    rep_edge_beta = tuple(_ratio(b, o) for _, _, o, b, _, _ in reps)
    rep_occupancy = tuple(occ for _, _, _, _, occ, _ in reps)
    node_beta, node_se = _mean_se(list(rep_node_beta))
    edge_vals = [v for v in rep_edge_beta if not math.isnan(v)]
    if edge_vals and len(edge_vals) == len(reps):
        edge_beta, edge_se = _mean_se(edge_vals)
    else:
        edge_beta, edge_se = math.nan, math.nan
    occ_stats = [
        _mean_se([occ[i] for occ in rep_occupancy]) for i in range(cfg.params.cv + 1)
    ]
    return SimStats(
        replications=cfg.replications,
        post_warmup_events=sum(ev for *_, ev in reps),
        node_offered=sum(o for o, _, _, _, _, _ in reps),
        node_blocked=sum(b for _, b, _, _, _, _ in reps),
        edge_offered=sum(o for _, _, o, _, _, _ in reps),
        edge_blocked=sum(b for _, _, _, b, _, _ in reps),
        node_beta=node_beta,
        node_beta_se=node_se,
        edge_beta=edge_beta,
        edge_beta_se=edge_se,
        occupancy=tuple(m for m, _ in occ_stats),
        occupancy_se=tuple(s for _, s in occ_stats),
        rep_node_beta=rep_node_beta,
        rep_edge_beta=rep_edge_beta,
        rep_occupancy=rep_occupancy,
    )


@dataclass(frozen=True)
class CompareEntry:
    name: str
    estimate: float
    reference: float
    stderr: float
    z: float

    @property
    def ok(self) -> bool:
        return abs(self.z) <= 3.0


@dataclass(frozen=True)
class CompareReport:
    entries: tuple
    fraction_within: float
    passed: bool


def _zscore(estimate: float, reference: float, stderr: float) -> float:
    if math.isnan(estimate) or math.isnan(stderr):
        raise ValueError("estimate has no observations; target mismatch")
    if estimate == reference:
        return 0.0
    if stderr == 0.0:
        return math.inf
    return (estimate - reference) / stderr


def _build_report(entries: list) -> CompareReport:
    frac = sum(e.ok for e in entries) / len(entries)
    return CompareReport(tuple(entries), frac, frac >= 0.95)


def compare(stats: SimStats, exact: dict) -> CompareReport:
    """Z-score each estimate against exact reference values.

    ``exact`` maps any of ``node_beta``, ``edge_beta`` (floats) and
    ``occupancy`` (vector) to reference values; unknown keys or shape
    mismatches are rejected. Passes when at least 95% of quantities land
    within 3 standard errors.
    """
    allowed = {"node_beta", "edge_beta", "occupancy"}
    unknown = set(exact) - allowed
    if unknown:
        raise ValueError(f"unknown comparison targets: {sorted(unknown)}")
    if not exact:
        raise ValueError("no comparison targets given")
    entries = []
    if "node_beta" in exact:
        ref = float(exact["node_beta"])
        entries.append(
            CompareEntry("node_beta", stats.node_beta, ref, stats.node_beta_se,
                         _zscore(stats.node_beta, ref, stats.node_beta_se))
        )
    if "edge_beta" in exact:
        ref = float(exact["edge_beta"])
        entries.append(
            CompareEntry("edge_beta", stats.edge_beta, ref, stats.edge_beta_se,
                         _zscore(stats.edge_beta, ref, stats.edge_beta_se))
        )
    if "occupancy" in exact:
        ref = tuple(float(x) for x in exact["occupancy"])
        if len(ref) != len(stats.occupancy):
            raise ValueError("occupancy reference has the wrong length")
        for i, (est, rx, se) in enumerate(zip(stats.occupancy, ref, stats.occupancy_se)):
            entries.append(
                CompareEntry(f"occupancy[{i}]", est, rx, se, _zscore(est, rx, se))
            )
    return _build_report(entries)


def compare_runs(a: SimStats, b: SimStats) -> CompareReport:
    """Z-score two runs against each other with pooled standard errors."""
    if len(a.occupancy) != len(b.occupancy):
        raise ValueError("runs have different occupancy supports")
    entries = []
    for name in ("node_beta", "edge_beta"):
        x, sx = getattr(a, name), getattr(a, f"{name}_se")
        y, sy = getattr(b, name), getattr(b, f"{name}_se")
        if math.isnan(x) and math.isnan(y):
            continue
        se = math.sqrt(sx**2 + sy**2)
        entries.append(CompareEntry(name, x, y, se, _zscore(x, y, se)))
    for i, (x, y, sx, sy) in enumerate(
        zip(a.occupancy, b.occupancy, a.occupancy_se, b.occupancy_se)
    ):
        se = math.sqrt(sx**2 + sy**2)
        entries.append(CompareEntry(f"occupancy[{i}]", x, y, se, _zscore(x, y, se)))
    if not entries:
        raise ValueError("nothing to compare")
    return _build_report(entries)
