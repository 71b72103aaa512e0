"""Exhaustive ground truth on small finite trees.

Everything here is deliberately dumb: enumerate every occupancy assignment,
keep the feasible ones (per-element caps plus the per-edge budget), and add
up raw products of weights. No recursions, no partial-sum shortcuts — this
module is what the fast code is checked against.

Enumeration is bucketed by (lead value, node-occupancy histogram,
edge-occupancy histogram). Weights enter only when a bucket tally is folded
into a number, in sorted bucket order with fsum — so two traversal orders,
or the two engines (pure-Python depth-first search with pruning, and a
chunked vectorized full-grid scan), produce bit-identical floats. With
exact (rational) weight entries the fold stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .rfmap import ModelParams
from .treecalc import TreeSpec

__all__ = [
    "GUARD_LIMIT",
    "TreeTooLargeError",
    "FiniteTree",
    "Configuration",
    "path_tree",
    "rooted_tree",
    "spherical_tree",
    "edge_centered_tree",
    "build_tree",
    "is_feasible",
    "exact_partition",
    "occupancy_distribution",
    "exact_blocking",
]

GUARD_LIMIT = 10**8

# Raw spaces at most this large go to the pruned depth-first engine; larger
# ones go to the vectorized scan.
_DFS_LIMIT = 100_000

_CHUNK = 1 << 20


class TreeTooLargeError(ValueError):
    """Enumeration refused: the assignment space exceeds the size guard."""


@dataclass(frozen=True)
class FiniteTree:
    """Connected loopless graph with |E| = |V| - 1; edges stored as sorted pairs.

    ``adjacency`` and ``edge_ends`` are positional (indices into ``nodes``),
    derived at construction: adjacency[i] lists (neighbor position, edge
    index) pairs, edge_ends[k] the endpoint positions of edge k.
    """

    nodes: tuple
    edges: tuple
    adjacency: tuple = field(init=False, compare=False)
    edge_ends: tuple = field(init=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple(tuple(sorted(e)) for e in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        if len(set(nodes)) != len(nodes) or not nodes:
            raise ValueError("nodes must be a nonempty sequence of distinct labels")
        if any(not isinstance(v, int) or isinstance(v, bool) for v in nodes):
            raise ValueError("node labels must be ints")
        pos = {v: i for i, v in enumerate(nodes)}
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        adj: list = [[] for _ in nodes]
        ends = []
        for idx, (u, v) in enumerate(edges):
            if u == v or u not in pos or v not in pos:
                raise ValueError(f"bad edge ({u}, {v})")
            adj[pos[u]].append((pos[v], idx))
            adj[pos[v]].append((pos[u], idx))
            ends.append((pos[u], pos[v]))
        if len(edges) != len(nodes) - 1:
            raise ValueError("not a tree: |E| != |V| - 1")
        seen = {0}
        stack = [0]
        while stack:
            for w, _ in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(nodes):
            raise ValueError("not a tree: graph is disconnected")
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))
        object.__setattr__(self, "edge_ends", tuple(ends))

    def node_index(self, v) -> int:
        return self.nodes.index(v)

    def edge_index(self, e) -> int:
        return self.edges.index(tuple(sorted(e)))


@dataclass(frozen=True)
class Configuration:
    """Full occupancy assignment: node -> count, sorted edge pair -> count."""

    node_occ: dict
    edge_occ: dict


def path_tree(n: int) -> FiniteTree:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"need n >= 1 nodes, got {n!r}")
    return FiniteTree(tuple(range(n)), tuple((i, i + 1) for i in range(n - 1)))


def _grow(edges: list, root: int, q: int, height: int, nxt: int) -> int:
    # q children under root, each the root of a height-(height-1) subtree
    if height <= 0:
        return nxt
    for _ in range(q):
        child = nxt
        nxt += 1
        edges.append((root, child))
        nxt = _grow(edges, child, q, height - 1, nxt)
    return nxt


def _check_qh(q: int, size: int, least: int, what: str):
    if not isinstance(q, int) or isinstance(q, bool) or q < 1:
        raise ValueError(f"branching q must be an int >= 1, got {q!r}")
    if not isinstance(size, int) or isinstance(size, bool) or size < least:
        raise ValueError(f"{what} must be an int >= {least}, got {size!r}")


def rooted_tree(q: int, height: int) -> FiniteTree:
    """Root 0 with q child subtrees; every internal node has q children."""
    _check_qh(q, height, 0, "height")
    edges: list = []
    n = _grow(edges, 0, q, height, 1)
    return FiniteTree(tuple(range(n)), tuple(edges))


def spherical_tree(q: int, radius: int) -> FiniteTree:
    """Center 0 joined to q+1 rooted subtrees of height radius-1."""
    _check_qh(q, radius, 1, "radius")
    edges: list = []
    nxt = 1
    for _ in range(q + 1):
        child = nxt
        nxt += 1
        edges.append((0, child))
        nxt = _grow(edges, child, q, radius - 1, nxt)
    return FiniteTree(tuple(range(nxt)), tuple(edges))


def edge_centered_tree(q: int, radius: int) -> FiniteTree:
    """Adjacent hubs 0-1, each joined to q rooted subtrees of height radius-1."""
    _check_qh(q, radius, 1, "radius")
    edges: list = [(0, 1)]
    nxt = 2
    for hub in (0, 1):
        for _ in range(q):
            child = nxt
            nxt += 1
            edges.append((hub, child))
            nxt = _grow(edges, child, q, radius - 1, nxt)
    return FiniteTree(tuple(range(nxt)), tuple(edges))


def build_tree(spec: TreeSpec, q: int):
    """Realize a TreeSpec; returns (tree, center node)."""
    if spec.kind == "rooted":
        return rooted_tree(q, spec.size), 0
    return spherical_tree(q, spec.size), 0


def is_feasible(p: ModelParams, t: FiniteTree, c: Configuration) -> bool:
    node_occ = dict(c.node_occ)
    edge_occ = {tuple(sorted(k)): v for k, v in c.edge_occ.items()}
    if set(node_occ) != set(t.nodes):
        raise ValueError("configuration must assign exactly the tree's nodes")
    if set(edge_occ) != set(t.edges):
        raise ValueError("configuration must assign exactly the tree's edges")
    for occ in node_occ.values():
        if not isinstance(occ, int) or isinstance(occ, bool):
            raise ValueError(f"occupancies must be ints, got {occ!r}")
        if occ < 0 or occ > p.cv:
            return False
    for occ in edge_occ.values():
        if not isinstance(occ, int) or isinstance(occ, bool):
            raise ValueError(f"occupancies must be ints, got {occ!r}")
        if occ < 0 or occ > p.ce:
            return False
    return all(
        node_occ[u] + edge_occ[(u, v)] + node_occ[v] <= p.cap for u, v in t.edges
    )


def _raw_size(p: ModelParams, t: FiniteTree) -> int:
    return (p.cv + 1) ** len(t.nodes) * (p.ce + 1) ** len(t.edges)


def _check_size(p: ModelParams, t: FiniteTree):
    raw = _raw_size(p, t)
    if raw > GUARD_LIMIT:
        raise TreeTooLargeError(
            f"{raw} assignments exceed the enumeration guard ({GUARD_LIMIT}); "
            "refusing to enumerate"
        )


def _traversal(t: FiniteTree):
    """(node position, parent position, parent edge index), parents first."""
    order = []
    seen = {0}
    stack = [(0, None, None)]
    while stack:
        pos, par, eidx = stack.pop()
        order.append((pos, par, eidx))
        for wp, ei in t.adjacency[pos]:
            if wp not in seen:
                seen.add(wp)
                stack.append((wp, pos, ei))
    return order


def _tally_dfs(t: FiniteTree, cap: int, cv: int, ce: int, lead) -> dict:
    n, e = len(t.nodes), len(t.edges)
    order = _traversal(t)
    occ = [0] * n
    eocc = [0] * e
    hv = [0] * (cv + 1)
    he = [0] * (ce + 1)
    hv[0] = n
    he[0] = e
    tally: dict = {}
    kind, arg = lead

    def lead_value() -> int:
        if kind == "root":
            return occ[arg]
        if kind == "node":
            if occ[arg] + 1 > cv:
                return 0
            for wp, ei in t.adjacency[arg]:
                if occ[arg] + 1 + eocc[ei] + occ[wp] > cap:
                    return 0
            return 1
        u, v, ei = arg
        return int(eocc[ei] + 1 <= ce and occ[u] + eocc[ei] + 1 + occ[v] <= cap)

    def descend(k: int):
        if k == len(order):
            key = (lead_value(), tuple(hv), tuple(he))
            tally[key] = tally.get(key, 0) + 1
            return
        pos, par, eidx = order[k]
        if par is None:
            for val in range(cv + 1):
                occ[pos] = val
                hv[0] -= 1
                hv[val] += 1
                descend(k + 1)
                hv[val] -= 1
                hv[0] += 1
            occ[pos] = 0
            return
        pocc = occ[par]
        for ev in range(ce + 1):
            room = cap - pocc - ev
            if room < 0:
                break
            eocc[eidx] = ev
            he[0] -= 1
            he[ev] += 1
            for val in range(min(cv, room) + 1):
                occ[pos] = val
                hv[0] -= 1
                hv[val] += 1
                descend(k + 1)
                hv[val] -= 1
                hv[0] += 1
            he[ev] -= 1
            he[0] += 1
        occ[pos] = 0
        eocc[eidx] = 0

    descend(0)
    return tally


def _decode(rem, radix: int, count: int):
    cols = []
    if radix & (radix - 1) == 0:
        shift = radix.bit_length() - 1
        mask = radix - 1
        for _ in range(count):
            cols.append((rem & mask).astype(np.int8))
            rem = rem >> shift
    else:
        for _ in range(count):
            rem, dig = np.divmod(rem, radix)
            cols.append(dig.astype(np.int8))
    return cols, rem


def _tally_grid(t: FiniteTree, cap: int, cv: int, ce: int, lead) -> dict:
    n, e = len(t.nodes), len(t.edges)
    raw = (cv + 1) ** n * (ce + 1) ** e
    kind, arg = lead
    idx_dtype = np.int32 if raw <= 2**31 - 1 else np.int64
    # histogram packing: sum of LUT[digit] over columns equals the base-(n+1)
    # (resp. base-(e+1)) little-endian packing of the occupancy histogram
    node_lut = np.array([(n + 1) ** v for v in range(cv + 1)], np.int64)
    edge_lut = np.array([(e + 1) ** v for v in range(ce + 1)], np.int64)
    node_span = int((n + 1) ** (cv + 1))
    edge_span = int((e + 1) ** (ce + 1))
    lead_span = cv + 1 if kind == "root" else 2
    span = lead_span * node_span * edge_span
    counts_acc = np.zeros(span, np.int64) if span <= 1 << 24 else None
    tally: dict = {}
    for lo in range(0, raw, _CHUNK):
        rem = np.arange(lo, min(lo + _CHUNK, raw), dtype=idx_dtype)
        ncols, rem = _decode(rem, cv + 1, n)
        ecols = _decode(rem, ce + 1, e)[0] if ce else None
        m = ncols[0].shape[0]

        def ecol(i: int):
            return ecols[i] if ecols is not None else np.zeros(m, np.int8)

        if 2 * cv + ce > cap:
            ok = np.ones(m, bool)
            if ecols is None:
                for up, vp in t.edge_ends:
                    ok &= (ncols[up] + ncols[vp]) <= cap
            else:
                for i, (up, vp) in enumerate(t.edge_ends):
                    ok &= (ncols[up] + ecols[i] + ncols[vp]) <= cap
            ncols = [c[ok] for c in ncols]
            if ecols is not None:
                ecols = [c[ok] for c in ecols]
            m = int(ok.sum())
            if m == 0:
                continue

        if kind == "root":
            lead_vals = ncols[arg].astype(np.int64)
        elif kind == "node":
            acc = ncols[arg] < cv
            for wp, ei in t.adjacency[arg]:
                acc &= (ncols[arg] + 1 + ecol(ei) + ncols[wp]) <= cap
            lead_vals = acc.astype(np.int64)
        elif ce == 0:
            lead_vals = np.zeros(m, np.int64)
        else:
            u, v, ei = arg
            acc = (ecols[ei] < ce) & ((ncols[u] + ecols[ei] + 1 + ncols[v]) <= cap)
            lead_vals = acc.astype(np.int64)

        hv_key = np.zeros(m, np.int64)
        for c in ncols:
            hv_key += node_lut[c]
        if ecols is None:
            he_key = e  # every edge idle: histogram is (e, 0, ..., 0)
        else:
            he_key = np.zeros(m, np.int64)
            for c in ecols:
                he_key += edge_lut[c]
        key = (lead_vals * node_span + hv_key) * edge_span + he_key
        if counts_acc is not None:
            counts_acc += np.bincount(key, minlength=span)
        else:
            uniq, cnt = np.unique(key, return_counts=True)
            for k, c in zip(uniq.tolist(), cnt.tolist()):
                tally[k] = tally.get(k, 0) + c
    if counts_acc is not None:
        nz = np.nonzero(counts_acc)[0]
        tally = dict(zip(nz.tolist(), counts_acc[nz].tolist()))
    out: dict = {}
    for k, c in tally.items():
        k, he_packed = divmod(k, edge_span)
        lead_val, hv_packed = divmod(k, node_span)
        hv = []
        for _ in range(cv + 1):
            hv_packed, d = divmod(hv_packed, n + 1)
            hv.append(d)
        he = []
        for _ in range(ce + 1):
            he_packed, d = divmod(he_packed, e + 1)
            he.append(d)
        out[(lead_val, tuple(hv), tuple(he))] = c
    return out


@lru_cache(maxsize=64)
def _tally(t: FiniteTree, cap: int, cv: int, ce: int, lead, engine: str) -> dict:
    if engine == "auto":
        engine = "dfs" if (cv + 1) ** len(t.nodes) * (ce + 1) ** len(t.edges) <= _DFS_LIMIT else "grid"
    if engine == "dfs":
        return _tally_dfs(t, cap, cv, ce, lead)
    if engine == "grid":
        return _tally_grid(t, cap, cv, ce, lead)
    raise ValueError(f"unknown engine {engine!r}")


def _fold(tally: dict, node_entries, edge_entries, leads: int) -> list:
    """Collapse a bucket tally into one weighted total per lead value.

    Buckets are visited in sorted key order and float totals use fsum, so the
    result is independent of enumeration order down to the last bit. Exact
    (int/Fraction) entries stay exact.
    """
    exact = not any(isinstance(x, float) for x in node_entries) and not any(
        isinstance(x, float) for x in edge_entries
    )
    terms: list = [[] for _ in range(leads)]
    for (lead, hv, he) in sorted(tally):
        count = tally[(lead, hv, he)]
        w = Fraction(count) if exact else float(count)
        for x, h in zip(node_entries, hv):
            if h:
                w *= x**h
        for x, h in zip(edge_entries, he):
            if h:
                w *= x**h
        terms[lead].append(w)
    if exact:
        return [sum(ts, Fraction(0)) for ts in terms]
    return [math.fsum(ts) for ts in terms]


def _lead_for_target(t: FiniteTree, target):
    if isinstance(target, tuple):
        u, v = sorted(target)
        return ("edge", (t.node_index(u), t.node_index(v), t.edge_index((u, v))))
    return ("node", t.node_index(target))


def exact_partition(p: ModelParams, t: FiniteTree, root, engine: str = "auto") -> tuple:
    """Z(i), i = 0..cv: total weight of feasible assignments with root occupancy i."""
    _check_size(p, t)
    tally = _tally(t, p.cap, p.cv, p.ce, ("root", t.node_index(root)), engine)
    return tuple(
        _fold(tally, p.node_weights.entries, p.edge_weights.entries, p.cv + 1)
    )


def occupancy_distribution(p: ModelParams, t: FiniteTree, node, engine: str = "auto") -> tuple:
    z = exact_partition(p, t, node, engine)
    total = sum(z)
    if total <= 0:
        raise ValueError("degenerate weights: total measure is zero")
    return tuple(zi / total for zi in z)


def exact_blocking(p: ModelParams, t: FiniteTree, target, engine: str = "auto"):
    """Stationary probability that one more call at the target is refused.

    Node target (label): needs a free node slot and a unit of budget on every
    incident edge. Edge target (pair): needs a free edge slot and a unit of
    budget on that edge. Exact weights give an exact rational back.
    """
    _check_size(p, t)
    tally = _tally(t, p.cap, p.cv, p.ce, _lead_for_target(t, target), engine)
    refused, admitted = _fold(
        tally, p.node_weights.entries, p.edge_weights.entries, 2
    )
    total = refused + admitted
    if total <= 0:
        raise ValueError("degenerate weights: total measure is zero")
    return refused / total
