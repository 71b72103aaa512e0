"""Command-line front end.

Subcommands: classify, window, blocking-curve, sweep-region, simulate,
enumerate, selftest. Output is CSV (grid commands) or JSON (single-shot
commands), written to --out or stdout, and byte-stable for identical inputs
apart from the versioned header line.

Exit codes: 0 success, 1 selftest failure, 2 usage/validation error,
3 model-assumption failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .phase1d import AssumptionViolation, condition_a, condition_a_margin, phase_window
from .rfmap import ModelParams, classify_by_iteration, conjugate_maps, interaction_map, random_field_map
from .treecalc import TreeSpec, blocking_curve, center_occupancy, multicast_blocking, rooted_state, unicast_blocking
from .weights import WeightVector, geometric_weights, load_weight_file, poisson_weights
from . import oracle as _oracle
from . import simulate as _sim

__all__ = ["main"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _edge_family(family: str, lam, ce: int) -> WeightVector:
    if family.startswith("file:"):
        entries = load_weight_file(family[5:]).entries
        if len(entries) < ce + 1:
            raise ValueError(
                f"weight file has {len(entries)} entries, need at least {ce + 1}"
            )
        return WeightVector(entries[: ce + 1])
    if ce == 0:
        return WeightVector((1,))
    if lam is None:
        raise ValueError("--lam is required for poisson/geometric weights when ce >= 1")
    if family == "poisson":
        return poisson_weights(lam, ce)
    if family == "geometric":
        return geometric_weights(lam, ce)
    raise ValueError(f"unknown weights family {family!r}")


def _model_params(args) -> ModelParams:
    ce = args.cap if args.ce is None else args.ce
    edge = _edge_family(args.weights, args.lam, ce)
    node = poisson_weights(args.nu, args.cv)
    return ModelParams(args.q, args.cap, args.cv, ce, node, edge)


def _grid(lo: float, hi: float, step: float, what: str) -> list:
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise ValueError(f"{what} range must be finite")
    if step <= 0 or hi < lo:
        raise ValueError(f"need {what}-min <= {what}-max and {what}-step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload) -> int:
    if getattr(args, "format", None) == "csv":
        raise ValueError("this command emits JSON; csv format is not available")
    _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def _emit_csv(args, command: str, header: str, rows: list) -> int:
    if getattr(args, "format", None) == "json":
        cols = header.split(",")
        payload = [dict(zip(cols, (_jsonable(c) for c in row))) for row in rows]
        _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    lines = [f"# treeloss {__version__} {command}", header]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _jsonable(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------- commands


def _cmd_classify(args) -> int:
    p = _model_params(args)
    verdict = classify_by_iteration(p, tol=args.tol, sep=args.sep, max_iter=args.max_iter)
    payload = {
        "kind": verdict.kind.value,
        "iterations": verdict.iterations,
        "fixed_point": _jsonable(verdict.fixed_point),
        "even_limit": _jsonable(verdict.even_limit),
        "odd_limit": _jsonable(verdict.odd_limit),
    }
    return _emit_json(args, payload)


def _window_payload(q: int, cap: int, edge: WeightVector) -> dict:
    win = phase_window(q, cap, edge)
    payload = {
        "condition_a": win.present,
        "boundary": win.boundary,
        "window": None,
        "alphas": None,
    }
    if win.present:
        payload["window"] = {"nu_minus": win.nu_minus, "nu_plus": win.nu_plus}
        payload["alphas"] = {"alpha_minus": win.alpha_minus, "alpha_plus": win.alpha_plus}
    return payload


def _cmd_window(args) -> int:
    edge = _edge_family(args.weights, args.lam, args.cap)
    return _emit_json(args, _window_payload(args.q, args.cap, edge))


def _curve_task(task) -> tuple:
    q, cap, cv, ce, family, lam, nu, tol, sep, max_iter = task
    edge = _edge_family(family, lam, ce)
    [pt] = blocking_curve(q, cap, cv, ce, edge, [nu], tol=tol, sep=sep, max_iter=max_iter)
    return (
        pt.nu,
        pt.kind.value,
        pt.beta_even,
        pt.beta_odd,
        ";".join(_fmt(x) for x in pt.xi_even),
        ";".join(_fmt(x) for x in pt.xi_odd),
    )


def _cmd_blocking_curve(args) -> int:
    ce = args.cap if args.ce is None else args.ce
    _edge_family(args.weights, args.lam, ce)  # validate before any output
    nus = _grid(args.nu_min, args.nu_max, args.nu_step, "nu")
    tasks = [
        (args.q, args.cap, args.cv, ce, args.weights, args.lam, nu,
         args.tol, args.sep, args.max_iter)
        for nu in nus
    ]
    rows = _map_tasks(_curve_task, tasks, args.jobs)
    return _emit_csv(
        args, "blocking-curve", "nu,unique,beta_even,beta_odd,xi_even,xi_odd", rows
    )


def _sweep_task(task) -> tuple:
    q, cap, family, lam = task
    edge = _edge_family(family, lam, cap)
    win = phase_window(q, cap, edge)
    if win.present:
        return (lam, True, win.nu_minus, win.nu_plus)
    return (lam, False, None, None)


def _cmd_sweep_region(args) -> int:
    if args.weights.startswith("file:"):
        raise ValueError("sweep-region scans the rate; fixed file weights make no sense here")
    lams = _grid(args.lam_min, args.lam_max, args.lam_step, "lam")
    tasks = [(args.q, args.cap, args.weights, lam) for lam in lams]
    rows = _map_tasks(_sweep_task, tasks, args.jobs)
    return _emit_csv(args, "sweep-region", "lambda,condition_a,nu_minus,nu_plus", rows)


def _map_tasks(fn, tasks: list, jobs: int) -> list:
    if jobs < 1:
        raise ValueError("--jobs must be >= 1")
    if jobs == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _tree_spec(args) -> TreeSpec:
    if (args.height is None) == (args.radius is None):
        raise ValueError("give exactly one of --height (rooted) or --radius (spherical)")
    if args.height is not None:
        return TreeSpec("rooted", args.height)
    return TreeSpec("spherical", args.radius)


def _cmd_enumerate(args) -> int:
    p = _model_params(args)
    spec = _tree_spec(args)
    tree, center = _oracle.build_tree(spec, p.q)
    z = _oracle.exact_partition(p, tree, center)
    occ = _oracle.occupancy_distribution(p, tree, center)
    payload = {
        "tree": {"kind": spec.kind, "size": spec.size,
                 "nodes": len(tree.nodes), "edges": len(tree.edges)},
        "partition": [float(v) for v in z],
        "occupancy": [float(v) for v in occ],
        "node_blocking": float(_oracle.exact_blocking(p, tree, center)),
        "edge_blocking": (
            float(_oracle.exact_blocking(p, tree, tree.edges[0])) if tree.edges else None
        ),
    }
    return _emit_json(args, payload)


def _cmd_simulate(args) -> int:
    p = _model_params(args)
    cfg = _sim.SimConfig(
        params=p,
        tree=_tree_spec(args),
        service_mode=args.service.replace("-", "_"),
        duration_mode=args.durations,
        warmup_time=args.warmup,
        horizon_time=args.horizon,
        replications=args.reps,
        seed=args.seed,
    )
    stats = _sim.run(cfg)
    payload = {
        "replications": stats.replications,
        "post_warmup_events": stats.post_warmup_events,
        "node_beta": _jsonable(stats.node_beta),
        "node_beta_se": _jsonable(stats.node_beta_se),
        "edge_beta": _jsonable(stats.edge_beta),
        "edge_beta_se": _jsonable(stats.edge_beta_se),
        "occupancy": _jsonable(stats.occupancy),
        "occupancy_se": _jsonable(stats.occupancy_se),
        "node_offered": stats.node_offered,
        "node_blocked": stats.node_blocked,
        "edge_offered": stats.edge_offered,
        "edge_blocked": stats.edge_blocked,
    }
    return _emit_json(args, payload)


# ---------------------------------------------------------------- selftest


def _selftest_checks(perturb: float):
    """Yield (name, ok, detail) triples; perturb != 1 must trip the first check."""
    # recursion vs enumeration on a small grid
    worst = (0.0, "")
    ok = True
    for q, m in ((2, 0), (2, 1), (2, 2), (3, 1)):
        for lam_rate in (0.5, 1.0):
            p = ModelParams(q, 2, 1, 2, poisson_weights(1.0, 1), poisson_weights(lam_rate, 2))
            st = rooted_state(p, m)
            z0 = math.exp(st.log_z0) * perturb
            zt = (z0,) + tuple(z0 * x for x in st.xi)
            zo = _oracle.exact_partition(p, _oracle.rooted_tree(q, m), 0)
            for a, b in zip(zt, zo):
                rel = abs(a - b) / max(1.0, abs(b))
                if rel > worst[0]:
                    worst = (rel, f"q={q} m={m} lam={lam_rate}")
                if rel > 1e-9:
                    ok = False
    yield "recursion-vs-enumeration", ok, f"worst rel {worst[0]:.3g} at {worst[1]}"

    # blocking formulas vs enumeration
    ok = True
    detail = ""
    for q in (2, 3):
        p = ModelParams(q, 2, 1, 2, poisson_weights(1.0, 1), poisson_weights(1.0, 2))
        bt = multicast_blocking(p, 1)
        bo = float(_oracle.exact_blocking(p, _oracle.spherical_tree(q, 1), 0))
        ut = unicast_blocking(p, 1)
        uo = float(_oracle.exact_blocking(p, _oracle.edge_centered_tree(q, 1), (0, 1)))
        if abs(bt - bo) > 1e-9 or abs(ut - uo) > 1e-9:
            ok = False
            detail = f"q={q}: node {bt} vs {bo}, edge {ut} vs {uo}"
    yield "blocking-vs-enumeration", ok, detail or "node and edge targets agree"

    # conjugacy between the ratio recursion and the interaction recursion
    import random

    rng = random.Random(7)
    worst_gap = 0.0
    for _ in range(25):
        q = rng.randint(2, 8)
        cap = rng.randint(2, 4)
        cv = rng.randint(1, cap)
        ce = rng.randint(0, cap)
        node = poisson_weights(rng.uniform(0.2, 3.0), cv)
        edge = poisson_weights(rng.uniform(0.2, 3.0), ce) if ce else WeightVector((1,))
        p = ModelParams(q, cap, cv, ce, node, edge)
        to_ratio, from_ratio = conjugate_maps(p)
        psi = (1.0,) + tuple(rng.uniform(0.0, 2.0) for _ in range(cv))
        lhs = interaction_map(p, psi)
        rhs = from_ratio(random_field_map(p, to_ratio(psi)))
        gap = max(abs(a - b) / (1.0 + abs(b)) for a, b in zip(lhs, rhs))
        worst_gap = max(worst_gap, gap)
    yield "conjugacy", worst_gap <= 1e-10, f"worst rel gap {worst_gap:.3g}"

    # known phase boundaries
    checks = [
        ("threshold q=6 exact zero",
         condition_a_margin(6, 2, poisson_weights(Fraction(6), 2)) == 0),
        ("no window below", not condition_a(6, 2, poisson_weights(5.99, 2))),
        ("window above", condition_a(6, 2, poisson_weights(6.01, 2))),
        ("geometric window edges", not condition_a(14, 2, geometric_weights(Fraction(87, 100), 2))
         and condition_a(14, 2, geometric_weights(Fraction(88, 100), 2))),
    ]
    bad = [name for name, good in checks if not good]
    yield "phase-boundaries", not bad, ("failed: " + ", ".join(bad)) if bad else "4 boundary checks"

    win = phase_window(10, 2, poisson_weights(0.75, 2))
    ok = (
        win.present
        and abs(win.nu_minus - 26.770974722340239) <= 0.005 * win.nu_minus
        and abs(win.nu_plus - 90.726253564271425) <= 0.005 * win.nu_plus
    )
    yield "window-endpoints", ok, f"({win.nu_minus:.6g}, {win.nu_plus:.6g})"


def _cmd_selftest(args) -> int:
    perturb = 1.0 + 1e-6 if args.debug_perturb else 1.0
    t0 = time.monotonic()
    failures = 0
    print(f"treeloss {__version__} selftest")
    for name, ok, detail in _selftest_checks(perturb):
        status = "ok" if ok else "FAIL"
        print(f"  {name:<28} {status:<5} {detail}")
        if not ok:
            failures += 1
    elapsed = time.monotonic() - t0
    print(f"{'PASS' if failures == 0 else 'FAIL'} in {elapsed:.1f}s")
    if elapsed > 300:
        print("warning: selftest exceeded the 5 minute budget", file=sys.stderr)
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------- parser


def _add_model_flags(sp, with_nu=True):
    sp.add_argument("--q", type=int, required=True, help="branching factor")
    sp.add_argument("--cap", type=int, required=True, help="per-edge budget C")
    sp.add_argument("--cv", type=int, default=1, help="per-node call cap (default 1)")
    sp.add_argument("--ce", type=int, default=None, help="per-edge call cap (default: cap)")
    sp.add_argument("--weights", default="poisson",
                    help="edge weight family: poisson | geometric | file:PATH")
    sp.add_argument("--lam", type=float, default=None, help="edge weight rate")
    if with_nu:
        sp.add_argument("--nu", type=float, required=True, help="node weight rate")


def _add_iter_flags(sp):
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--sep", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=10**6)


def _add_out_flags(sp):
    sp.add_argument("--format", choices=("csv", "json"), default=None,
                    help="output format (grid commands default to csv and also "
                         "accept json; single-result commands are json only)")
    sp.add_argument("--out", default=None, help="output path (default stdout)")


def _add_tree_flags(sp):
    sp.add_argument("--height", type=int, default=None, help="rooted tree height")
    sp.add_argument("--radius", type=int, default=None, help="spherical tree radius")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="treeloss",
        description="Phase-transition analysis of a controlled loss network on a regular tree.",
    )
    ap.add_argument("--version", action="version", version=f"treeloss {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="iterate the occupancy-ratio recursion from zero")
    _add_model_flags(sp)
    _add_iter_flags(sp)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_classify)

    sp = sub.add_parser("window", help="closed-form multiplicity window in the node rate")
    _add_model_flags(sp, with_nu=False)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_window)

    sp = sub.add_parser("blocking-curve", help="blocking vs node rate along a grid")
    _add_model_flags(sp, with_nu=False)
    sp.add_argument("--nu-min", type=float, required=True)
    sp.add_argument("--nu-max", type=float, required=True)
    sp.add_argument("--nu-step", type=float, required=True)
    _add_iter_flags(sp)
    sp.add_argument("--jobs", type=int, default=1)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_blocking_curve)

    sp = sub.add_parser("sweep-region", help="window endpoints along an edge-rate grid")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--cap", type=int, required=True)
    sp.add_argument("--weights", default="poisson")
    sp.add_argument("--lam-min", type=float, required=True)
    sp.add_argument("--lam-max", type=float, required=True)
    sp.add_argument("--lam-step", type=float, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_sweep_region)

    sp = sub.add_parser("enumerate", help="exact enumeration on a small finite tree")
    _add_model_flags(sp)
    _add_tree_flags(sp)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("simulate", help="event-driven simulation on a finite tree")
    _add_model_flags(sp)
    _add_tree_flags(sp)
    sp.add_argument("--service", choices=("per-call", "shared-server"), default="per-call")
    sp.add_argument("--durations", choices=("exponential", "deterministic"),
                    default="exponential")
    sp.add_argument("--warmup", type=float, default=None)
    sp.add_argument("--horizon", type=float, default=1000.0)
    sp.add_argument("--reps", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    _add_out_flags(sp)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("selftest", help="fast internal consistency checks")
    sp.add_argument("--debug-perturb", action="store_true",
                    help="inject a tiny error to verify the checks can fail")
    sp.set_defaults(fn=_cmd_selftest)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.fn(args)
    except AssumptionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
