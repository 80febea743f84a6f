"""Benchmark rows: exact linear value, approximation, oracle, ratio, feasibility."""

from __future__ import annotations

import csv
import io
import json
import time
from fractions import Fraction
from pathlib import Path

from .approx import DEFAULT_REPETITIONS, solve_cvpnd
from .exact import solve_exact_linear
from .instance import IDENTITY, ConcaveCost, Instance, eval_cost_fn, format_rational, parse_instance
from .oracle import MAX_TREE_VERTICES, OracleSizeError, optimal_tree_oracle, verify_feasible
from .tree import extract_paths

RATIO_BOUND = Fraction(2492, 100)

COLUMNS = ["instance", "seed", "exact_linear", "cvpnd_value", "oracle_value", "ratio", "feasible", "ms"]


def concave_lower_bound(instance: Instance, f: ConcaveCost, linear_value: Fraction) -> Fraction:
    """Lower bound on the concave optimum from the linear one.

    No edge ever needs more than ``B = b(W) / 2``; on ``[0, B]`` concavity and
    ``f(0) = 0`` give ``f(x) >= x f(B) / B``.
    """
    cap = Fraction(sum(instance.demands.values()), 2)
    if cap == 0:
        return Fraction(0)
    return linear_value * eval_cost_fn(f, cap) / cap


def _feasible(tree) -> bool | None:
    try:
        return verify_feasible(tree.instance, extract_paths(tree))[0]
    except OracleSizeError:
        return None


def bench_row(name: str, instance: Instance, f: ConcaveCost, seed: int, reps: int, timing: bool = False):
    start = time.perf_counter()
    exact_value, _, exact_tree = solve_exact_linear(instance)
    value, tree = solve_cvpnd(instance, f, seed, reps)
    oracle_value = None
    if instance.vertex_count <= MAX_TREE_VERTICES:
        oracle_value = optimal_tree_oracle(instance, f)[0]
        reference = oracle_value
    else:
        reference = concave_lower_bound(instance, f, exact_value)
    if reference == 0:
        ratio = Fraction(1) if value == 0 else None
    else:
        ratio = value / reference
    checks = [_feasible(exact_tree), _feasible(tree)]
    checked = [c for c in checks if c is not None]
    feasible = None if not checked else all(checked)
    elapsed = (time.perf_counter() - start) * 1000
    return {
        "instance": name,
        "seed": seed,
        "exact_linear": format_rational(exact_value),
        "cvpnd_value": format_rational(value),
        "oracle_value": "" if oracle_value is None else format_rational(oracle_value),
        "ratio": "inf" if ratio is None else f"{float(ratio):.6f}",
        "feasible": "" if feasible is None else str(feasible).lower(),
        "ms": f"{elapsed:.1f}" if timing else "",
        "_ok": ratio is not None and ratio <= RATIO_BOUND and feasible is not False,
    }


def run_bench(paths, f: ConcaveCost | None, seeds, reps: int = DEFAULT_REPETITIONS, timing: bool = False):
    """One row per (instance, seed), in input order. Returns ``(rows, ok)``.

    ``f`` defaults to the instance's own costfn block, then to the identity.
    """
    rows = []
    for p in paths:
        instance = parse_instance(Path(p).read_text())
        g = f or instance.cost_fn or IDENTITY
        for seed in seeds:
            rows.append(bench_row(str(p), instance, g, seed, reps, timing))
    return rows, all(r["_ok"] for r in rows)


def format_rows(rows, fmt: str = "csv") -> str:
    public = [{k: r[k] for k in COLUMNS} for r in rows]
    if fmt == "json":
        return json.dumps(public, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(public)
    return buf.getvalue()
