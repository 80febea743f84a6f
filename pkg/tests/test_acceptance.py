"""Acceptance criteria, one test each.

Every test records a single ``PASS``/``FAIL`` line, printed at the end of the
pytest run under "acceptance criteria" and also to stdout (visible with ``-s``).
"""

import os
import random
import statistics
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations

from vpnd.approx import solve_cvpnd, steiner_2approx
from vpnd.bench import RATIO_BOUND, run_bench
from vpnd.cables import prune_cables, segments_to_cables
from vpnd.exact import solve_exact_linear
from vpnd.generate import random_connected, random_tree
from vpnd.instance import IDENTITY, ConcaveCost, Instance, eval_cost_fn, serialize_instance
from vpnd.oracle import (
    capacity_requirement,
    optimal_routing,
    optimal_steiner_oracle,
    optimal_tree_oracle,
    verify_feasible,
)
from vpnd.tree import Routing, TreeSolution, extract_paths, tree_capacities

from conftest import ACCEPTANCE_LINES

FUNCTIONS = [
    IDENTITY,
    ConcaveCost.rent_or_buy(1, 2),
    ConcaveCost.rent_or_buy(3, 4),
    ConcaveCost(((0, 0), (1, 3), (4, 6)), Fraction(1, 2)),
    ConcaveCost(((0, 0), (1, 2), (2, 3), (4, 4)), 0),
    ConcaveCost(((0, 0), (Fraction(1, 2), 2), (3, 4)), Fraction(1, 3)),
]


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _random_instances(count, seed0, n_lo, n_hi, cmax, bmax):
    rng = random.Random(seed0)
    for i in range(count):
        n = rng.randint(n_lo, n_hi)
        yield random_connected(n, rng.choice([0.3, 0.5, 0.7, 1.0]), seed0 + i, cmax=cmax, bmax=bmax)


def test_exact_solver_optimality():
    start = time.perf_counter()
    total = agree = 0
    for inst in _random_instances(250, 10_000, 1, 6, 5, 3):
        total += 1
        agree += solve_exact_linear(inst)[0] == optimal_tree_oracle(inst, IDENTITY)[0]
    elapsed = time.perf_counter() - start
    record(
        "exact-solver optimality",
        total >= 200 and agree == total and elapsed < 300,
        f"{agree}/{total} instances equal the tree oracle, {elapsed:.1f}s",
    )


def test_tree_routing_property():
    cases = instances = strict = 0
    for inst in _random_instances(400, 20_000, 2, 5, 5, 2):
        if len(inst.terminals) > 4:
            continue
        instances += 1
        for f in FUNCTIONS[:4]:
            cases += 1
            strict += optimal_routing(inst, f)[0] != optimal_tree_oracle(inst, f)[0]
        if instances == 80:
            break
    record(
        "tree routing property",
        instances >= 50 and strict == 0,
        f"{cases - strict}/{cases} cases equal over {instances} instances x 4 functions",
    )


def _components_without(edges, removed):
    adj = {}
    for u, v in edges:
        if (u, v) != removed:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    seen, todo = {removed[0]}, [removed[0]]
    while todo:
        for w in adj.get(todo.pop(), []):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def _tree_distances(inst, root):
    dist, todo = {root: Fraction(0)}, [root]
    while todo:
        u = todo.pop()
        for w in inst.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + inst.cost(u, w)
                todo.append(w)
    return dist


def test_tree_median_identity():
    rng = random.Random(3)
    total = agree = 0
    for seed in range(600):
        inst = random_tree(rng.randint(1, 12), seed)
        edges = [(u, v) for u, v, _ in inst.edges]
        bw = sum(inst.demands.values())
        side_sum = Fraction(0)
        for u, v, c in inst.edges:
            a = sum(inst.demand(x) for x in _components_without(edges, (u, v)))
            side_sum += c * min(a, bw - a)
        median = min(
            sum(b * _tree_distances(inst, r)[w] for w, b in inst.demands.items()) for r in inst.vertices
        )
        total += 1
        agree += median == side_sum
    record("tree-median identity", total >= 500 and agree == total, f"{agree}/{total} random trees")


def _spanning_tree(inst, rng):
    edges = list(inst.edge_set)
    rng.shuffle(edges)
    comp = {v: v for v in inst.vertices}

    def find(v):
        while comp[v] != v:
            v = comp[v]
        return v

    out = []
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            comp[ru] = rv
            out.append((u, v))
    return out


def test_capacity_formula():
    rng = random.Random(4)
    trees = edges_checked = mismatches = 0
    for inst in _random_instances(200, 30_000, 2, 7, 5, 4):
        if len(inst.terminals) < 2 or len(inst.terminals) > 6:
            continue
        candidates = [
            solve_exact_linear(inst)[2].tree_edges,
            _spanning_tree(inst, rng),
        ]
        if inst.vertex_count <= 6:
            candidates.append(optimal_tree_oracle(inst, rng.choice(FUNCTIONS))[1])
        for edges in candidates:
            tree = TreeSolution.from_edges(inst, edges)
            routing = extract_paths(tree)
            caps = tree_capacities(inst, tree.tree_edges)
            trees += 1
            for e in tree.tree_edges:
                edges_checked += 1
                mismatches += caps[e] != capacity_requirement(inst, routing, e)
    triangle = Instance(3, ((1, 2, 1), (2, 3, 1), (1, 3, 1)), {1: 1, 2: 1, 3: 1})
    tri = Routing(triangle, {(1, 2): (1, 3, 2), (1, 3): (1, 3), (2, 3): (2, 1, 3)}, {})
    half = capacity_requirement(triangle, tri, (1, 3))
    record(
        "capacity formula",
        trees >= 100 and mismatches == 0 and half == Fraction(3, 2),
        f"{edges_checked - mismatches}/{edges_checked} edges over {trees} trees; triangle load {half}",
    )


def test_approximation_bound(tmp_path):
    rng = random.Random(5)
    paths = []
    for i, inst in enumerate(_random_instances(60, 40_000, 3, 7, 5, 3)):
        f = FUNCTIONS[i % len(FUNCTIONS)]
        inst = Instance(inst.vertex_count, inst.edges, inst.demands, f)
        p = tmp_path / f"inst{i:03d}.vpnd"
        p.write_text(serialize_instance(inst))
        paths.append(p)
    rows, ok = run_bench(paths, None, [0, 1], reps=4)
    ratios = sorted(float(r["ratio"]) for r in rows)
    gated = all(r["oracle_value"] != "" for r in rows)

    linear_ok = True
    linear_checked = terminal_roots = 0
    for inst in _random_instances(120, 50_000, 2, 7, 5, 3):
        exact, root, _ = solve_exact_linear(inst)
        value = solve_cvpnd(inst, IDENTITY, rng.randint(0, 99), 3)[0]
        linear_checked += 1
        if exact == 0:
            linear_ok &= value == 0
            continue
        linear_ok &= value / exact <= RATIO_BOUND
        if inst.demand(root) > 0:
            terminal_roots += 1
            linear_ok &= value == exact
    record(
        "approximation bound",
        ok and gated and linear_ok,
        f"{len(rows)} bench rows, ratio min {ratios[0]:.4f} median {statistics.median(ratios):.4f} "
        f"max {ratios[-1]:.4f} (bound {float(RATIO_BOUND)}); linear f: {linear_checked} instances, "
        f"{terminal_roots} with terminal root all exact",
    )


def test_feasibility_of_all_solvers():
    rng = random.Random(6)
    checked = failures = 0
    for inst in _random_instances(120, 60_000, 2, 6, 5, 3):
        if len(inst.terminals) > 6:
            continue
        f = rng.choice(FUNCTIONS)
        routings = [
            extract_paths(solve_exact_linear(inst)[2]),
            extract_paths(solve_cvpnd(inst, f, rng.randint(0, 99), 3)[1]),
            extract_paths(TreeSolution.from_edges(inst, optimal_tree_oracle(inst, f)[1])),
        ]
        if inst.vertex_count <= 5 and len(inst.terminals) <= 4 and max(inst.demands.values()) <= 2:
            routings.append(optimal_routing(inst, f)[1])
        for routing in routings:
            checked += 1
            failures += not verify_feasible(inst, routing)[0]
    record("feasibility", failures == 0, f"{checked - failures}/{checked} solutions feasible")


def _evaluation_grid(cables, f):
    xs = [x for x, _ in f.breakpoints]
    top = max(xs) * 3 + 8
    pts = {top * Fraction(i, 200) for i in range(201)}
    pts.update(xs)
    pts.update((a + b) / 2 for a, b in zip(xs, xs[1:]))
    for a, b in zip(cables, cables[1:]):
        pts.add((b.sigma - a.sigma) / (a.delta - b.delta))
    return sorted(pts)


def test_cable_envelope():
    rng = random.Random(7)
    exact_points = exact_ok = sandwich_points = sandwich_ok = 0
    functions = list(FUNCTIONS)
    for _ in range(300):
        slopes = sorted({Fraction(rng.randint(0, 40), rng.randint(1, 6)) for _ in range(rng.randint(1, 7))}, reverse=True)
        pts = [(Fraction(0), Fraction(0))]
        for s in slopes[:-1]:
            dx = Fraction(rng.randint(1, 30), rng.randint(1, 6))
            pts.append((pts[-1][0] + dx, pts[-1][1] + s * dx))
        functions.append(ConcaveCost(tuple(pts), slopes[-1]))
    for f in functions:
        cables = segments_to_cables(f)
        xs = [x for x, _ in f.breakpoints]
        for x in xs + [(a + b) / 2 for a, b in zip(xs, xs[1:])] + [xs[-1] + 1]:
            exact_points += 1
            exact_ok += cables.envelope(x) == eval_cost_fn(f, x)
        pruned = prune_cables(cables, 2)
        for x in _evaluation_grid(cables, f):
            fx = eval_cost_fn(f, x)
            sandwich_points += 1
            sandwich_ok += fx <= pruned.envelope(x) <= 2 * fx
    record(
        "cable envelope",
        exact_ok == exact_points and sandwich_ok == sandwich_points,
        f"{len(functions)} functions; envelope = f at {exact_ok}/{exact_points} points, "
        f"pruned within [f, 2f] at {sandwich_ok}/{sandwich_points} points",
    )


def test_steiner_subroutine():
    rng = random.Random(8)
    total = within = 0
    worst = Fraction(0)
    for inst in _random_instances(150, 70_000, 2, 8, 5, 1):
        required = rng.sample(list(inst.vertices), rng.randint(1, inst.vertex_count))
        cost = sum((inst.cost(*e) for e in steiner_2approx(inst, required)), Fraction(0))
        opt = optimal_steiner_oracle(inst, required)[0]
        total += 1
        within += cost <= 2 * opt
        if opt:
            worst = max(worst, cost / opt)
    record(
        "steiner subroutine",
        total >= 100 and within == total,
        f"{within}/{total} instances within 2x optimum, worst ratio {float(worst):.4f}",
    )


def _cli(args, hashseed, cwd):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    res = subprocess.run(
        [sys.executable, "-m", "vpnd.cli", *map(str, args)],
        capture_output=True,
        env=env,
        cwd=cwd,
        check=False,
    )
    return res.returncode, res.stdout


def test_cli_determinism(tmp_path):
    code, text = _cli(["gen", "random-connected", "--n", 6, "--p", 0.6, "--seed", 11], 0, tmp_path)
    inst = tmp_path / "inst.vpnd"
    inst.write_bytes(text)
    costfn = tmp_path / "f.txt"
    costfn.write_text("costfn 3\nbp 0 0\nbp 1 3\nbp 4 6\nslope 1/2\n")
    exact = tmp_path / "exact.txt"
    commands = [
        ["gen", "random-connected", "--n", 7, "--p", 0.4, "--seed", 3],
        ["gen", "grid", "--rows", 2, "--cols", 4],
        ["solve-exact", inst],
        ["solve-exact", inst, "--format", "json"],
        ["solve-cvpnd", inst, "--seed", 5, "--reps", 3, "--costfn", costfn],
        ["solve-cvpnd", inst, "--seed", 5, "--reps", 3, "--format", "json"],
        ["oracle", inst, "--costfn", costfn],
        ["bench", inst, "--seed", 1, 2, "--reps", 3, "--costfn", costfn],
        ["bench", inst, "--seed", 1, "--reps", 3, "--format", "json"],
    ]
    _cli(["solve-exact", inst, "--out", exact], 0, tmp_path)
    commands += [["eval-tree", inst, exact, "--costfn", costfn], ["verify", inst, exact]]
    differing = []
    for argv in commands:
        runs = [_cli(argv, h, tmp_path) for h in (0, 1, 12345)]
        if len(set(runs)) != 1 or runs[0][0] != 0:
            differing.append(" ".join(map(str, argv)))
    record(
        "determinism",
        code == 0 and not differing,
        f"{len(commands) - len(differing)}/{len(commands)} invocations byte-identical over 3 runs"
        + (f"; differing: {differing}" if differing else ""),
    )
