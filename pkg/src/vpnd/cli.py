"""Command-line front end: ``vpnd <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import generate
from .approx import DEFAULT_REPETITIONS, solve_cvpnd
from .bench import format_rows, run_bench
from .exact import solve_exact_linear
from .instance import (
    IDENTITY,
    format_rational,
    parse_cost_fn,
    parse_instance,
    serialize_instance,
)
from .oracle import (
    optimal_routing_oracle,
    optimal_tree_oracle,
    serialize_demand_matrix,
    verify_feasible,
)
from .tree import (
    TreeSolution,
    parse_tree,
    routing_from_tree_file,
    serialize_tree,
    tree_cost,
)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    instance = parse_instance(Path(args.instance).read_text())
    f = None
    if getattr(args, "costfn", None):
        f = parse_cost_fn(Path(args.costfn).read_text())
    return instance, f or instance.cost_fn or IDENTITY


def _tree_json(tree, f, **extra):
    return json.dumps(
        {
            **extra,
            "tree": [[u, v, format_rational(tree.capacities[(u, v)])] for u, v in tree.sorted_edges],
            "cost": format_rational(tree_cost(tree.instance, tree, f)),
        },
        indent=2,
    ) + "\n"


def cmd_gen(args):
    if args.kind == "star":
        inst = generate.star(args.k)
    elif args.kind == "path":
        inst = generate.path(args.n)
    elif args.kind == "grid":
        inst = generate.grid(args.rows, args.cols)
    else:
        inst = generate.random_connected(args.n, args.p, args.seed, args.cmax, args.bmax)
    _emit(serialize_instance(inst), args.out)
    return 0


def cmd_solve_exact(args):
    instance, _ = _load(args)
    value, root, tree = solve_exact_linear(instance)
    if args.format == "json":
        text = _tree_json(tree, IDENTITY, value=format_rational(value), root=root)
    else:
        text = f"# exact linear value={format_rational(value)} root={root}\n"
        text += serialize_tree(tree, IDENTITY)
    _emit(text, args.out)
    return 0


def cmd_solve_cvpnd(args):
    instance, f = _load(args)
    value, tree = solve_cvpnd(instance, f, args.seed, args.reps)
    if args.format == "json":
        text = _tree_json(tree, f, value=format_rational(value), seed=args.seed, reps=args.reps)
    else:
        text = f"# cvpnd value={format_rational(value)} seed={args.seed} reps={args.reps}\n"
        text += serialize_tree(tree, f)
    _emit(text, args.out)
    return 0


def cmd_eval_tree(args):
    instance, f = _load(args)
    caps, _ = parse_tree(Path(args.tree).read_text())
    tree = TreeSolution.from_edges(instance, caps)
    if args.format == "json":
        text = _tree_json(tree, f)
    else:
        text = serialize_tree(tree, f)
    _emit(text, args.out)
    return 0


def cmd_oracle(args):
    instance, f = _load(args)
    value, edges = optimal_tree_oracle(instance, f)
    tree = TreeSolution.from_edges(instance, edges)
    routing_value = optimal_routing_oracle(instance, f) if args.routing else None
    if args.format == "json":
        extra = {"value": format_rational(value)}
        if routing_value is not None:
            extra["routing_value"] = format_rational(routing_value)
        text = _tree_json(tree, f, **extra)
    else:
        text = f"# optimal tree value={format_rational(value)}\n"
        if routing_value is not None:
            text += f"# optimal routing value={format_rational(routing_value)}\n"
        text += serialize_tree(tree, f)
    _emit(text, args.out)
    return 0


def cmd_verify(args):
    instance, _ = _load(args)
    routing = routing_from_tree_file(instance, Path(args.tree).read_text())
    ok, violation = verify_feasible(instance, routing)
    if ok:
        text = "feasible\n"
    else:
        u, v = violation.edge
        text = (
            f"infeasible edge {u} {v} installed {format_rational(violation.installed)} "
            f"required {format_rational(violation.required)}\n"
        )
        text += serialize_demand_matrix(violation.certificate)
    _emit(text, args.out)
    return 0 if ok else 1


def cmd_bench(args):
    f = parse_cost_fn(Path(args.costfn).read_text()) if args.costfn else None
    rows, ok = run_bench(args.instances, f, args.seed, args.reps, args.timing)
    _emit(format_rows(rows, args.format), args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpnd", description="VPN design solvers and oracles")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, costfn=True, fmt=True):
        p.add_argument("--out", help="write output here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        if costfn:
            p.add_argument("--costfn", help="file with a costfn block (default: instance's, else identity)")

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("kind", choices=generate.KINDS)
    p.add_argument("--n", type=int, default=6, help="vertices (random-connected, path)")
    p.add_argument("--p", type=float, default=0.5, help="edge probability (random-connected)")
    p.add_argument("--k", type=int, default=3, help="leaves (star)")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--cmax", type=int, default=5, help="max integer edge cost (random-connected)")
    p.add_argument("--bmax", type=int, default=3, help="max demand (random-connected)")
    p.add_argument("--seed", type=int, default=0)
    common(p, costfn=False, fmt=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve-exact", help="exact linear-cost solver")
    p.add_argument("instance")
    common(p, costfn=False)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("solve-cvpnd", help="concave-cost approximation")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    common(p)
    p.set_defaults(func=cmd_solve_cvpnd)

    p = sub.add_parser("eval-tree", help="recompute capacities and cost of a tree file")
    p.add_argument("instance")
    p.add_argument("tree")
    common(p)
    p.set_defaults(func=cmd_eval_tree)

    p = sub.add_parser("oracle", help="brute-force optimal tree (and routing) value")
    p.add_argument("instance")
    p.add_argument("--routing", action="store_true", help="also run the all-routings oracle")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="check a tree file's capacities against worst-case loads")
    p.add_argument("instance")
    p.add_argument("tree")
    common(p, costfn=False, fmt=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="benchmark CSV over instances and seeds")
    p.add_argument("instances", nargs="+")
    p.add_argument("--seed", type=int, nargs="+", default=[0])
    p.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    p.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-reproducibility)")
    common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # format, validation, not-a-tree and size-cap errors all derive from ValueError
        print(f"vpnd: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
