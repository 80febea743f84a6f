"""Exponential-time ground truth for small instances.

Every function here refuses instances beyond its size cap instead of
returning something that might not be the true optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

from .instance import ConcaveCost, Edge, Instance, edge_key, eval_cost_fn, format_rational
from .tree import Routing, tree_capacities

HALF = Fraction(1, 2)

MAX_CAPACITY_TERMINALS = 6
MAX_CAPACITY_DEMAND = 4
MAX_TREE_VERTICES = 8
MAX_ROUTING_VERTICES = 5
MAX_ROUTING_TERMINALS = 4
MAX_ROUTING_DEMAND = 2


class OracleSizeError(ValueError):
    """Instance exceeds an oracle's hard size cap."""


@dataclass(frozen=True)
class DemandMatrix:
    """Symmetric demands ``d_uv`` over terminal pairs, keyed ``(u, v)`` with u < v."""

    entries: Mapping[tuple[int, int], Fraction]

    def row_sum(self, v: int) -> Fraction:
        return sum((d for pair, d in self.entries.items() if v in pair), Fraction(0))

    def is_feasible(self, instance: Instance) -> bool:
        if any(d < 0 for d in self.entries.values()):
            return False
        return all(self.row_sum(v) <= instance.demand(v) for v in instance.vertices)

    def load(self, pairs: Iterable[tuple[int, int]]) -> Fraction:
        return sum((self.entries.get(edge_key(*p), Fraction(0)) for p in pairs), Fraction(0))


def serialize_demand_matrix(d: DemandMatrix) -> str:
    return "".join(
        f"demand {u} {v} {format_rational(x)}\n" for (u, v), x in sorted(d.entries.items()) if x
    )


# --------------------------------------------------------------------------
# Worst-case edge load


@lru_cache(maxsize=None)
def _max_load(bounds: tuple[int, ...], pairs: tuple[tuple[int, int], ...]):
    """Max of sum(x_p) over integer x >= 0 with sum over pairs at i of x_p <= bounds[i].

    Branch and bound over the grid; returns ``(value, assignment)``.
    """
    m = len(pairs)
    res = list(bounds)
    cur = [0] * m
    best = [-1, ()]

    def bound(k):
        s1 = 0
        touched = set()
        for i, j in pairs[k:]:
            s1 += min(res[i], res[j])
            touched.update((i, j))
        return min(s1, sum(res[v] for v in touched) // 2)

    def dfs(k, total):
        if best[0] >= 0 and total + bound(k) <= best[0]:
            return
        if k == m:
            best[0], best[1] = total, tuple(cur)
            return
        i, j = pairs[k]
        for x in range(min(res[i], res[j]), -1, -1):
            res[i] -= x
            res[j] -= x
            cur[k] = x
            dfs(k + 1, total + x)
            res[i] += x
            res[j] += x
        cur[k] = 0

    dfs(0, 0)
    return best[0], best[1]


def _check_capacity_cap(instance: Instance):
    if len(instance.terminals) > MAX_CAPACITY_TERMINALS:
        raise OracleSizeError(f"capacity oracle supports at most {MAX_CAPACITY_TERMINALS} terminals")
    if max(instance.demands.values()) > MAX_CAPACITY_DEMAND:
        raise OracleSizeError(f"capacity oracle supports demands up to {MAX_CAPACITY_DEMAND}")


def max_pair_load(
    instance: Instance, pairs: Iterable[tuple[int, int]], grid: Fraction = HALF
) -> tuple[Fraction, DemandMatrix]:
    """Largest total demand a feasible matrix on the ``grid`` can put on ``pairs``."""
    _check_capacity_cap(instance)
    terms = instance.terminals
    index = {w: i for i, w in enumerate(terms)}
    pairs = sorted({edge_key(*p) for p in pairs})
    scale = 1 / Fraction(grid)
    if scale.denominator != 1:
        raise ValueError("grid must be 1/k for a positive integer k")
    bounds = tuple(instance.demand(w) * int(scale) for w in terms)
    value, x = _max_load(bounds, tuple((index[u], index[v]) for u, v in pairs))
    entries = {p: Fraction(xi) * grid for p, xi in zip(pairs, x)}
    return Fraction(value) * grid, DemandMatrix(entries)


def worst_case_demand(
    instance: Instance, routing: Routing, e: Edge, grid: Fraction = HALF
) -> tuple[Fraction, DemandMatrix]:
    return max_pair_load(instance, routing.pairs_through(e), grid)


def capacity_requirement(
    instance: Instance, routing: Routing, e: Edge, grid: Fraction = HALF
) -> Fraction:
    """Capacity edge ``e`` needs so that every feasible demand matrix fits.

    Exact over half-integral matrices, which contain every vertex of the
    fractional b-matching polytope.
    """
    return worst_case_demand(instance, routing, e, grid)[0]


@dataclass(frozen=True)
class Violation:
    edge: Edge
    installed: Fraction
    required: Fraction
    certificate: DemandMatrix


def verify_feasible(instance: Instance, routing: Routing) -> tuple[bool, Violation | None]:
    """Check every edge's capacity against its worst-case load, in edge order."""
    if len(instance.terminals) < 2:
        return True, None
    _check_capacity_cap(instance)
    for e in instance.edge_set:
        required, certificate = worst_case_demand(instance, routing, e)
        installed = routing.capacity(*e)
        if installed < required:
            return False, Violation(e, installed, required, certificate)
    return True, None


# --------------------------------------------------------------------------
# Optimal trees


def _subtrees(instance: Instance, must_contain: set[int]):
    """Every edge set forming a tree whose vertex set contains ``must_contain``."""
    if len(must_contain) <= 1:
        yield ()
    edges = instance.edge_set
    for k in range(1, instance.vertex_count):
        for combo in combinations(edges, k):
            parent: dict[int, int] = {}

            def find(x):
                parent.setdefault(x, x)
                while parent[x] != x:
                    x = parent[x]
                return x

            ok = True
            for u, v in combo:
                ru, rv = find(u), find(v)
                if ru == rv:
                    ok = False
                    break
                parent[ru] = rv
            # k acyclic edges on k + 1 vertices form a single tree
            if ok and len(parent) == k + 1 and must_contain <= parent.keys():
                yield combo


def optimal_tree_oracle(instance: Instance, f: ConcaveCost) -> tuple[Fraction, tuple[Edge, ...]]:
    """Cheapest tree solution by exhaustive enumeration of subtrees.

    Ties go to the lexicographically smallest sorted edge tuple.
    """
    if instance.vertex_count > MAX_TREE_VERTICES:
        raise OracleSizeError(f"tree oracle supports at most {MAX_TREE_VERTICES} vertices")
    best = None
    for combo in _subtrees(instance, set(instance.terminals)):
        caps = tree_capacities(instance, combo)
        value = sum(
            (instance.cost(u, v) * eval_cost_fn(f, x) for (u, v), x in caps.items()), Fraction(0)
        )
        if best is None or (value, combo) < best:
            best = (value, combo)
    return best


def optimal_steiner_oracle(instance: Instance, required: Iterable[int]) -> tuple[Fraction, tuple[Edge, ...]]:
    """Minimum-cost tree spanning ``required`` by exhaustive enumeration."""
    if instance.vertex_count > MAX_TREE_VERTICES:
        raise OracleSizeError(f"Steiner oracle supports at most {MAX_TREE_VERTICES} vertices")
    best = None
    for combo in _subtrees(instance, set(required)):
        value = sum((instance.cost(u, v) for u, v in combo), Fraction(0))
        if best is None or (value, combo) < best:
            best = (value, combo)
    return best


# --------------------------------------------------------------------------
# Optimal unrestricted routing


def simple_paths(instance: Instance, s: int, t: int) -> list[tuple[int, ...]]:
    out = []
    path = [s]
    on_path = {s}

    def walk(u):
        if u == t:
            out.append(tuple(path))
            return
        for w in instance.neighbors(u):
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                walk(w)
                on_path.discard(w)
                path.pop()

    walk(s)
    return out


def _check_routing_cap(instance: Instance):
    if (
        instance.vertex_count > MAX_ROUTING_VERTICES
        or len(instance.terminals) > MAX_ROUTING_TERMINALS
        or max(instance.demands.values()) > MAX_ROUTING_DEMAND
    ):
        raise OracleSizeError(
            f"routing oracle supports |V| <= {MAX_ROUTING_VERTICES}, "
            f"|W| <= {MAX_ROUTING_TERMINALS}, b <= {MAX_ROUTING_DEMAND}"
        )


def optimal_routing(instance: Instance, f: ConcaveCost) -> tuple[Fraction, Routing]:
    """Cheapest solution over every choice of one simple path per terminal pair.

    Capacities are worst-case loads; since they only grow as more pairs share
    an edge, a partial assignment's cost is a valid lower bound for pruning.
    """
    _check_routing_cap(instance)
    pairs = list(combinations(instance.terminals, 2))
    edges = instance.edge_set
    eidx = {e: i for i, e in enumerate(edges)}
    options = []
    for u, v in pairs:
        opts = []
        for p in simple_paths(instance, u, v):
            used = [eidx[edge_key(a, b)] for a, b in zip(p, p[1:])]
            opts.append((sum(instance.cost(*edges[i]) for i in used), p, used))
        opts.sort()
        options.append(opts)
    gamma = []
    for mask in range(1 << len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        gamma.append(max_pair_load(instance, chosen)[0])
    table = [
        [instance.cost(*e) * eval_cost_fn(f, g) for g in gamma] for e in edges
    ]
    masks = [0] * len(edges)
    choice = [None] * len(pairs)
    best: list = [None, None]

    def dfs(k, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if k == len(pairs):
            best[0], best[1] = cost, list(choice)
            return
        bit = 1 << k
        for _, p, used in options[k]:
            delta = sum(table[i][masks[i] | bit] - table[i][masks[i]] for i in used)
            for i in used:
                masks[i] |= bit
            choice[k] = p
            dfs(k + 1, cost + delta)
            for i in used:
                masks[i] &= ~bit

    dfs(0, Fraction(0))
    value, chosen = best
    paths = dict(zip(pairs, chosen))
    caps = {}
    for i, e in enumerate(edges):
        mask = sum(1 << k for k, p in enumerate(chosen) if i in _edge_ids(p, eidx))
        if gamma[mask]:
            caps[e] = gamma[mask]
    return value, Routing(instance, paths, caps)


def _edge_ids(path, eidx):
    return {eidx[edge_key(a, b)] for a, b in zip(path, path[1:])}


def optimal_routing_oracle(instance: Instance, f: ConcaveCost) -> Fraction:
    return optimal_routing(instance, f)[0]
