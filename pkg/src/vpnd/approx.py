"""Approximation for concave-cost VPND via single-source flow.

The pipeline: pick a terminal as source, send every other terminal's demand
to it with a sample-augment buy-at-bulk heuristic, turn the flow into a tree,
and install min-side capacities on that tree. All arithmetic is exact.
"""

from __future__ import annotations

import hashlib
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .cables import CableList, prune_cables, segments_to_cables
from .instance import (
    ConcaveCost,
    Edge,
    Instance,
    edge_key,
    eval_cost_fn,
    path_to_root,
    shortest_path_tree,
    shortest_paths_from,
)
from .tree import TreeSolution, _adjacency, _rooted, tree_cost

DEFAULT_REPETITIONS = 10
PRUNE_RATIO = 2


# --------------------------------------------------------------------------
# Steiner tree


def _kruskal(n_items: Iterable, weighted_pairs) -> list:
    """Minimum spanning forest over ``(weight, u, v)`` triples, in sorted order."""
    parent = {x: x for x in n_items}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for w, u, v in sorted(weighted_pairs):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append((w, u, v))
    return chosen


def _prune_to(edges: set[Edge], keep: set[int]) -> frozenset[Edge]:
    adj = {u: set(ws) for u, ws in _adjacency(edges).items()}
    leaves = [v for v, ws in adj.items() if len(ws) == 1 and v not in keep]
    while leaves:
        v = leaves.pop()
        if len(adj[v]) != 1:
            continue
        (w,) = adj[v]
        edges.discard(edge_key(v, w))
        adj[w].discard(v)
        adj[v].clear()
        if len(adj[w]) == 1 and w not in keep:
            leaves.append(w)
    return frozenset(edges)


def steiner_2approx(instance: Instance, required: Iterable[int]) -> frozenset[Edge]:
    """Metric-closure MST, expanded to shortest paths, re-spanned and pruned.

    The result costs at most twice an optimal Steiner tree on ``required``.
    """
    required = sorted(set(required))
    if not required:
        raise ValueError("required vertex set is empty")
    if len(required) == 1:
        return frozenset()
    trees = {r: shortest_path_tree(instance, r) for r in required}
    closure = [
        (trees[u][0][v], u, v) for i, u in enumerate(required) for v in required[i + 1 :]
    ]
    union: set[Edge] = set()
    for _, u, v in _kruskal(required, closure):
        path = path_to_root(trees[u][1], v)
        union.update(edge_key(a, b) for a, b in zip(path, path[1:]))
    touched = {x for e in union for x in e}
    span = _kruskal(touched, [(instance.cost(u, v), u, v) for u, v in union])
    return _prune_to({(u, v) for _, u, v in span}, set(required))


# --------------------------------------------------------------------------
# Single-source flow


@dataclass(frozen=True)
class SsfInstance:
    """Route every ``demands[w]`` to ``source``; priced by ``cost_fn`` if given,
    otherwise by the cable envelope."""

    instance: Instance
    source: int
    demands: Mapping[int, int]
    cost_fn: ConcaveCost | None = None
    cables: CableList | None = None

    def __post_init__(self):
        if self.source not in self.instance.vertices:
            raise ValueError(f"source {self.source} is not a vertex")
        for w, b in self.demands.items():
            if self.instance.demand(w) == 0:
                raise ValueError(f"demand key {w} is not a terminal")
            if int(b) != b or b <= 0:
                raise ValueError(f"demand at {w} must be a positive integer")
        if self.cost_fn is None and self.cables is None:
            raise ValueError("a cost function or a cable list is required")
        object.__setattr__(self, "demands", dict(sorted(self.demands.items())))

    def price(self, x: Fraction) -> Fraction:
        if self.cost_fn is not None:
            return eval_cost_fn(self.cost_fn, x)
        return self.cables.envelope(x)

    def cable_list(self) -> CableList:
        if self.cables is not None:
            return self.cables
        return prune_cables(segments_to_cables(self.cost_fn), PRUNE_RATIO)


@dataclass(frozen=True)
class FlowSolution:
    """Net flow on arcs ``(tail, head)``; at most one orientation per edge.

    ``cable_stages`` maps each support edge to the stages (cable indices) that
    installed capacity on it; ``cable_cost`` is the stage-wise cable price,
    which is never below ``total_cost`` (subadditivity of the envelope).
    """

    flow: Mapping[tuple[int, int], Fraction]
    total_cost: Fraction
    cable_stages: Mapping[Edge, tuple[int, ...]] = field(default_factory=dict)
    cable_cost: Fraction | None = None

    @property
    def support_edges(self) -> frozenset[Edge]:
        return frozenset(edge_key(u, v) for u, v in self.flow)

    def load(self, u: int, v: int) -> Fraction:
        return self.flow.get((u, v)) or self.flow.get((v, u)) or Fraction(0)


class _FlowBuilder:
    def __init__(self, instance: Instance):
        self.instance = instance
        self.net: dict[Edge, Fraction] = defaultdict(Fraction)
        self.stage_load: dict[int, dict[Edge, Fraction]] = defaultdict(lambda: defaultdict(Fraction))

    def send(self, path: list[int], amount, stage: int):
        for a, b in zip(path, path[1:]):
            key = edge_key(a, b)
            self.net[key] += amount if a < b else -amount
            self.stage_load[stage][key] += amount

    def finish(self, ssf: SsfInstance, cables: CableList | None) -> FlowSolution:
        flow = {}
        for (u, v), x in sorted(self.net.items()):
            if x > 0:
                flow[(u, v)] = x
            elif x < 0:
                flow[(v, u)] = -x
        total = sum(
            (self.instance.cost(u, v) * ssf.price(x) for (u, v), x in flow.items()), Fraction(0)
        )
        stages: dict[Edge, list[int]] = defaultdict(list)
        cable_cost = Fraction(0) if cables is not None else None
        for i in sorted(self.stage_load):
            for e, x in sorted(self.stage_load[i].items()):
                stages[e].append(i)
                if cables is not None:
                    cable_cost += self.instance.cost(*e) * cables[i].cost(x)
        return FlowSolution(
            flow, total, {e: tuple(s) for e, s in sorted(stages.items())}, cable_cost
        )


def _marked(rng: random.Random, probability: Fraction) -> bool:
    # one draw per point regardless of probability keeps seed streams aligned
    return Fraction(rng.random()) < probability


def _route_on_tree(builder, tree: frozenset[Edge], source: int, load: Mapping[int, Fraction], stage):
    if not tree:
        return
    order, parent = _rooted(_adjacency(tree), source)
    below = {v: Fraction(load.get(v, 0)) for v in order}
    for v in reversed(order[1:]):
        if below[v]:
            builder.send([v, parent[v]], below[v], stage)
        below[parent[v]] += below[v]


def _rent_to(builder, instance, hubs, points, stage) -> dict[int, Fraction]:
    """Send each point along a shortest path to its nearest hub.

    Returns the demand that arrived at every hub.
    """
    _, parent = shortest_paths_from(instance, hubs)
    arrived: dict[int, Fraction] = defaultdict(Fraction)
    for v, amount in sorted(points.items()):
        path = path_to_root(parent, v)
        builder.send(path, amount, stage)
        arrived[path[-1]] += amount
    return arrived


def _rent_or_buy_params(f: ConcaveCost) -> tuple[Fraction, Fraction]:
    segs = f.segments
    if len(segs) != 2 or segs[1][2] != 0:
        raise ValueError("rent-or-buy needs a cost function of the form min(mu*x, M)")
    return segs[0][2], segs[1][1]


def solve_ssrob(ssf: SsfInstance, rng_seed: int) -> FlowSolution:
    """Sample-augment for single-source rent-or-buy, ``f = min(mu x, M)``.

    Each terminal is sampled with probability ``min(1, mu b_w / M)``; a Steiner
    tree on the sample plus the source is bought, and everyone else rents a
    shortest path to the nearest bought vertex.
    """
    if ssf.cost_fn is None:
        raise ValueError("rent-or-buy needs a cost function")
    mu, big_m = _rent_or_buy_params(ssf.cost_fn)
    instance, source = ssf.instance, ssf.source
    rng = random.Random(rng_seed)
    builder = _FlowBuilder(instance)
    points = {w: Fraction(b) for w, b in ssf.demands.items() if w != source}
    sample = [w for w in points if _marked(rng, min(Fraction(1), mu * points[w] / big_m))]
    bought = steiner_2approx(instance, set(sample) | {source})
    bought_vertices = {x for e in bought for x in e} | {source}
    renters = {w: b for w, b in points.items() if w not in bought_vertices}
    at_tree: dict[int, Fraction] = defaultdict(Fraction)
    for w, b in points.items():
        if w in bought_vertices:
            at_tree[w] += b
    for v, b in _rent_to(builder, instance, bought_vertices, renters, 0).items():
        at_tree[v] += b
    _route_on_tree(builder, bought, source, at_tree, 1)
    cables = CableList(((0, mu), (big_m, 0)))
    return builder.finish(ssf, cables)


def _stage_probability(cables: CableList, i: int, demand: Fraction) -> Fraction:
    here, nxt = cables[i], cables[i + 1]
    p = demand * here.delta / (nxt.sigma - here.sigma + demand * nxt.delta)
    return min(Fraction(1), p)


def solve_ssbab(ssf: SsfInstance, rng_seed: int) -> FlowSolution:
    """Staged sample-augment over the cable list.

    Stage ``i`` samples the current aggregation points with a rent-vs-buy
    break-even probability for cables ``i`` and ``i + 1``; unsampled points
    travel to the nearest sampled point (or the source) and hand over their
    demand. Before the last stage a Steiner tree is built on the survivors
    and the source, the stragglers join it, and the final stage ships
    everything to the source along that tree. With one cable there is no
    sampling: every terminal takes a shortest path to the source.
    """
    cables = ssf.cable_list()
    instance, source = ssf.instance, ssf.source
    rng = random.Random(rng_seed)
    builder = _FlowBuilder(instance)
    points = {w: Fraction(b) for w, b in ssf.demands.items() if w != source}
    k = len(cables)
    if not points:
        return builder.finish(ssf, cables)
    if k == 1:
        _rent_to(builder, instance, [source], points, 0)
        return builder.finish(ssf, cables)
    tree: frozenset[Edge] = frozenset()
    for i in range(k - 1):
        sample = [v for v in points if _marked(rng, _stage_probability(cables, i, points[v]))]
        if i == k - 2:
            tree = steiner_2approx(instance, set(sample) | {source})
            hubs = {x for e in tree for x in e} | {source}
        else:
            hubs = set(sample) | {source}
        movers = {v: d for v, d in points.items() if v not in hubs}
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for v, d in points.items():
            if v in hubs:
                nxt[v] += d
        for v, d in _rent_to(builder, instance, hubs, movers, i).items():
            nxt[v] += d
        nxt.pop(source, None)
        points = dict(sorted(nxt.items()))
    _route_on_tree(builder, tree, source, points, k - 1)
    return builder.finish(ssf, cables)


def flow_imbalance(ssf: SsfInstance, solution: FlowSolution) -> dict[int, Fraction]:
    """Vertices whose net outflow differs from their required supply."""
    net: dict[int, Fraction] = defaultdict(Fraction)
    for (u, v), x in solution.flow.items():
        net[u] += x
        net[v] -= x
    want: dict[int, Fraction] = defaultdict(Fraction)
    for w, b in ssf.demands.items():
        if w != ssf.source:
            want[w] += b
            want[ssf.source] -= b
    return {
        v: net[v] - want[v] for v in sorted(set(net) | set(want)) if net[v] != want[v]
    }


# --------------------------------------------------------------------------
# Flow to tree


def _find_cycle(edges: Iterable[Edge]) -> list[int] | None:
    """Vertices of some cycle (closing edge implied), or ``None`` if a forest."""
    parent: dict[int, int] = {}
    adj: dict[int, list[int]] = defaultdict(list)

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in sorted(edges):
        if find(u) == find(v):
            _, up = _rooted(adj, u)
            path = [v]
            while path[-1] != u:
                path.append(up[path[-1]])
            return path
        parent[find(u)] = find(v)
        adj[u].append(v)
        adj[v].append(u)
    return None


def cancel_cycles(instance: Instance, flow: Mapping[tuple[int, int], Fraction], f: ConcaveCost):
    """Push flow around support cycles until the support is a forest.

    Along a cycle the cost is concave in the pushed amount as long as no edge
    changes direction, so one of the two extreme pushes (each zeroing an edge)
    is no more expensive than the current flow. Returns a new arc-flow dict.
    """
    net: dict[Edge, Fraction] = {}
    for (u, v), x in flow.items():
        net[edge_key(u, v)] = x if u < v else -x
    while True:
        cycle = _find_cycle(net)
        if cycle is None:
            break
        arcs = list(zip(cycle, cycle[1:] + cycle[:1]))
        orient = [(edge_key(a, b), 1 if a < b else -1) for a, b in arcs]
        hi = min((abs(net[e]) for e, o in orient if net[e] * o < 0), default=None)
        lo = min((abs(net[e]) for e, o in orient if net[e] * o > 0), default=None)

        def cost_at(t):
            return sum(instance.cost(*e) * eval_cost_fn(f, abs(net[e] + o * t)) for e, o in orient)

        options = [t for t in (hi, None if lo is None else -lo) if t is not None]
        t = min(options, key=cost_at)
        for e, o in orient:
            net[e] += o * t
        for e in [e for e, _ in orient if net[e] == 0]:
            del net[e]
    out = {}
    for (u, v), x in sorted(net.items()):
        out[(u, v) if x > 0 else (v, u)] = abs(x)
    return out


def flow_to_trees(ssf: SsfInstance, solution: FlowSolution, f: ConcaveCost) -> list[TreeSolution]:
    """Candidate trees from a flow: the cycle-cancelled support, and the
    shortest-path tree of the source inside the original support."""
    instance, source = ssf.instance, ssf.source
    if not solution.flow:
        return [TreeSolution.from_edges(instance, ())]
    cancelled = cancel_cycles(instance, solution.flow, f)
    out = [TreeSolution.from_edges(instance, {edge_key(u, v) for u, v in cancelled})]
    _, parent = shortest_paths_from(instance, [source], within=set(solution.support_edges))
    spt = set()
    for w in ssf.demands:
        path = path_to_root(parent, w)
        spt.update(edge_key(a, b) for a, b in zip(path, path[1:]))
    out.append(TreeSolution.from_edges(instance, spt))
    return out


def derive_seed(rng_seed: int, source: int, repetition: int) -> int:
    digest = hashlib.sha256(f"{rng_seed}:{source}:{repetition}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def solve_cvpnd(
    instance: Instance,
    f: ConcaveCost,
    rng_seed: int = 0,
    repetitions: int = DEFAULT_REPETITIONS,
) -> tuple[Fraction, TreeSolution]:
    """Best tree over every terminal as source and ``repetitions`` seeds each.

    Ties are broken by ``(value, source, repetition)``, so the result does not
    depend on evaluation order.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    cables = prune_cables(segments_to_cables(f), PRUNE_RATIO)
    best = None
    for r in instance.terminals:
        demands = {w: b for w, b in instance.demands.items() if w != r}
        ssf = SsfInstance(instance, r, demands, cost_fn=f, cables=cables)
        for rep in range(repetitions):
            flow = solve_ssbab(ssf, derive_seed(rng_seed, r, rep))
            for tree in flow_to_trees(ssf, flow, f):
                value = tree_cost(instance, tree, f)
                if best is None or value < best[0]:
                    best = (value, tree)
    return best
