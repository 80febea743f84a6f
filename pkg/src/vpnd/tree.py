"""Tree solutions: min-side capacities, costs, the weighted median, and paths."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .instance import (
    ConcaveCost,
    Edge,
    Instance,
    InstanceFormatError,
    _int,
    _rat,
    _tokens,
    edge_key,
    eval_cost_fn,
    format_rational,
)


class NotATreeError(ValueError):
    pass


def _adjacency(edges: Iterable[Edge]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    for nbrs in adj.values():
        nbrs.sort()
    return adj


def _check_tree(instance: Instance, tree_edges: Iterable[Edge]) -> tuple[frozenset[Edge], dict]:
    edges = frozenset(edge_key(u, v) for u, v in tree_edges)
    for u, v in edges:
        if not instance.has_edge(u, v):
            raise NotATreeError(f"({u},{v}) is not an edge of the graph")
    terminals = instance.terminals
    if not edges:
        if len(terminals) > 1:
            raise NotATreeError("empty tree cannot connect several terminals")
        return edges, {}
    adj = _adjacency(edges)
    start = min(adj)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(adj):
        raise NotATreeError("edge set is not connected")
    if len(edges) != len(adj) - 1:
        raise NotATreeError("edge set contains a cycle")
    missing = [w for w in terminals if w not in adj]
    if missing:
        raise NotATreeError(f"tree misses terminal {missing[0]}")
    return edges, adj


def _rooted(adj: Mapping[int, list[int]], root: int) -> tuple[list[int], dict[int, int]]:
    """Preorder and parent map of a tree rooted at ``root``."""
    order = [root]
    parent = {root: root}
    for u in order:
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
    return order, parent


def prune_tree(instance: Instance, tree_edges: Iterable[Edge]) -> frozenset[Edge]:
    """Strip non-terminal leaves repeatedly."""
    edges = {edge_key(u, v) for u, v in tree_edges}
    adj = {u: set(ws) for u, ws in _adjacency(edges).items()}
    leaves = [v for v, ws in adj.items() if len(ws) == 1 and instance.demand(v) == 0]
    while leaves:
        v = leaves.pop()
        if len(adj[v]) != 1:
            continue
        (w,) = adj[v]
        edges.discard(edge_key(v, w))
        adj[w].discard(v)
        adj[v].clear()
        if len(adj[w]) == 1 and instance.demand(w) == 0:
            leaves.append(w)
    return frozenset(edges)


def tree_capacities(instance: Instance, tree_edges: Iterable[Edge]) -> dict[Edge, Fraction]:
    """Worst-case load of tree routing on each tree edge.

    For the edge ``e`` splitting the tree into sides ``A`` and ``B`` this is
    ``min(b(A), b(B))``.
    """
    edges, adj = _check_tree(instance, tree_edges)
    if not edges:
        return {}
    total = sum(instance.demands.values())
    root = min(adj)
    order, parent = _rooted(adj, root)
    below = {v: instance.demand(v) for v in order}
    for v in reversed(order[1:]):
        below[parent[v]] += below[v]
    caps = {}
    for v in order[1:]:
        caps[edge_key(v, parent[v])] = Fraction(min(below[v], total - below[v]))
    return dict(sorted(caps.items()))


@dataclass(frozen=True)
class TreeSolution:
    """A pruned tree containing all terminals, with min-side capacities."""

    instance: Instance
    tree_edges: frozenset[Edge]
    capacities: Mapping[Edge, Fraction]

    @classmethod
    def from_edges(cls, instance: Instance, tree_edges: Iterable[Edge]) -> TreeSolution:
        edges = frozenset(edge_key(u, v) for u, v in tree_edges)
        _check_tree(instance, edges)
        pruned = prune_tree(instance, edges)
        return cls(instance, pruned, tree_capacities(instance, pruned))

    def capacity(self, u: int, v: int) -> Fraction:
        return self.capacities.get(edge_key(u, v), Fraction(0))

    @property
    def sorted_edges(self) -> list[Edge]:
        return sorted(self.tree_edges)


def tree_cost(instance: Instance, tree: TreeSolution, f: ConcaveCost) -> Fraction:
    return sum(
        (instance.cost(u, v) * eval_cost_fn(f, cap) for (u, v), cap in tree.capacities.items()),
        Fraction(0),
    )


def tree_median_value(instance: Instance, tree_edges: Iterable[Edge]) -> tuple[Fraction, int]:
    """``min_r sum_w b_w dist_T(w, r)`` over tree vertices ``r``, with the argmin."""
    edges, adj = _check_tree(instance, tree_edges)
    if not edges:
        return Fraction(0), instance.terminals[0]
    best = None
    for r in sorted(adj):
        dist = {r: Fraction(0)}
        stack = [r]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + instance.cost(u, w)
                    stack.append(w)
        value = sum((b * dist[w] for w, b in instance.demands.items()), Fraction(0))
        if best is None or value < best[0]:
            best = (value, r)
    return best


@dataclass(frozen=True)
class Routing:
    """One simple path per unordered terminal pair plus installed capacities."""

    instance: Instance
    paths: Mapping[tuple[int, int], tuple[int, ...]]
    capacities: Mapping[Edge, Fraction]

    def __post_init__(self):
        terms = self.instance.terminals
        expected = set(combinations(terms, 2))
        if set(self.paths) != expected:
            raise ValueError("routing must have exactly one path per terminal pair")
        for (u, v), path in self.paths.items():
            if path[0] != u or path[-1] != v:
                raise ValueError(f"path for {{{u},{v}}} has wrong endpoints")
            if len(set(path)) != len(path):
                raise ValueError(f"path for {{{u},{v}}} is not simple")
            for a, b in zip(path, path[1:]):
                if not self.instance.has_edge(a, b):
                    raise ValueError(f"path for {{{u},{v}}} uses non-edge ({a},{b})")

    def pairs_through(self, e: Edge) -> list[tuple[int, int]]:
        e = edge_key(*e)
        return [
            pair
            for pair, path in self.paths.items()
            if any(edge_key(a, b) == e for a, b in zip(path, path[1:]))
        ]

    def capacity(self, u: int, v: int) -> Fraction:
        return Fraction(self.capacities.get(edge_key(u, v), 0))


def extract_paths(tree: TreeSolution) -> Routing:
    adj = _adjacency(tree.tree_edges)
    return Routing(tree.instance, _tree_paths(tree.instance, adj), dict(tree.capacities))


def _tree_paths(instance: Instance, adj) -> dict[tuple[int, int], tuple[int, ...]]:
    paths = {}
    for u, v in combinations(instance.terminals, 2):
        _, parent = _rooted(adj, u)
        path = [v]
        while path[-1] != u:
            path.append(parent[path[-1]])
        paths[(u, v)] = tuple(reversed(path))
    return paths


def serialize_tree(tree: TreeSolution, f: ConcaveCost) -> str:
    lines = [
        f"tree-edge {u} {v} {format_rational(tree.capacities[(u, v)])}" for u, v in tree.sorted_edges
    ]
    lines.append(f"cost {format_rational(tree_cost(tree.instance, tree, f))}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> tuple[dict[Edge, Fraction], Fraction | None]:
    """Read ``tree-edge`` lines and the optional ``cost`` line.

    Capacities are returned as written, so hand-edited files can be verified.
    """
    caps: dict[Edge, Fraction] = {}
    cost = None
    for lineno, parts in _tokens(text):
        if parts[0] == "tree-edge" and len(parts) == 4:
            key = edge_key(_int(lineno, parts[1]), _int(lineno, parts[2]))
            if key in caps:
                raise InstanceFormatError(lineno, f"duplicate tree edge {key}")
            caps[key] = _rat(lineno, parts[3])
        elif parts[0] == "cost" and len(parts) == 2:
            cost = _rat(lineno, parts[1])
        else:
            raise InstanceFormatError(lineno, "expected 'tree-edge U V CAP' or 'cost VALUE'")
    return caps, cost


def routing_from_tree_file(instance: Instance, text: str) -> Routing:
    """Tree paths from a tree file, keeping the file's capacities verbatim."""
    caps, _ = parse_tree(text)
    _, adj = _check_tree(instance, caps)
    return Routing(instance, _tree_paths(instance, adj), caps)
