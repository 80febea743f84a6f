"""Problem instances, concave cost functions and the line-oriented file format.

All numbers are exact: costs and capacities are :class:`fractions.Fraction`,
demands are ints. Vertices are numbered ``1..n``; an edge is stored as the
sorted pair ``(u, v)`` with ``u < v``.
"""

from __future__ import annotations

import heapq
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Edge = tuple[int, int]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")
_INT_RE = re.compile(r"^[+-]?\d+$")


class InstanceFormatError(ValueError):
    """Syntax error in an instance or cost-function file."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InvalidInstanceError(ValueError):
    """The parsed data violates an instance invariant."""


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def parse_rational(text: str) -> Fraction:
    """Parse ``p``, ``-p`` or ``p/q``; decimals and whitespace are rejected."""
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational: {text!r}")
    return Fraction(text)


def format_rational(x: Fraction | int) -> str:
    return str(Fraction(x))


# --------------------------------------------------------------------------
# Concave cost functions


@dataclass(frozen=True)
class ConcaveCost:
    """Non-decreasing concave piecewise-linear function with ``f(0) = 0``.

    ``breakpoints`` starts at ``(0, 0)``; beyond the last breakpoint the
    function continues with ``final_slope``. Collinear breakpoints are merged
    on construction, so two functions are equal iff their canonical forms are.
    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    final_slope: Fraction

    def __post_init__(self):
        pts = tuple((Fraction(x), Fraction(y)) for x, y in self.breakpoints)
        slope = Fraction(self.final_slope)
        if not pts or pts[0] != (0, 0):
            raise ValueError("first breakpoint must be (0, 0)")
        if slope < 0:
            raise ValueError("final slope must be nonnegative")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise ValueError("breakpoint x-coordinates must strictly increase")
            if y1 < y0:
                raise ValueError("cost function must be non-decreasing")
        slopes = [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(pts, pts[1:])]
        slopes.append(slope)
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 > s0:
                raise ValueError("cost function must be concave")
        # drop interior breakpoints where the slope does not change
        keep = [pts[0]]
        for i in range(1, len(pts)):
            if slopes[i] != slopes[i - 1]:
                keep.append(pts[i])
        object.__setattr__(self, "breakpoints", tuple(keep))
        object.__setattr__(self, "final_slope", slope)

    @classmethod
    def linear(cls, slope: Fraction | int = 1) -> ConcaveCost:
        return cls(((Fraction(0), Fraction(0)),), Fraction(slope))

    @classmethod
    def rent_or_buy(cls, mu: Fraction | int, big_m: Fraction | int) -> ConcaveCost:
        """``min(mu * x, M)``."""
        mu, big_m = Fraction(mu), Fraction(big_m)
        if mu <= 0 or big_m <= 0:
            raise ValueError("rent-or-buy needs mu > 0 and M > 0")
        return cls(((Fraction(0), Fraction(0)), (big_m / mu, big_m)), Fraction(0))

    @property
    def segments(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        """``(x_start, y_start, slope)`` for every piece, final ray included."""
        pts = self.breakpoints
        out = []
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            out.append((x0, y0, (y1 - y0) / (x1 - x0)))
        out.append((pts[-1][0], pts[-1][1], self.final_slope))
        return out

    def __call__(self, x: Fraction | int) -> Fraction:
        return eval_cost_fn(self, x)


def eval_cost_fn(f: ConcaveCost, x: Fraction | int) -> Fraction:
    x = Fraction(x)
    if x < 0:
        raise ValueError(f"cost function evaluated at negative capacity {x}")
    pts = f.breakpoints
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    lx, ly = pts[-1]
    return ly + f.final_slope * (x - lx)


IDENTITY = ConcaveCost.linear(1)


# --------------------------------------------------------------------------
# Instances


@dataclass(frozen=True)
class Instance:
    """Connected simple undirected graph with edge costs and integer demands.

    ``cost_fn`` is the optional cost-function block carried in the same file.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, Fraction], ...]
    demands: Mapping[int, int]
    cost_fn: ConcaveCost | None = None
    _cost: dict = field(init=False, repr=False, compare=False)
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.vertex_count
        if n < 1:
            raise InvalidInstanceError("vertex count must be positive")
        cost: dict[Edge, Fraction] = {}
        adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
        for u, v, c in self.edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise InvalidInstanceError(f"edge ({u},{v}) references unknown vertex")
            if u == v:
                raise InvalidInstanceError(f"loop edge at vertex {u}")
            c = Fraction(c)
            if c < 0:
                raise InvalidInstanceError(f"negative cost on edge ({u},{v})")
            key = edge_key(u, v)
            if key in cost:
                raise InvalidInstanceError(f"parallel edge ({key[0]},{key[1]})")
            cost[key] = c
            adj[u].append(v)
            adj[v].append(u)
        demands = {}
        for v, b in self.demands.items():
            if not 1 <= v <= n:
                raise InvalidInstanceError(f"demand on unknown vertex {v}")
            if int(b) != b or b < 0:
                raise InvalidInstanceError(f"demand at vertex {v} must be a nonnegative integer")
            if b > 0:
                demands[v] = int(b)
        if not demands:
            raise InvalidInstanceError("no terminal (all demands are zero)")
        if len(_reachable(adj, 1)) != n:
            raise InvalidInstanceError("graph not connected")
        for nbrs in adj.values():
            nbrs.sort()
        object.__setattr__(self, "edges", tuple(sorted((*k, c) for k, c in cost.items())))
        object.__setattr__(self, "demands", dict(sorted(demands.items())))
        object.__setattr__(self, "_cost", cost)
        object.__setattr__(self, "_adj", adj)

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    @property
    def terminals(self) -> list[int]:
        return list(self.demands)

    def demand(self, v: int) -> int:
        return self.demands.get(v, 0)

    def cost(self, u: int, v: int) -> Fraction:
        return self._cost[edge_key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._cost

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    @property
    def edge_set(self) -> list[Edge]:
        return [(u, v) for u, v, _ in self.edges]

    def with_costs_scaled(self, factor: Fraction) -> Instance:
        return Instance(
            self.vertex_count,
            tuple((u, v, c * factor) for u, v, c in self.edges),
            self.demands,
            self.cost_fn,
        )


def _reachable(adj: Mapping[int, Iterable[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


# --------------------------------------------------------------------------
# File format


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _rat(lineno: int, tok: str) -> Fraction:
    try:
        return parse_rational(tok)
    except ValueError as exc:
        raise InstanceFormatError(lineno, str(exc)) from None


def _int(lineno: int, tok: str) -> int:
    if not _INT_RE.match(tok):
        raise InstanceFormatError(lineno, f"not an integer: {tok!r}")
    return int(tok)


def _parse_costfn_block(lineno, parts, lines) -> ConcaveCost:
    if len(parts) != 2:
        raise InstanceFormatError(lineno, "expected 'costfn K'")
    k = _int(lineno, parts[1])
    if k < 1:
        raise InstanceFormatError(lineno, "costfn needs at least one breakpoint")
    pts = []
    for _ in range(k):
        try:
            lineno, parts = next(lines)
        except StopIteration:
            raise InstanceFormatError(lineno, "unexpected end of costfn block") from None
        if parts[0] != "bp" or len(parts) != 3:
            raise InstanceFormatError(lineno, "expected 'bp X Y'")
        pts.append((_rat(lineno, parts[1]), _rat(lineno, parts[2])))
    try:
        lineno, parts = next(lines)
    except StopIteration:
        raise InstanceFormatError(lineno, "missing 'slope S' after breakpoints") from None
    if parts[0] != "slope" or len(parts) != 2:
        raise InstanceFormatError(lineno, "expected 'slope S'")
    try:
        return ConcaveCost(tuple(pts), _rat(lineno, parts[1]))
    except ValueError as exc:
        raise InstanceFormatError(lineno, str(exc)) from None


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance file (optionally with a costfn block)."""
    lines = _tokens(text)
    try:
        lineno, parts = next(lines)
    except StopIteration:
        raise InstanceFormatError(1, "empty file") from None
    if parts != ["vpnd", "1"]:
        raise InstanceFormatError(lineno, "expected header 'vpnd 1'")
    n = None
    edges = []
    demands: dict[int, int] = {}
    cost_fn = None
    for lineno, parts in lines:
        kw = parts[0]
        if kw == "vertices":
            if n is not None or len(parts) != 2:
                raise InstanceFormatError(lineno, "expected a single 'vertices N' line")
            n = _int(lineno, parts[1])
        elif kw == "edge":
            if len(parts) != 4:
                raise InstanceFormatError(lineno, "expected 'edge U V COST'")
            edges.append((_int(lineno, parts[1]), _int(lineno, parts[2]), _rat(lineno, parts[3])))
        elif kw == "demand":
            if len(parts) != 3:
                raise InstanceFormatError(lineno, "expected 'demand V B'")
            v = _int(lineno, parts[1])
            if v in demands:
                raise InstanceFormatError(lineno, f"duplicate demand for vertex {v}")
            demands[v] = _int(lineno, parts[2])
        elif kw == "costfn":
            if cost_fn is not None:
                raise InstanceFormatError(lineno, "duplicate costfn block")
            cost_fn = _parse_costfn_block(lineno, parts, lines)
        else:
            raise InstanceFormatError(lineno, f"unknown keyword {kw!r}")
    if n is None:
        raise InstanceFormatError(lineno, "missing 'vertices N' line")
    return Instance(n, tuple(edges), demands, cost_fn)


def parse_cost_fn(text: str) -> ConcaveCost:
    """Read the costfn block from a standalone file or a full instance file."""
    lines = _tokens(text)
    for lineno, parts in lines:
        if parts[0] == "costfn":
            return _parse_costfn_block(lineno, parts, lines)
    raise InstanceFormatError(1, "no costfn block found")


def serialize_cost_fn(f: ConcaveCost) -> str:
    out = [f"costfn {len(f.breakpoints)}"]
    out += [f"bp {format_rational(x)} {format_rational(y)}" for x, y in f.breakpoints]
    out.append(f"slope {format_rational(f.final_slope)}")
    return "\n".join(out) + "\n"


def serialize_instance(instance: Instance) -> str:
    out = ["vpnd 1", f"vertices {instance.vertex_count}"]
    out += [f"edge {u} {v} {format_rational(c)}" for u, v, c in instance.edges]
    out += [f"demand {v} {b}" for v, b in instance.demands.items()]
    text = "\n".join(out) + "\n"
    if instance.cost_fn is not None:
        text += serialize_cost_fn(instance.cost_fn)
    return text


# --------------------------------------------------------------------------
# Shortest paths


def shortest_paths_from(
    instance: Instance, roots: Iterable[int], within: set[Edge] | None = None
) -> tuple[dict[int, Fraction], dict[int, int]]:
    """Multi-root Dijkstra: distance to the nearest root and a parent forest.

    Each non-root vertex's parent is the smallest-id neighbour that lies on a
    shortest path and was settled before it; with zero-cost edges this keeps
    the parent pointers acyclic. ``within`` restricts the search to a subset
    of edges; unreachable vertices are then absent from the result.
    """
    if within is None:
        neighbors = instance.neighbors
    else:
        adj: dict[int, list[int]] = {}
        for u, v in sorted(within):
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)

        def neighbors(v):
            return adj.get(v, [])

    roots = sorted(set(roots))
    dist: dict[int, Fraction] = {r: Fraction(0) for r in roots}
    heap = [(Fraction(0), r) for r in roots]
    order: dict[int, int] = {}
    while heap:
        d, u = heapq.heappop(heap)
        if u in order or d != dist[u]:
            continue
        order[u] = len(order)
        for w in neighbors(u):
            nd = d + instance.cost(u, w)
            if w not in order and (w not in dist or nd < dist[w]):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    root_set = set(roots)
    parent: dict[int, int] = {}
    for v in dist:
        if v in root_set:
            continue
        parent[v] = min(
            u
            for u in neighbors(v)
            if u in order and order[u] < order[v] and dist[u] + instance.cost(u, v) == dist[v]
        )
    return dist, parent


def shortest_path_tree(instance: Instance, root: int) -> tuple[dict[int, Fraction], dict[int, int]]:
    if root not in instance.vertices:
        raise ValueError(f"root {root} is not a vertex")
    return shortest_paths_from(instance, [root])


def path_to_root(parent: Mapping[int, int], v: int) -> list[int]:
    """Vertices from ``v`` up the parent pointers to a root, inclusive."""
    path = [v]
    while path[-1] in parent:
        path.append(parent[path[-1]])
    return path
