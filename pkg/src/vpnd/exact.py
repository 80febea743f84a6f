"""Exact solver for linear-cost VPND.

Some optimal solution is a tree, and a tree's linear cost equals its weighted
1-median objective, so the optimum is ``min_r sum_w b_w dist(w, r)`` over all
vertices ``r``, attained by the shortest-path tree of the best root.
"""

from __future__ import annotations

from fractions import Fraction

from .instance import Instance, edge_key, path_to_root, shortest_path_tree
from .tree import TreeSolution


def root_value(instance: Instance, root: int) -> tuple[Fraction, dict[int, int]]:
    dist, parent = shortest_path_tree(instance, root)
    value = sum((b * dist[w] for w, b in instance.demands.items()), Fraction(0))
    return value, parent


def solve_exact_linear(instance: Instance) -> tuple[Fraction, int, TreeSolution]:
    """Return ``(value, root, solution)``; ties on the root go to the smallest id.

    ``value`` is the optimum certificate. The returned tree carries min-side
    capacities, so its own linear cost may only be lower (it never is when
    the value is optimal, which is the tree-routing guarantee).
    """
    best = None
    for r in instance.vertices:
        value, parent = root_value(instance, r)
        if best is None or value < best[0]:
            best = (value, r, parent)
    value, root, parent = best
    edges = set()
    for w in instance.terminals:
        path = path_to_root(parent, w)
        edges.update(edge_key(a, b) for a, b in zip(path, path[1:]))
    return value, root, TreeSolution.from_edges(instance, edges)
