"""Seeded instance generators."""

from __future__ import annotations

import random
from fractions import Fraction

from .instance import Instance, InvalidInstanceError

KINDS = ("random-connected", "grid", "star", "path")


def star(k: int, cost=1, demand: int = 1) -> Instance:
    """Center 1 with leaves 2..k+1, each leaf a terminal."""
    if k < 1:
        raise ValueError("star needs at least one leaf")
    edges = tuple((1, leaf, Fraction(cost)) for leaf in range(2, k + 2))
    return Instance(k + 1, edges, {leaf: demand for leaf in range(2, k + 2)})


def path(n: int, cost=1, demand: int = 1) -> Instance:
    """Path 1-2-...-n with the two endpoints as terminals."""
    if n < 2:
        raise ValueError("path needs at least two vertices")
    edges = tuple((i, i + 1, Fraction(cost)) for i in range(1, n))
    return Instance(n, edges, {1: demand, n: demand})


def grid(rows: int, cols: int, cost=1, demand: int = 1) -> Instance:
    """Grid graph, row-major ids, the four corners as terminals."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least two vertices")

    def vid(r, c):
        return r * cols + c + 1

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1), Fraction(cost)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c), Fraction(cost)))
    corners = {vid(0, 0), vid(0, cols - 1), vid(rows - 1, 0), vid(rows - 1, cols - 1)}
    return Instance(rows * cols, tuple(edges), {v: demand for v in corners})


def random_connected(
    n: int,
    p: float,
    seed: int,
    cmax: int = 5,
    bmax: int = 3,
    max_tries: int = 1000,
) -> Instance:
    """G(n, p) with integer costs in [1, cmax] and demands in [0, bmax].

    Redraws the whole instance until it is connected and has a terminal.
    """
    if n < 1 or not 0 <= p <= 1 or cmax < 1 or bmax < 1:
        raise ValueError("need n >= 1, 0 <= p <= 1, cmax >= 1, bmax >= 1")
    rng = random.Random(seed)
    for _ in range(max_tries):
        edges = []
        for u in range(1, n + 1):
            for v in range(u + 1, n + 1):
                if rng.random() < p:
                    edges.append((u, v, Fraction(rng.randint(1, cmax))))
        demands = {v: rng.randint(0, bmax) for v in range(1, n + 1)}
        try:
            return Instance(n, tuple(edges), demands)
        except InvalidInstanceError:
            continue
    raise ValueError(f"no connected instance with a terminal after {max_tries} tries (n={n}, p={p})")


def random_tree(n: int, seed: int, bmax: int = 5, cost_denominator: int = 4) -> Instance:
    """Random labelled tree with positive rational costs and demands in [0, bmax]."""
    rng = random.Random(seed)
    edges = []
    for v in range(2, n + 1):
        u = rng.randint(1, v - 1)
        c = Fraction(rng.randint(1, 5 * cost_denominator), rng.randint(1, cost_denominator))
        edges.append((u, v, c))
    demands = {v: rng.randint(0, bmax) for v in range(1, n + 1)}
    if not any(demands.values()):
        demands[rng.randint(1, n)] = rng.randint(1, bmax)
    return Instance(n, tuple(edges), demands)
