from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import strategies as st

from vpnd.instance import ConcaveCost, Instance

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def star3():
    # center 1, unit-demand leaves 2, 3, 4
    return Instance(4, ((1, 2, 1), (1, 3, 1), (1, 4, 1)), {2: 1, 3: 1, 4: 1})


@pytest.fixture
def path_tmt():
    # t1 - m - t2
    return Instance(3, ((1, 2, 1), (2, 3, 1)), {1: 1, 3: 1})


@pytest.fixture
def triangle():
    return Instance(3, ((1, 2, 1), (2, 3, 1), (1, 3, 1)), {1: 1, 2: 1, 3: 1})


# -- independent brute-force references used across test modules ------------


def brute_force_distances(instance, root):
    """Cheapest simple path from ``root`` to every vertex, by permutation search."""
    others = [v for v in instance.vertices if v != root]
    best = {root: Fraction(0)}
    for k in range(1, len(others) + 1):
        for seq in permutations(others, k):
            walk = (root,) + seq
            if all(instance.has_edge(a, b) for a, b in zip(walk, walk[1:])):
                c = sum(instance.cost(a, b) for a, b in zip(walk, walk[1:]))
                if walk[-1] not in best or c < best[walk[-1]]:
                    best[walk[-1]] = c
    return best


def bellman_ford(instance, root):
    dist = {v: None for v in instance.vertices}
    dist[root] = Fraction(0)
    for _ in range(instance.vertex_count):
        for u, v, c in instance.edges:
            for a, b in ((u, v), (v, u)):
                if dist[a] is not None and (dist[b] is None or dist[a] + c < dist[b]):
                    dist[b] = dist[a] + c
    return dist


def lp_max_load(instance, pairs):
    """Worst-case load by linear programming (floating point, scipy)."""
    from scipy.optimize import linprog

    pairs = list(pairs)
    if not pairs:
        return 0.0
    terms = instance.terminals
    a_ub = [[1.0 if w in p else 0.0 for p in pairs] for w in terms]
    b_ub = [float(instance.demand(w)) for w in terms]
    res = linprog([-1.0] * len(pairs), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    assert res.status == 0
    return -res.fun


def prim_mst_cost(instance):
    inside = {1}
    total = Fraction(0)
    while len(inside) < instance.vertex_count:
        c, v = min(
            (instance.cost(u, w), w) for u in inside for w in instance.neighbors(u) if w not in inside
        )
        inside.add(v)
        total += c
    return total


@st.composite
def concave_functions(draw):
    k = draw(st.integers(0, 6))
    slopes = sorted(
        draw(st.lists(st.fractions(0, 10, max_denominator=6), min_size=k + 1, max_size=k + 1, unique=True)),
        reverse=True,
    )
    pts = [(Fraction(0), Fraction(0))]
    for s in slopes[:-1]:
        dx = draw(st.fractions(Fraction(1, 6), 5, max_denominator=6))
        x, y = pts[-1]
        pts.append((x + dx, y + s * dx))
    return ConcaveCost(tuple(pts), slopes[-1])
