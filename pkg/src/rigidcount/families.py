"""Constructors for the graph families used in tests, examples and the CLI."""

from __future__ import annotations

import random

from .graph import Graph


def complete(n: int) -> Graph:
    return Graph.complete(n)


def triangle() -> Graph:
    return Graph.complete(3)


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def prism() -> Graph:
    """Triangles 012 and 345 joined by the matching 0-3, 1-4, 2-5."""
    return prism_tower(2)


def prism_tower(levels: int) -> Graph:
    """``levels`` triangles stacked, consecutive ones joined by a perfect matching."""
    if levels < 1:
        raise ValueError("need at least one level")
    edges = []
    for k in range(levels):
        a, b, c = 3 * k, 3 * k + 1, 3 * k + 2
        edges += [(a, b), (b, c), (a, c)]
        if k:
            edges += [(a - 3, a), (b - 3, b), (c - 3, c)]
    return Graph.from_edges(3 * levels, edges)


def degree2_chain(k: int) -> Graph:
    """K3 on 0, 1, 2 followed by k vertices, vertex j joined to j-1 and j-2."""
    n = 3 + k
    edges = [(0, 1), (0, 2), (1, 2)] + [(j - 2, j) for j in range(3, n)] + [(j - 1, j) for j in range(3, n)]
    return Graph.from_edges(n, edges)


def double_k4() -> Graph:
    """Two copies of K4 sharing the vertices 0 and 1, with the edge 01 removed."""
    edges = [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (0, 5), (1, 4), (1, 5), (4, 5)]
    return Graph.from_edges(6, edges)


def wheel(rim: int) -> Graph:
    """Hub 0 joined to every vertex of a rim cycle 1..rim."""
    if rim < 3:
        raise ValueError("a wheel needs a rim of at least three vertices")
    edges = [(0, i) for i in range(1, rim + 1)]
    edges += [(i, i % rim + 1) for i in range(1, rim + 1)]
    return Graph.from_edges(rim + 1, edges)


def qs_glue(g1: Graph, g2: Graph, u1: int, v1: int, edge2: tuple[int, int]) -> Graph:
    """Identify u1, v1 of ``g1`` with the ends of ``edge2`` in ``g2`` minus that edge."""
    u2, v2 = edge2
    if not g2.has_edge(u2, v2):
        raise ValueError("edge2 must be an edge of g2")
    if u1 == v1:
        raise ValueError("u1 and v1 must differ")
    index = {u2: u1, v2: v1}
    nxt = g1.n
    for x in range(g2.n):
        if x not in index:
            index[x] = nxt
            nxt += 1
    edges = list(g1.edges)
    for a, b in g2.edges:
        if {a, b} == {u2, v2}:
            continue
        edges.append((index[a], index[b]))
    edges = sorted({(min(a, b), max(a, b)) for a, b in edges})
    return Graph.from_edges(nxt, edges)


def random_qs_graph(n: int, rng: random.Random) -> Graph:
    """A member of the gluing family on exactly n vertices, built from K3 pieces."""
    if n < 3:
        raise ValueError("the gluing family starts at K3")

    def build(k: int) -> Graph:
        if k == 3:
            return triangle()
        # gluing G1 (k1 vertices) with G2 - e (k2 vertices) gives k1 + k2 - 2
        k1 = rng.randint(3, k - 1)
        k2 = k - k1 + 2
        g1, g2 = build(k1), build(k2)
        u1, v1 = rng.sample(range(g1.n), 2)
        e2 = rng.choice(g2.edges)
        return qs_glue(g1, g2, u1, v1, e2)

    return build(n)


def henneberg_type2(g: Graph, edge: tuple[int, int], third: int) -> Graph:
    """Delete ``edge`` and add a new vertex joined to its ends and to ``third``."""
    u, v = edge
    if not g.has_edge(u, v) or third in (u, v):
        raise ValueError("need an existing edge and a third vertex off it")
    w = g.n
    return Graph.from_edges(g.n + 1, [e for e in g.edges if e != (min(u, v), max(u, v))] + [(u, w), (v, w), (third, w)])


def random_globally_rigid(n: int, rng: random.Random, extra: int = 2) -> Graph:
    """Random 3-connected redundantly rigid graph by rejection sampling; n >= 4."""
    from .rigidity import is_globally_rigid

    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    m_lo = min(2 * n - 2, len(pairs))
    while True:
        m = rng.randint(m_lo, min(m_lo + extra, len(pairs)))
        g = Graph.from_edges(n, rng.sample(pairs, m))
        if is_globally_rigid(g):
            return g
