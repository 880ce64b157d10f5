import functools
import random

import networkx as nx
import numpy as np
import pytest

from rigidcount.graph import Graph
from rigidcount.rigidity import is_rigid

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def atlas_graphs(max_n: int = 7, min_n: int = 1) -> tuple[Graph, ...]:
    """Every graph on min_n..max_n vertices (up to isomorphism), from the networkx atlas."""
    out = []
    for G in nx.graph_atlas_g():
        n = G.number_of_nodes()
        if min_n <= n <= max_n:
            out.append(Graph.from_edges(n, list(G.edges())))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def rigid_atlas_graphs(max_n: int = 7) -> tuple[Graph, ...]:
    return tuple(g for g in atlas_graphs(max_n, 2) if is_rigid(g))


def numeric_rank_oracle(n: int, edges, seed: int = 0) -> int:
    """Rank of the rigidity matrix at a random real realization."""
    if not edges:
        return 0
    rng = np.random.default_rng(seed)
    p = rng.standard_normal((n, 2))
    rows = np.zeros((len(edges), 2 * n))
    for i, (u, v) in enumerate(edges):
        d = p[u] - p[v]
        rows[i, 2 * u : 2 * u + 2] = d
        rows[i, 2 * v : 2 * v + 2] = -d
    s = np.linalg.svd(rows, compute_uv=False)
    return int((s > 1e-8 * s[0]).sum())


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def to_nx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    return G


@pytest.fixture
def rng():
    return random.Random(20261015)
