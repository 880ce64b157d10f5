"""Simple undirected graphs and the structural searches used by the reduction engine.

Vertices are the integers ``0..n-1``.  Every derived graph (vertex deletion,
induced subgraph) is relabelled densely, and the helpers that build one also
return the list of original labels so callers can keep track of where each
vertex came from.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import GraphParseError

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            e = _norm_edge(u, v)
            if e in seen:
                raise ValueError(f"parallel edge {e}")
            seen.add(e)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        return cls(n, tuple(_norm_edge(int(u), int(v)) for u, v in edges))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple(itertools.combinations(range(n), 2)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edge_set

    def add_edges(self, extra: Iterable[Sequence[int]]) -> "Graph":
        """Union with ``extra``; edges already present are kept once."""
        es = set(self.edges)
        es.update(_norm_edge(u, v) for u, v in extra)
        return Graph(self.n, tuple(es))

    def remove_edges(self, drop: Iterable[Sequence[int]]) -> "Graph":
        gone = {_norm_edge(u, v) for u, v in drop}
        return Graph(self.n, tuple(e for e in self.edges if e not in gone))

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``vertices``, relabelled in increasing label order."""
        labels = sorted(set(vertices))
        index = {v: i for i, v in enumerate(labels)}
        sub = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph(len(labels), tuple(sub)), labels

    def remove_vertex(self, v: int) -> tuple["Graph", list[int]]:
        return self.induced(w for w in range(self.n) if w != v)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``i`` renamed to ``perm[i]``."""
        return Graph(self.n, tuple(_norm_edge(perm[u], perm[v]) for u, v in self.edges))

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        return cls.from_edges(d["n"], d["edges"])

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"] + [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def parse_graph(text: str) -> Graph:
    """Parse an edge-list or JSON graph description.

    Edge-list format: a header ``n m`` followed by ``m`` lines ``u v``; lines
    starting with ``#`` are ignored.  JSON format: ``{"n": .., "edges": [[u, v], ...]}``.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(stripped)

    header: tuple[int, int] | None = None
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer token in {line!r}", lineno) from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphParseError("negative vertex or edge count", lineno)
            header = (a, b)
            continue
        n = header[0]
        if a == b:
            raise GraphParseError(f"self-loop at vertex {a}", lineno)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphParseError(f"label out of range 0..{n - 1} in {line!r}", lineno)
        e = _norm_edge(a, b)
        if e in seen:
            raise GraphParseError(f"duplicate edge {a} {b}", lineno)
        seen.add(e)
        edges.append(e)
    if header is None:
        raise GraphParseError("missing 'n m' header")
    if len(edges) != header[1]:
        raise GraphParseError(f"header announces {header[1]} edges, found {len(edges)}")
    return Graph(header[0], tuple(edges))


def _parse_json(text: str) -> Graph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise GraphParseError('JSON graph must be an object with "n" and "edges"')
    n = data["n"]
    if not isinstance(n, int) or n < 0:
        raise GraphParseError('"n" must be a non-negative integer')
    seen: set[Edge] = set()
    for i, e in enumerate(data["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise GraphParseError(f"edge #{i} is not a pair of integers")
        u, v = e
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u} (edge #{i})")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"label out of range in edge #{i}")
        ne = _norm_edge(u, v)
        if ne in seen:
            raise GraphParseError(f"duplicate edge {u} {v} (edge #{i})")
        seen.add(ne)
    return Graph(n, tuple(seen))


# -- connectivity -----------------------------------------------------------


def components(g: Graph, removed: Iterable[int] = ()) -> list[list[int]]:
    """Connected components of ``g`` minus ``removed``, each sorted, ordered by smallest vertex."""
    gone = set(removed)
    seen = set(gone)
    comps = []
    for s in range(g.n):
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        comps.append(sorted(comp))
    return comps


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(components(g)) == 1


def is_k_connected(g: Graph, k: int) -> bool:
    """True iff ``g`` has more than ``k`` vertices and no set of fewer than ``k`` vertices disconnects it."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if g.n <= k:
        return False
    for size in range(k):
        for cut in itertools.combinations(range(g.n), size):
            if len(components(g, cut)) > 1:
                return False
    return True


@dataclass(frozen=True)
class Separation:
    side_a: frozenset[int]
    side_b: frozenset[int]
    separator: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "side_a": sorted(self.side_a),
            "side_b": sorted(self.side_b),
            "separator": list(self.separator),
        }


def find_2_separations(g: Graph) -> list[Separation]:
    """One separation per vertex pair whose removal disconnects ``g``.

    The lexicographically smallest component of ``g - {u, v}`` goes alone on
    ``side_a``; the remaining components form ``side_b``.
    """
    if g.n < 4:
        return []
    seps = []
    for u, v in itertools.combinations(range(g.n), 2):
        comps = components(g, (u, v))
        if len(comps) < 2:
            continue
        first = min(comps)
        rest = [x for c in comps if c is not first for x in c]
        seps.append(
            Separation(
                side_a=frozenset(first) | {u, v},
                side_b=frozenset(rest) | {u, v},
                separator=(u, v),
            )
        )
    return seps


@dataclass(frozen=True)
class EdgeCut3:
    part_a: frozenset[int]
    part_b: frozenset[int]
    cut_edges: tuple[Edge, Edge, Edge]

    def to_dict(self) -> dict:
        return {
            "part_a": sorted(self.part_a),
            "part_b": sorted(self.part_b),
            "cut_edges": [list(e) for e in self.cut_edges],
        }


def is_valid_3_edge_cut(g: Graph, cut: EdgeCut3) -> bool:
    a, b = cut.part_a, cut.part_b
    if a & b or (a | b) != frozenset(range(g.n)) or len(cut.cut_edges) != 3:
        return False
    ends_a, ends_b = set(), set()
    for u, v in cut.cut_edges:
        if not g.has_edge(u, v):
            return False
        if u in a and v in b:
            ends_a.add(u)
            ends_b.add(v)
        elif v in a and u in b:
            ends_a.add(v)
            ends_b.add(u)
        else:
            return False
    if len(ends_a) != 3 or len(ends_b) != 3:
        return False
    crossing = sum(1 for u, v in g.edges if (u in a) != (v in a))
    return crossing == 3


def find_3_edge_cuts_disjoint(g: Graph) -> list[EdgeCut3]:
    """All splits of ``g`` into two connected parts joined by three independent edges.

    Each cut is identified by its three edges: removing them must leave exactly
    two components, with every removed edge running between them and no two
    removed edges sharing an endpoint.  ``part_a`` is the side holding the
    smallest vertex label.
    """
    cuts = []
    if g.n < 6:
        return cuts
    for trio in itertools.combinations(g.edges, 3):
        ends = [x for e in trio for x in e]
        if len(set(ends)) != 6:
            continue
        comps = components(g.remove_edges(trio))
        if len(comps) != 2:
            continue
        a = frozenset(comps[0])
        if all((u in a) != (v in a) for u, v in trio):
            cuts.append(EdgeCut3(a, frozenset(comps[1]), trio))
    return cuts


def local_vertex_connectivity(g: Graph, s: int, t: int, cap: int | None = None) -> int:
    """Maximum number of internally disjoint s-t paths (an edge st counts as one path).

    Unit-capacity augmenting paths on the vertex-split digraph; stops early once
    ``cap`` paths have been found.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    direct = 1 if g.has_edge(s, t) else 0
    if cap is not None and direct >= cap:
        return direct

    # node 2x is x_in, 2x+1 is x_out; residual capacities in a dict of dicts
    res: dict[int, dict[int, int]] = {}

    def arc(a: int, b: int, c: int) -> None:
        res.setdefault(a, {})
        res.setdefault(b, {})
        res[a][b] = res[a].get(b, 0) + c
        res[b].setdefault(a, 0)

    big = g.n
    for x in range(g.n):
        arc(2 * x, 2 * x + 1, big if x in (s, t) else 1)
    for u, v in g.edges:
        if {u, v} == {s, t}:
            continue
        arc(2 * u + 1, 2 * v, 1)
        arc(2 * v + 1, 2 * u, 1)

    src, snk = 2 * s + 1, 2 * t
    flow = 0
    limit = None if cap is None else cap - direct
    while limit is None or flow < limit:
        parent = {src: None}
        queue = deque([src])
        while queue and snk not in parent:
            a = queue.popleft()
            for b in sorted(res.get(a, {})):
                if res[a][b] > 0 and b not in parent:
                    parent[b] = a
                    queue.append(b)
        if snk not in parent:
            break
        b = snk
        while parent[b] is not None:
            a = parent[b]
            res[a][b] -= 1
            res[b][a] += 1
            b = a
        flow += 1
    return flow + direct


def three_internally_disjoint_paths(g: Graph, u: int, v: int) -> bool:
    if u == v:
        raise ValueError("u and v must be distinct vertices")
    return local_vertex_connectivity(g, u, v, cap=3) >= 3


# -- fingerprints and isomorphism -----------------------------------------


@dataclass
class _Refined:
    colors: list[int]
    signature: tuple = field(default=())


def _refined(g: Graph) -> _Refined:
    colors = [0] * g.n
    sigs = [(g.degree(v),) for v in range(g.n)]
    history = []
    for rnd in range(g.n + 1):
        palette = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [palette[s] for s in sigs]
        history.append(tuple(sorted(palette.items())))
        stable = rnd > 0 and len(set(new)) == len(set(colors))
        colors = new
        if stable:
            break
        sigs = [(colors[v], tuple(sorted(colors[w] for w in g.adjacency[v]))) for v in range(g.n)]
    edge_sig = tuple(sorted(tuple(sorted((colors[u], colors[v]))) for u, v in g.edges))
    return _Refined(colors, (g.n, g.m, tuple(history), edge_sig))


def fingerprint(g: Graph) -> str:
    """Isomorphism-invariant hash from colour refinement.

    Equal fingerprints do not imply isomorphism; use :func:`find_isomorphism`
    to confirm.
    """
    sig = repr(_refined(g).signature).encode()
    return hashlib.sha1(sig).hexdigest()[:16]


def find_isomorphism(g: Graph, h: Graph) -> list[int] | None:
    """A bijection ``phi`` with ``h == g.relabel(phi)``, or None."""
    if g.n != h.n or g.m != h.m:
        return None
    rg, rh = _refined(g), _refined(h)
    if rg.signature != rh.signature:
        return None
    cg, ch = rg.colors, rh.colors
    order = sorted(range(g.n), key=lambda v: (sum(1 for w in range(g.n) if cg[w] == cg[v]), v))
    phi = [-1] * g.n
    used = [False] * h.n

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in range(h.n):
            if used[w] or ch[w] != cg[v]:
                continue
            ok = True
            for x in g.adjacency[v]:
                if phi[x] >= 0 and not h.has_edge(w, phi[x]):
                    ok = False
                    break
            if ok:
                mapped_nbrs = sum(1 for x in g.adjacency[v] if phi[x] >= 0)
                if sum(1 for y in h.adjacency[w] if used[y]) != mapped_nbrs:
                    ok = False
            if not ok:
                continue
            phi[v] = w
            used[w] = True
            if extend(i + 1):
                return True
            phi[v] = -1
            used[w] = False
        return False

    return phi if extend(0) else None
