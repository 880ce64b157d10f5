"""Generic rigidity in the plane via the (2,3)-pebble game.

Every query here is combinatorial: ranks, rigid components and matroid
components come from pebble-game runs over the sorted edge list, so results
are deterministic for a given graph.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

from .errors import NotRigidError, UnsupportedInput
from .graph import Edge, Graph, components, is_k_connected, three_internally_disjoint_paths


class PebbleGame:
    """(2,3)-pebble game state.

    ``pebbles[v]`` is the number of free pebbles on ``v`` and ``out[v]`` the
    heads of accepted edges currently covered by a pebble of ``v``.
    """

    def __init__(self, n: int):
        self.n = n
        self.pebbles = [2] * n
        self.out: list[set[int]] = [set() for _ in range(n)]
        self.accepted: list[Edge] = []

    def _fetch(self, root: int, keep: tuple[int, int]) -> bool:
        """Move one free pebble onto ``root`` from a vertex outside ``keep``."""
        parent = {root: None}
        stack = [root]
        found = None
        while stack and found is None:
            x = stack.pop()
            pending = []
            for y in sorted(self.out[x]):
                if y in parent:
                    continue
                parent[y] = x
                if self.pebbles[y] > 0 and y not in keep:
                    found = y
                    break
                pending.append(y)
            stack.extend(reversed(pending))
        if found is None:
            return False
        # reverse the path root -> ... -> found
        y = found
        while parent[y] is not None:
            x = parent[y]
            self.out[x].discard(y)
            self.out[y].add(x)
            y = x
        self.pebbles[found] -= 1
        self.pebbles[root] += 1
        return True

    def gather(self, u: int, v: int) -> int:
        """Collect as many pebbles as possible (at most four) on ``u`` and ``v``."""
        keep = (u, v)
        while self.pebbles[u] < 2 and self._fetch(u, keep):
            pass
        while self.pebbles[v] < 2 and self._fetch(v, keep):
            pass
        return self.pebbles[u] + self.pebbles[v]

    def is_independent_with(self, u: int, v: int) -> bool:
        """Would edge uv be independent of the accepted edges?"""
        return self.gather(u, v) == 4

    def add_edge(self, u: int, v: int) -> bool:
        if self.gather(u, v) < 4:
            return False
        self.pebbles[u] -= 1
        self.out[u].add(v)
        self.accepted.append((min(u, v), max(u, v)))
        return True

    def check(self) -> None:
        covered = sum(len(o) for o in self.out)
        assert covered == len(self.accepted)
        assert sum(self.pebbles) + covered == 2 * self.n


def run_pebble_game(n: int, edges) -> PebbleGame:
    game = PebbleGame(n)
    for u, v in sorted(edges):
        game.add_edge(u, v)
    return game


def generic_rank(g: Graph) -> int:
    return len(run_pebble_game(g.n, g.edges).accepted)


def is_independent(g: Graph, edges=None) -> bool:
    es = g.edges if edges is None else edges
    return len(run_pebble_game(g.n, es).accepted) == len(es)


def is_rigid(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return generic_rank(g) == 2 * g.n - 3


def is_isostatic(g: Graph) -> bool:
    return is_rigid(g) and g.m == max(2 * g.n - 3, 0)


def is_redundantly_rigid(g: Graph) -> bool:
    if not is_rigid(g):
        return False
    return all(is_rigid(g.remove_edges([e])) for e in g.edges)


def is_globally_rigid(g: Graph) -> bool:
    if g.n <= 3:
        return g.m == g.n * (g.n - 1) // 2
    return is_k_connected(g, 3) and is_redundantly_rigid(g)


def spanning_isostatic_subgraph(g: Graph) -> list[Edge]:
    """Edges accepted by the pebble game; a spanning isostatic subgraph when ``g`` is rigid."""
    game = run_pebble_game(g.n, g.edges)
    if g.n >= 2 and len(game.accepted) != 2 * g.n - 3:
        raise NotRigidError("graph is not rigid, so it has no spanning isostatic subgraph")
    return sorted(game.accepted)


def rigid_components(g: Graph) -> list[frozenset[int]]:
    """Vertex sets of the maximal rigid subgraphs that carry at least one edge.

    Two vertices are rigidly linked when the pair is already an edge or adding
    it would be dependent.  The component through an edge uv is uv together
    with every vertex rigidly linked to both u and v.
    """
    game = run_pebble_game(g.n, g.edges)
    linked: dict[tuple[int, int], bool] = {}

    def rigidly_linked(a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        if key not in linked:
            linked[key] = g.has_edge(a, b) or not game.is_independent_with(a, b)
        return linked[key]

    comps: list[frozenset[int]] = []
    assigned: set[Edge] = set()
    for u, v in g.edges:
        if (u, v) in assigned:
            continue
        verts = {u, v}
        for w in range(g.n):
            if w not in verts and rigidly_linked(u, w) and rigidly_linked(v, w):
                verts.add(w)
        comp = frozenset(verts)
        comps.append(comp)
        for e in g.edges:
            if e[0] in comp and e[1] in comp:
                assigned.add(e)
    return comps


@dataclass(frozen=True)
class MatroidComponents:
    blocks: tuple[tuple[Edge, ...], ...]
    is_single_edge: tuple[bool, ...]

    @property
    def nontrivial(self) -> list[tuple[Edge, ...]]:
        return [b for b, single in zip(self.blocks, self.is_single_edge) if not single]

    def to_dict(self) -> dict:
        return {
            "blocks": [[list(e) for e in b] for b in self.blocks],
            "is_single_edge": list(self.is_single_edge),
        }


def fundamental_circuit(n: int, basis: list[Edge], e: Edge) -> list[Edge]:
    """Circuit in basis + e: e with every basis edge b such that basis - b + e is independent."""
    circuit = [e]
    for b in basis:
        trial = [x for x in basis if x != b] + [e]
        if len(run_pebble_game(n, trial).accepted) == len(trial):
            circuit.append(b)
    return sorted(circuit)


def r_components(g: Graph) -> MatroidComponents:
    """Components of the rigidity matroid via fundamental circuits of one pebble-game basis."""
    basis = sorted(run_pebble_game(g.n, g.edges).accepted)
    basis_set = set(basis)
    parent = {e: e for e in g.edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    in_circuit: set[Edge] = set()
    for e in g.edges:
        if e in basis_set:
            continue
        circ = fundamental_circuit(g.n, basis, e)
        in_circuit.update(circ)
        root = find(circ[0])
        for x in circ[1:]:
            parent[find(x)] = root

    groups: dict[Edge, list[Edge]] = {}
    for e in g.edges:
        groups.setdefault(find(e), []).append(e)
    blocks = sorted((tuple(sorted(b)) for b in groups.values()), key=lambda b: b[0])
    single = tuple(len(b) == 1 and b[0] not in in_circuit for b in blocks)
    return MatroidComponents(tuple(blocks), single)


def is_r_connected(g: Graph) -> bool:
    if g.m < 2:
        return False
    comps = r_components(g)
    return len(comps.blocks) == 1 and not comps.is_single_edge[0]


def b_value(g: Graph) -> int:
    """Sum over vertex pairs of (number of components of g - {u, v}) - 1."""
    total = 0
    for u, v in itertools.combinations(range(g.n), 2):
        w = len(components(g, (u, v)))
        if w > 1:
            total += w - 1
    return total


def is_globally_linked_mconnected(g: Graph, u: int, v: int) -> bool:
    if not is_r_connected(g):
        raise UnsupportedInput("globally-linked test needs an R-connected graph")
    return three_internally_disjoint_paths(g, u, v)


@dataclass(frozen=True)
class RigidityReport:
    generic_rank: int
    is_rigid: bool
    is_isostatic: bool
    is_redundantly_rigid: bool
    is_globally_rigid: bool
    rigid_components: list[list[int]] = field(default_factory=list)
    b_value: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RigidityReport":
        return cls(**{**d, "rigid_components": [list(c) for c in d["rigid_components"]]})


def rigidity_report(g: Graph) -> RigidityReport:
    return RigidityReport(
        generic_rank=generic_rank(g),
        is_rigid=is_rigid(g),
        is_isostatic=is_isostatic(g),
        is_redundantly_rigid=is_redundantly_rigid(g),
        is_globally_rigid=is_globally_rigid(g),
        rigid_components=sorted(sorted(c) for c in rigid_components(g)),
        b_value=b_value(g),
    )
