"""Exact c(G) by recursive reduction, with a checkable certificate tree.

Each node of the tree records the rule applied to a graph, the integer factor
it contributes and the child graphs it produced.  Children are always derived
from the parent graph and the rule's ``detail`` by ``derive_children``, so a
certificate can be re-checked without trusting the code that built it.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NotRigidError, RuleInapplicable
from .graph import (
    EdgeCut3,
    Graph,
    Separation,
    find_2_separations,
    find_3_edge_cuts_disjoint,
    find_isomorphism,
    fingerprint,
    is_valid_3_edge_cut,
)
from .rigidity import b_value, is_globally_rigid, is_r_connected, is_rigid

PRISM_CONSTANT = 12
NUMERIC_FLAG = "numeric, probability-1"
FLEXIBLE_MESSAGE = "c(G) undefined for flexible graphs"


class Rule(str, enum.Enum):
    GLOBALLY_RIGID = "GloballyRigid"
    SMALL_COMPLETE = "SmallComplete"
    TYPE1 = "Type1"
    TRIANGLE_TYPE2 = "TriangleType2"
    TWO_SEP_BOTH_RIGID = "TwoSepBothRigid"
    TWO_SEP_ONE_NON_RIGID = "TwoSepOneNonRigid"
    THREE_EDGE_CUT = "ThreeEdgeCut"
    R_CONNECTED_FORMULA = "RConnectedFormula"
    IRREDUCIBLE = "Irreducible"


class Step(str, enum.Enum):
    """Reduction families whose relative order count_c lets callers permute."""

    R_CONNECTED = "rconnected"
    TYPE1 = "type1"
    TRIANGLE = "triangle"
    TWO_SEP = "twosep"
    THREE_EDGE_CUT = "threeedgecut"


DEFAULT_ORDER: tuple[Step, ...] = tuple(Step)


@dataclass
class CountCertificate:
    rule: Rule
    factor: int | None
    children: list["CountCertificate"]
    graph_fingerprint: str
    graph: Graph
    detail: dict = field(default_factory=dict)
    upper_bound: int | None = None
    numeric: dict | None = None

    def value(self) -> int | None:
        """factor times the children's values; None while an unresolved residue remains."""
        if self.rule is Rule.IRREDUCIBLE:
            return None if self.numeric is None else int(self.numeric["value"])
        total = self.factor
        for c in self.children:
            v = c.value()
            if v is None:
                return None
            total *= v
        return total

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_dict(self) -> dict:
        return {
            "rule": self.rule.value,
            "factor": None if self.factor is None else str(self.factor),
            "graph_fingerprint": self.graph_fingerprint,
            "graph": self.graph.to_dict(),
            "detail": self.detail,
            "upper_bound": None if self.upper_bound is None else str(self.upper_bound),
            "numeric": self.numeric,
            "children": [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CountCertificate":
        return cls(
            rule=Rule(d["rule"]),
            factor=None if d["factor"] is None else int(d["factor"]),
            children=[cls.from_dict(c) for c in d["children"]],
            graph_fingerprint=d["graph_fingerprint"],
            graph=Graph.from_dict(d["graph"]),
            detail=d.get("detail", {}),
            upper_bound=None if d.get("upper_bound") is None else int(d["upper_bound"]),
            numeric=d.get("numeric"),
        )

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        g = self.graph
        if self.rule is Rule.IRREDUCIBLE:
            head = f"{pad}{self.rule.value} (n={g.n}, m={g.m}) c <= {self.upper_bound}"
            if self.numeric is not None:
                head += f", c = {self.numeric['value']} [{NUMERIC_FLAG}]"
        else:
            head = f"{pad}{self.rule.value} x{self.factor} (n={g.n}, m={g.m})"
        if self.detail:
            head += " " + ", ".join(f"{k}={v}" for k, v in self.detail.items())
        return "\n".join([head] + [c.render(indent + 1) for c in self.children])


@dataclass
class CountResult:
    exact: int | None
    expression: str
    certificate: CountCertificate
    residues: list[Graph] = field(default_factory=list)
    numeric_residues: list[dict] = field(default_factory=list)

    @property
    def probability_one(self) -> bool:
        """True when numeric solves supplied some factor of ``exact``."""
        return bool(self.numeric_residues)

    def to_dict(self) -> dict:
        return {
            "exact": None if self.exact is None else str(self.exact),
            "expression": self.expression,
            "certificate": self.certificate.to_dict(),
            "residues": [g.to_dict() for g in self.residues],
            "numeric_residues": self.numeric_residues,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CountResult":
        return cls(
            exact=None if d["exact"] is None else int(d["exact"]),
            expression=d["expression"],
            certificate=CountCertificate.from_dict(d["certificate"]),
            residues=[Graph.from_dict(g) for g in d["residues"]],
            numeric_residues=d.get("numeric_residues", []),
        )

    def __eq__(self, other):
        if not isinstance(other, CountResult):
            return NotImplemented
        return self.to_dict() == other.to_dict()


# -- small closed forms -------------------------------------------------------


def borcea_streinu_bound(n: int) -> int:
    """Half the central binomial coefficient C(2n-4, n-2)."""
    if n < 3:
        raise ValueError("bound is stated for n >= 3")
    return math.comb(2 * n - 4, n - 2) // 2


def qs_family_value(n: int) -> int:
    """c(G) = 2**(n-3) for graphs of the quadratically solvable gluing family."""
    if n < 3:
        raise ValueError("the gluing family starts at K3")
    return 2 ** (n - 3)


def rconnected_shortcut(g: Graph) -> int | None:
    return 2 ** b_value(g) if is_r_connected(g) else None


# -- reductions ---------------------------------------------------------------


def _require_rigid(g: Graph) -> None:
    if not is_rigid(g):
        raise NotRigidError(FLEXIBLE_MESSAGE)


def reduce_type1(g: Graph, v: int) -> tuple[Graph, int]:
    if g.n < 4 or g.degree(v) != 2 or not is_rigid(g):
        raise RuleInapplicable(f"vertex {v} is not a degree-2 vertex of a rigid graph on >= 4 vertices")
    return g.remove_vertex(v)[0], 2


def reduce_triangle(g: Graph, v: int) -> tuple[Graph, int]:
    if g.degree(v) != 3:
        raise RuleInapplicable(f"vertex {v} does not have degree 3")
    rest, labels = g.remove_vertex(v)
    if not is_rigid(rest):
        raise RuleInapplicable(f"removing vertex {v} leaves a flexible graph")
    where = {x: i for i, x in enumerate(labels)}
    nbrs = [where[x] for x in g.neighbors(v)]
    tri = [(a, b) for a, b in itertools.combinations(nbrs, 2) if not rest.has_edge(a, b)]
    return rest.add_edges(tri), 1


def _check_separation(g: Graph, s: Separation) -> tuple[int, int]:
    if len(s.separator) != 2:
        raise ValueError("a 2-separation needs a separator of two vertices")
    u, v = s.separator
    a, b = s.side_a, s.side_b
    if a & b != {u, v} or (a | b) != frozenset(range(g.n)) or len(a) < 3 or len(b) < 3:
        raise ValueError("not a 2-separation of this graph")
    for x, y in g.edges:
        if {x, y} != {u, v} and not ({x, y} <= a or {x, y} <= b):
            raise ValueError(f"edge {x}-{y} crosses the separation")
    return u, v


def _sides(g: Graph, s: Separation):
    """Side subgraphs (without the separator edge) and the separator in child labels."""
    u, v = s.separator
    out = []
    for side in (s.side_a, s.side_b):
        sub, labels = g.induced(side)
        sub = sub.remove_edges([(labels.index(u), labels.index(v))]) if g.has_edge(u, v) else sub
        out.append((sub, labels.index(u), labels.index(v)))
    return out


def reduce_2separation(g: Graph, s: Separation) -> tuple[list[Graph], int, Rule]:
    """Children and factor 2 for a 2-separation of a rigid graph.

    With uv present the separator is trivially globally linked and both
    children are side + uv.  Without it, rigid sides give side + uv each; a
    flexible side gets uv added while the rigid side is kept as it is.
    """
    _check_separation(g, s)
    _require_rigid(g)
    u, v = s.separator
    (ga, ua, va), (gb, ub, vb) = _sides(g, s)
    if g.has_edge(u, v):
        return [ga.add_edges([(ua, va)]), gb.add_edges([(ub, vb)])], 2, Rule.TWO_SEP_BOTH_RIGID
    ra, rb = is_rigid(ga), is_rigid(gb)
    if ra and rb:
        return [ga.add_edges([(ua, va)]), gb.add_edges([(ub, vb)])], 2, Rule.TWO_SEP_BOTH_RIGID
    if ra:
        return [ga, gb.add_edges([(ub, vb)])], 2, Rule.TWO_SEP_ONE_NON_RIGID
    if rb:
        return [ga.add_edges([(ua, va)]), gb], 2, Rule.TWO_SEP_ONE_NON_RIGID
    raise RuleInapplicable("both sides flexible; the graph cannot be rigid")


def reduce_3edgecut(g: Graph, cut: EdgeCut3) -> tuple[list[Graph], int]:
    if not is_valid_3_edge_cut(g, cut):
        raise ValueError("not a 3-edge-cut with distinct endpoints on each side")
    _require_rigid(g)
    return [g.induced(cut.part_a)[0], g.induced(cut.part_b)[0]], PRISM_CONSTANT


def derive_children(g: Graph, rule: Rule, detail: dict) -> tuple[list[tuple[Graph, list[int]]], int]:
    """Re-derive (child, parent labels of child vertices) pairs and the factor of a rule."""
    if rule is Rule.TYPE1:
        child, f = reduce_type1(g, detail["vertex"])
        return [(child, g.remove_vertex(detail["vertex"])[1])], f
    if rule is Rule.TRIANGLE_TYPE2:
        child, f = reduce_triangle(g, detail["vertex"])
        return [(child, g.remove_vertex(detail["vertex"])[1])], f
    if rule in (Rule.TWO_SEP_BOTH_RIGID, Rule.TWO_SEP_ONE_NON_RIGID):
        s = Separation(frozenset(detail["side_a"]), frozenset(detail["side_b"]), tuple(detail["separator"]))
        kids, f, kind = reduce_2separation(g, s)
        if kind is not rule:
            raise RuleInapplicable(f"separation yields {kind.value}, not {rule.value}")
        return [(kids[0], sorted(s.side_a)), (kids[1], sorted(s.side_b))], f
    if rule is Rule.THREE_EDGE_CUT:
        cut = EdgeCut3(
            frozenset(detail["part_a"]),
            frozenset(detail["part_b"]),
            tuple(tuple(e) for e in detail["cut_edges"]),
        )
        kids, f = reduce_3edgecut(g, cut)
        return [(kids[0], sorted(cut.part_a)), (kids[1], sorted(cut.part_b))], f
    return [], 1


# -- certificates under relabelling ------------------------------------------


def _relabel_detail(detail: dict, phi: Sequence[int]) -> dict:
    out = {}
    for k, v in detail.items():
        if k == "vertex":
            out[k] = phi[v]
        elif k in ("side_a", "side_b", "part_a", "part_b"):
            out[k] = sorted(phi[x] for x in v)
        elif k == "separator":
            out[k] = sorted(phi[x] for x in v)
        elif k == "cut_edges":
            out[k] = sorted(sorted((phi[a], phi[b])) for a, b in v)
        else:
            out[k] = v
    return out


def relabel_certificate(cert: CountCertificate, phi: Sequence[int]) -> CountCertificate:
    """The same certificate for ``cert.graph.relabel(phi)``."""
    g = cert.graph.relabel(phi)
    detail = _relabel_detail(cert.detail, phi)
    children = []
    if cert.children:
        old = derive_children(cert.graph, cert.rule, cert.detail)[0]
        new = derive_children(g, cert.rule, detail)[0]
        for child, (_, old_labels), (new_graph, new_labels) in zip(cert.children, old, new):
            pos = {x: i for i, x in enumerate(new_labels)}
            psi = [pos[phi[x]] for x in old_labels]
            sub = relabel_certificate(child, psi)
            assert sub.graph == new_graph
            children.append(sub)
    return CountCertificate(
        rule=cert.rule,
        factor=cert.factor,
        children=children,
        graph_fingerprint=cert.graph_fingerprint,
        graph=g,
        detail=detail,
        upper_bound=cert.upper_bound,
        numeric=cert.numeric,
    )


class Memo:
    """Certificates keyed by fingerprint; a hit must also pass an explicit isomorphism check."""

    def __init__(self):
        self.table: dict[str, list[CountCertificate]] = {}
        self.hits = 0

    def get(self, g: Graph, fp: str) -> CountCertificate | None:
        for cert in self.table.get(fp, []):
            phi = find_isomorphism(cert.graph, g)
            if phi is not None:
                self.hits += 1
                return relabel_certificate(cert, phi)
        return None

    def put(self, cert: CountCertificate) -> None:
        self.table.setdefault(cert.graph_fingerprint, []).append(cert)


# -- the recursion ------------------------------------------------------------


def _pick(items: list, rng: random.Random | None):
    return items[0] if rng is None else rng.choice(items)


def _try_step(g: Graph, step: Step, rng) -> tuple[Rule, dict, int] | None:
    """First applicable instance of a reduction family: (rule, detail, factor) or None."""
    if step is Step.R_CONNECTED:
        val = rconnected_shortcut(g)
        return None if val is None else (Rule.R_CONNECTED_FORMULA, {"b": b_value(g)}, val)
    if step is Step.TYPE1:
        cands = [v for v in range(g.n) if g.degree(v) == 2]
        if not cands or g.n < 4:
            return None
        return Rule.TYPE1, {"vertex": _pick(cands, rng)}, 2
    if step is Step.TRIANGLE:
        cands = [v for v in range(g.n) if g.degree(v) == 3 and is_rigid(g.remove_vertex(v)[0])]
        if not cands:
            return None
        return Rule.TRIANGLE_TYPE2, {"vertex": _pick(cands, rng)}, 1
    if step is Step.TWO_SEP:
        seps = find_2_separations(g)
        if not seps:
            return None
        s = _pick(seps, rng)
        _, f, rule = reduce_2separation(g, s)
        d = s.to_dict()
        d["separator"] = sorted(d["separator"])
        return rule, d, f
    if step is Step.THREE_EDGE_CUT:
        cuts = find_3_edge_cuts_disjoint(g)
        if not cuts:
            return None
        c = _pick(cuts, rng)
        return Rule.THREE_EDGE_CUT, c.to_dict(), PRISM_CONSTANT
    raise ValueError(step)


def _count(g: Graph, order, use_global, memo: Memo | None, rng) -> CountCertificate:
    fp = fingerprint(g)
    if memo is not None:
        hit = memo.get(g, fp)
        if hit is not None:
            return hit
    cert = None
    if g.n <= 3:
        cert = CountCertificate(Rule.SMALL_COMPLETE, 1, [], fp, g)
    elif use_global and is_globally_rigid(g):
        cert = CountCertificate(Rule.GLOBALLY_RIGID, 1, [], fp, g)
    else:
        for step in order:
            found = _try_step(g, step, rng)
            if found is None:
                continue
            rule, detail, factor = found
            kids = derive_children(g, rule, detail)[0]
            children = [_count(child, order, use_global, memo, rng) for child, _ in kids]
            cert = CountCertificate(rule, factor, children, fp, g, detail)
            break
        if cert is None:
            cert = CountCertificate(
                Rule.IRREDUCIBLE, None, [], fp, g, upper_bound=borcea_streinu_bound(g.n)
            )
    if memo is not None:
        memo.put(cert)
    return cert


def _expression(cert: CountCertificate) -> tuple[int, list[CountCertificate]]:
    known = 1
    residues = []
    for node in cert.walk():
        if node.rule is Rule.IRREDUCIBLE:
            residues.append(node)
        else:
            known *= node.factor
    return known, residues


def _assemble(cert: CountCertificate) -> CountResult:
    known, nodes = _expression(cert)
    unresolved = [nd for nd in nodes if nd.numeric is None]
    resolved = [nd for nd in nodes if nd.numeric is not None]
    parts = [str(known)] + [f"c(R{i + 1})" for i in range(len(nodes))]
    expression = " * ".join(parts) if nodes else str(known)
    if unresolved:
        return CountResult(None, expression, cert, [nd.graph for nd in unresolved])
    exact = known
    numeric = []
    for i, nd in enumerate(nodes):
        exact *= int(nd.numeric["value"])
        numeric.append({"name": f"R{i + 1}", "graph": nd.graph.to_dict(), **nd.numeric})
    if resolved:
        expression += " = " + " * ".join([str(known)] + [str(nd.numeric["value"]) for nd in nodes])
    return CountResult(exact, expression, cert, [], numeric)


def count_c(
    g: Graph,
    order: Sequence[Step] = DEFAULT_ORDER,
    use_global: bool = True,
    memo: Memo | bool = True,
    rng: random.Random | None = None,
    numeric_fallback: bool = False,
    seed: int = 42,
    tracker=None,
    max_numeric_n: int = 9,
) -> CountResult:
    """Exact c(G) by reduction, or a symbolic product over irreducible residues.

    ``order`` permutes the reduction families after the n <= 3 and globally
    rigid base cases; ``use_global=False`` drops the globally rigid base case.
    With ``rng`` a random applicable instance of each rule is used instead of
    the first.  ``numeric_fallback`` resolves residues with at most
    ``max_numeric_n`` vertices by homotopy continuation.
    """
    if g.n < 2:
        raise ValueError("c(G) needs at least two vertices")
    _require_rigid(g)
    order = tuple(Step(s) for s in order)
    if sorted(order) != sorted(DEFAULT_ORDER):
        raise ValueError("order must be a permutation of the five reduction families")
    table = Memo() if memo is True else (memo or None)
    cert = _count(g, order, use_global, table, rng)
    if numeric_fallback:
        from .homotopy import count_realizations

        for node in cert.walk():
            if node.rule is Rule.IRREDUCIBLE and node.numeric is None and node.graph.n <= max_numeric_n:
                nc = count_realizations(node.graph, seed=seed, cfg=tracker)
                node.numeric = {
                    "value": nc.c_estimate,
                    "flag": NUMERIC_FLAG,
                    "seed": seed,
                    "certified": nc.certified,
                }
    return _assemble(cert)


# -- checking -----------------------------------------------------------------


def check_certificate(cert: CountCertificate) -> list[str]:
    """Independent re-check of every node; returns the problems found (empty when sound)."""
    problems: list[str] = []
    for node in cert.walk():
        g = node.graph
        where = f"{node.rule.value} node (n={g.n}, m={g.m})"
        if fingerprint(g) != node.graph_fingerprint:
            problems.append(f"{where}: fingerprint mismatch")
        if not is_rigid(g):
            problems.append(f"{where}: graph is not rigid")
            continue
        rule = node.rule
        if rule is Rule.SMALL_COMPLETE:
            ok = g.n <= 3 and node.factor == 1
        elif rule is Rule.GLOBALLY_RIGID:
            ok = is_globally_rigid(g) and node.factor == 1
        elif rule is Rule.R_CONNECTED_FORMULA:
            ok = is_r_connected(g) and node.factor == 2 ** b_value(g)
        elif rule is Rule.IRREDUCIBLE:
            ok = node.factor is None and not node.children
        else:
            try:
                kids, factor = derive_children(g, rule, node.detail)
            except (RuleInapplicable, ValueError, KeyError) as exc:
                problems.append(f"{where}: {exc}")
                continue
            ok = factor == node.factor and len(kids) == len(node.children)
            ok = ok and all(k == c.graph for (k, _), c in zip(kids, node.children))
        if not ok:
            problems.append(f"{where}: rule does not apply as recorded")
    return problems
