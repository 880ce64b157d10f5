"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line to the summary printed at the end of the
pytest run, then asserts.  Thresholds are fixed here and never loosened.
"""

import functools
import itertools
import random
import time

import pytest

from conftest import ACCEPTANCE_LINES, atlas_graphs, numeric_rank_oracle, random_graph, rigid_atlas_graphs
from rigidcount.cli import main
from rigidcount.decomposition import DEFAULT_ORDER, Memo, borcea_streinu_bound, count_c, qs_family_value
from rigidcount.families import (
    complete,
    degree2_chain,
    double_k4,
    prism,
    prism_tower,
    random_globally_rigid,
    random_qs_graph,
    wheel,
)
from rigidcount.graph import Graph
from rigidcount.homotopy import count_realizations
from rigidcount.rigidity import b_value, generic_rank, is_globally_rigid, is_r_connected, r_components
from test_rigidity import brute_force_matroid_components

PRISM_COUNT_SECONDS = 1.0
PRISM_SOLVE_SECONDS = 60.0
CHAIN_SECONDS = 600.0


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])


@functools.lru_cache(maxsize=None)
def solve(g: Graph, seed: int):
    return count_realizations(g, seed=seed)


# graphs whose numeric runs feed the divisibility, parity and bound checks
NUMERIC_CASES = (
    [(prism(), s) for s in (1, 2, 3)]
    + [(degree2_chain(k), 42) for k in range(1, 6)]
    + [(double_k4(), 42)]
    + [(random_qs_graph(n, random.Random(n)), 42) for n in (5, 6, 7)]
)


def test_criterion_01_prism_constant(capsys, tmp_path):
    path = tmp_path / "prism.txt"
    path.write_text(prism().to_text())
    t0 = time.perf_counter()
    code = main(["count", str(path)])
    count_time = time.perf_counter() - t0
    out = capsys.readouterr().out
    count_ok = code == 0 and out.splitlines()[0] == "c(G) = 12"
    t0 = time.perf_counter()
    runs = [solve(prism(), s) for s in (1, 2, 3)]
    solve_time = time.perf_counter() - t0
    solve_ok = all(r.total_paths == 512 and r.finite_solutions == 48 and r.c_estimate == 12 for r in runs)
    ok = count_ok and count_time < PRISM_COUNT_SECONDS and solve_ok and solve_time < PRISM_SOLVE_SECONDS
    record(
        1,
        ok,
        f"count = 12: {count_ok} in {count_time:.3f}s (< {PRISM_COUNT_SECONDS}s); "
        f"solve seeds 1,2,3: {[(r.total_paths, r.finite_solutions, r.c_estimate) for r in runs]} "
        f"in {solve_time:.1f}s (< {PRISM_SOLVE_SECONDS}s)",
    )
    assert ok


def test_criterion_02_degree2_doubling():
    t0 = time.perf_counter()
    exact = [count_c(degree2_chain(k)).exact for k in range(1, 6)]
    numeric = [solve(degree2_chain(k), 42).c_estimate for k in range(1, 6)]
    elapsed = time.perf_counter() - t0
    expected = [2**k for k in range(1, 6)]
    ok = exact == expected and numeric == expected and elapsed < CHAIN_SECONDS
    record(2, ok, f"k=1..5 exact {exact}, numeric {numeric}, expected {expected}, {elapsed:.1f}s (< {CHAIN_SECONDS}s)")
    assert ok


def test_criterion_03_globally_rigid_iff_one():
    rng = random.Random(33)
    named = [("K4", complete(4)), ("K5", complete(5)), ("W4", wheel(4)), ("W5", wheel(5))]
    randoms = [random_globally_rigid(rng.randint(4, 7), rng) for _ in range(20)]
    forward = []
    for name, g in named + [(f"random n={g.n}", g) for g in randoms]:
        assert is_globally_rigid(g), name
        # without the globally-rigid shortcut the value comes from the other rules alone
        forward.append((name, count_c(g).exact, count_c(g, use_global=False).exact))
    forward_ok = all(a == 1 and b == 1 for _, a, b in forward)
    converse_bad = []
    ones = 0
    for g in rigid_atlas_graphs(7):
        c = count_c(g, use_global=False).exact
        if c == 1:
            ones += 1
            if not is_globally_rigid(g):
                converse_bad.append(g.edges)
    ok = forward_ok and not converse_bad
    record(
        3,
        ok,
        f"{len(forward)} globally rigid graphs all give 1: {forward_ok}; "
        f"{ones} exact counts of 1 at n<=7, non-globally-rigid among them: {len(converse_bad)}",
    )
    assert ok


def test_criterion_04_rconnected_formula():
    g = double_k4()
    b = b_value(g)
    exact = count_c(g)
    nc = solve(g, 42)
    ok = is_r_connected(g) and b == 1 and exact.exact == 2 == 2**b and nc.c_estimate == 2
    record(4, ok, f"double-K4: R-connected {is_r_connected(g)}, b = {b}, exact {exact.exact}, numeric {nc.c_estimate}")
    assert ok


def test_criterion_05_qs_family():
    rng = random.Random(55)
    rows = []
    for n in range(4, 9):
        for _ in range(4):
            g = random_qs_graph(n, rng)
            rows.append((n, count_c(g).exact, qs_family_value(n)))
    exact_ok = all(c == v for _, c, v in rows)
    spot = [(g.n, solve(g, s).c_estimate, qs_family_value(g.n)) for g, s in NUMERIC_CASES[-3:]]
    numeric_ok = all(c == v for _, c, v in spot)
    ok = exact_ok and numeric_ok
    record(5, ok, f"{len(rows)} glued graphs n=4..8 exact = 2^(n-3): {exact_ok}; numeric (n, c, expected) {spot}")
    assert ok


def test_criterion_06_prism_tower():
    t9 = count_c(prism_tower(3)).exact
    t12 = count_c(prism_tower(4)).exact
    ok = t9 == 144 and t12 == 1728
    record(6, ok, f"tower n=9: {t9} (expected 144); n=12: {t12} (expected 1728)")
    assert ok


def test_criterion_07_divisibility_and_parity():
    runs = [(g.n, s, solve(g, s)) for g, s in NUMERIC_CASES]
    bad = [
        (n, s, r.finite_solutions, r.complex_pair_count)
        for n, s, r in runs
        if r.finite_solutions % 4 or r.complex_pair_count % 2 or r.finite_solutions != 4 * r.c_estimate
    ]
    ok = not bad
    detail = f"{len(runs)} numeric runs; finite = 0 mod 4 and even complex-pair count in all: {ok}"
    record(7, ok, detail if ok else f"{detail} {bad}")
    assert ok


def test_criterion_08_bound():
    checked = 0
    bad = []
    families = [prism(), prism_tower(3), prism_tower(4), double_k4()] + [degree2_chain(k) for k in range(1, 8)]
    for g in list(rigid_atlas_graphs(7)) + families:
        if g.n < 3:
            continue
        c = count_c(g).exact
        if c is None:
            continue
        checked += 1
        if not 1 <= c <= borcea_streinu_bound(g.n):
            bad.append((g.edges, c))
    for g, s in NUMERIC_CASES:
        checked += 1
        c = solve(g, s).c_estimate
        if c > borcea_streinu_bound(g.n):
            bad.append((g.edges, c))
    ok = not bad
    record(8, ok, f"{checked} exact and numeric counts within the bound: {ok}{'' if ok else ' ' + str(bad)}")
    assert ok


def _small_edge_graphs():
    """Graphs with at most 8 edges and no isolated vertices, up to isomorphism.

    All such graphs on at most 7 vertices come from the atlas, plus every
    disjoint union of two of them with 8 or more vertices.  What is left over
    has every component a tree or unicyclic, so each edge is its own matroid
    component and there is nothing to compare.
    """
    base = [g for g in atlas_graphs(7, 1) if g.m <= 8 and all(g.degree(v) for v in range(g.n))]
    yield from base
    for g, h in itertools.combinations_with_replacement(base, 2):
        if g.m + h.m <= 8 and g.n + h.n >= 8:
            yield Graph.from_edges(g.n + h.n, list(g.edges) + [(u + g.n, v + g.n) for u, v in h.edges])


def test_criterion_09_oracle_suites():
    rng = random.Random(99)
    rank_bad = 0
    for _ in range(100):
        g = random_graph(rng, rng.randint(2, 8), rng.uniform(0.2, 0.9))
        if generic_rank(g) != numeric_rank_oracle(g.n, list(g.edges), seed=rng.randrange(10**6)):
            rank_bad += 1

    matroid_bad = 0
    matroid_checked = 0
    for g in _small_edge_graphs():
        if g.m == 0:
            continue
        matroid_checked += 1
        got = sorted((frozenset(b) for b in r_components(g).blocks), key=sorted)
        if got != brute_force_matroid_components(g):
            matroid_bad += 1

    orders = list(itertools.permutations(DEFAULT_ORDER))
    memos = {o: Memo() for o in orders}
    split = 0
    graphs = rigid_atlas_graphs(7)
    for g in graphs:
        values = {count_c(g, order=o, memo=memos[o]).exact for o in orders}
        if len(values) > 1:
            split += 1
    ok = rank_bad == 0 and matroid_bad == 0 and split == 0
    record(
        9,
        ok,
        f"rank vs numeric: {100 - rank_bad}/100; matroid components vs brute force: "
        f"{matroid_checked - matroid_bad}/{matroid_checked}; confluence over {len(orders)} orders: "
        f"{len(graphs) - split}/{len(graphs)} rigid graphs",
    )
    assert ok


def test_criterion_10_out_of_scope():
    ACCEPTANCE_LINES.append("criterion 10: EXCLUDED  values that need edge lists not available as text")
    pytest.skip("excluded: reference graphs are given only as drawings")
