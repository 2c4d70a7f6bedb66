"""Shared instance builders and the acceptance summary hook."""

from __future__ import annotations

from fractions import Fraction

import pytest

from regulab.core import (
    BipartiteGraph,
    Chain,
    Graph,
    MultipartiteGraph,
    PartiteThreeGraph,
    PartiteVertexSet,
    ThreeGraph,
)
from regulab.generators import SplitMix64, cone_hypergraph


def build_misaligned_cone() -> ThreeGraph:
    """Cone over a 9x9 two-block bipartite graph, blocks split 5/4.

    The 5/4 cut does not align with parts of size 3, so a t=9 run has to
    find the block boundary itself.
    """
    rows = tuple(0b000011111 if a < 5 else 0b111100000 for a in range(9))
    g0 = BipartiteGraph(9, 9, rows)
    return cone_hypergraph(g0, 9).to_three_graph()


def build_clique_union() -> ThreeGraph:
    """Triple systems of three disjoint 9-cliques on 27 vertices."""
    from itertools import combinations

    trips = set()
    for b in range(3):
        base = 9 * b
        trips.update(combinations(range(base, base + 9), 3))
    return ThreeGraph(27, frozenset(trips))


def build_two_clique_noise(n: int = 40, seed: int = 7) -> Graph:
    """Two n/2-cliques plus sparse random crossing edges."""
    rng = SplitMix64(seed)
    half = n // 2
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            same = (u < half) == (v < half)
            if same or rng.bernoulli(Fraction(1, 25)):
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return Graph(n, tuple(rows))


def build_box_chain() -> Chain:
    """Complete tripartite (4,4,4) carrying a 2x2x2 combinatorial box."""
    vs = PartiteVertexSet.of_sizes(4, 4, 4)
    g = MultipartiteGraph.complete(vs)
    trips = [(x, 4 + y, 8 + z) for x in range(2) for y in range(2) for z in range(2)]
    return Chain(g, PartiteThreeGraph.from_triples(vs, trips))


def build_pair_only_chain() -> Chain:
    """Hyperedges depending on the (x, y) pair alone, on a complete host.

    Every pair shows up twice in the octahedral product, so its signs
    square away: the certificate sits exactly at the random baseline
    1/256 no matter how structured the pair pattern is.
    """
    vs = PartiteVertexSet.of_sizes(4, 4, 4)
    g = MultipartiteGraph.complete(vs)
    trips = [
        (x, 4 + y, 8 + z)
        for x in range(4)
        for y in range(4)
        if (x < 2) == (y < 2)
        for z in range(4)
    ]
    return Chain(g, PartiteThreeGraph.from_triples(vs, trips))


def random_small_chain(rng: SplitMix64, max_size: int = 6) -> Chain:
    """Random chain with parts up to max_size and density about 1/2."""
    from regulab.generators import random_chain

    sizes = tuple(1 + rng.below(max_size) for _ in range(3))
    return random_chain(sizes, Fraction(2, 3), Fraction(1, 2), seed=rng.next_u64())


def build_planted_chain_partition():
    """Forty parts of two with 25 planted identity-cell pairs.

    Same-part mass is exactly 1/40, so a run at alpha = 1/20 skips the
    size-halving phase and must clear the planted cells by witness
    splits alone.
    """
    from regulab.partitions import ChainPartition, PairPartition

    n = 80
    parts = tuple(tuple(range(2 * a, 2 * a + 2)) for a in range(40))
    planted = {(2 * i, 2 * i + 1) for i in range(20)} | {
        (0, 3), (0, 5), (1, 4), (1, 6), (2, 5)
    }
    host = (0b11, 0b11)
    pairs = {}
    for a in range(40):
        for b in range(a + 1, 40):
            if (a, b) in planted:
                cells = ((0b01, 0b10), (0b10, 0b01))
            else:
                cells = (host,)
            pairs[(a, b)] = PairPartition(2, 2, 0b11, 0b11, host, cells)
    return ChainPartition(n, parts, pairs)


# ---------------------------------------------------------------------------
# Acceptance summary: one pass/fail line per criterion in the terminal
# summary, driven by the outcomes of tests named test_criterion_*.
# ---------------------------------------------------------------------------

_CRITERION_DOCS: dict[str, str] = {}
_CRITERION_OUTCOMES: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance.py" in item.nodeid and item.name.startswith("test_criterion_"):
            doc = (item.function.__doc__ or "").strip().splitlines()
            _CRITERION_DOCS[item.nodeid] = doc[0] if doc else item.name


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.nodeid in _CRITERION_DOCS:
        _CRITERION_OUTCOMES[item.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_DOCS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid in sorted(_CRITERION_DOCS):
        outcome = _CRITERION_OUTCOMES.get(nodeid, "not run")
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{tag}] {_CRITERION_DOCS[nodeid]}")
