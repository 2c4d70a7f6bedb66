"""Shattering dimensions and induced pattern search."""

from fractions import Fraction
from itertools import combinations

import pytest

from regulab.core import BipartiteGraph, CapacityError, ThreeGraph
from regulab.generators import (
    SplitMix64,
    cone_hypergraph,
    make_fd,
    make_vd,
    random_bipartite,
    random_link_hypergraph,
)
from regulab.vcdim import (
    induced_copy_search,
    neighborhood_system,
    vc2_dimension,
    vc_dimension,
)


def test_vc_of_full_subset_system():
    s = neighborhood_system(make_fd(2), side="right")
    d, wit = vc_dimension(s)
    assert d == 2
    assert wit is not None and len(wit.sets[0]) == 2


def test_vc_of_half_graph():
    from regulab.generators import half_graph

    s = neighborhood_system(half_graph(8), side="right")
    d, _ = vc_dimension(s)
    # nested neighborhoods shatter singletons and one pair direction only
    assert d == 1


def test_vc_of_complete_bipartite():
    s = neighborhood_system(BipartiteGraph.complete(3, 3), side="right")
    d, _ = vc_dimension(s)
    assert d == 0  # every neighborhood is the full left side


def test_vc2_of_vd_two():
    h = make_vd(2).to_three_graph()
    d, wit = vc2_dimension(h)
    assert d == 2
    assert wit is not None
    a, b = wit.sets
    assert len(a) == 2 and len(b) == 2 and not set(a) & set(b)
    # the witness realizers cover all 16 patterns of the 2x2 box
    assert len(wit.realizers) == 16


def test_vc2_of_cone_is_at_most_one():
    rng = SplitMix64(8)
    for _ in range(10):
        la, lb = 1 + rng.below(5), 1 + rng.below(5)
        base = random_bipartite(la, lb, Fraction(1, 2), seed=rng.next_u64())
        h = cone_hypergraph(base, 1 + rng.below(6)).to_three_graph()
        d, _ = vc2_dimension(h)
        assert d <= 1


def test_vc2_of_random_link_is_at_most_one():
    for seed in range(5):
        h = random_link_hypergraph(4, 4, 4, seed).to_three_graph()
        d, _ = vc2_dimension(h)
        assert d <= 1


def test_vc2_cap_raises():
    h = make_vd(2).to_three_graph()
    with pytest.raises(CapacityError):
        vc2_dimension(h, cap_n=5)


def test_induced_search_finds_planted_copy():
    f = ThreeGraph.from_triples(4, [(0, 1, 2), (1, 2, 3)])
    # plant f on {2, 4, 5, 7} inside a larger sparse host
    h = ThreeGraph.from_triples(
        9, [(2, 4, 5), (4, 5, 7), (0, 1, 8)]
    )
    wit = induced_copy_search(f, h)
    assert wit is not None
    image = wit.all_vertices()
    assert len(set(image)) == 4
    # the image spans f exactly
    mapped = {tuple(sorted((image[a], image[b], image[c]))) for (a, b, c) in f.triples}
    spanned = {
        t for t in combinations(sorted(image), 3) if h.has_triple(*t)
    }
    assert mapped == spanned


def test_induced_search_rejects_noninduced():
    # single-triple pattern has no induced copy inside a complete 3-graph
    # on 4 vertices? every 3-subset spans exactly its own triple, so it does.
    full4 = ThreeGraph.from_triples(4, list(combinations(range(4), 3)))
    single = ThreeGraph.from_triples(3, [(0, 1, 2)])
    assert induced_copy_search(single, full4) is not None
    # an empty triple pattern needs 3 vertices spanning no hyperedge
    empty3 = ThreeGraph(3, frozenset())
    assert induced_copy_search(empty3, full4) is None


def test_induced_search_absent_pattern():
    f = ThreeGraph.from_triples(4, list(combinations(range(4), 3)))
    h = ThreeGraph.from_triples(6, [(0, 1, 2), (3, 4, 5)])
    assert induced_copy_search(f, h) is None


def test_induced_search_cap():
    f = ThreeGraph(9, frozenset())
    with pytest.raises(CapacityError):
        induced_copy_search(f, ThreeGraph(12, frozenset()), cap=8)
