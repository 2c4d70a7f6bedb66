"""Deviation certificates: frozen values and fast/naive agreement."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from regulab.core import (
    BipartiteGraph,
    Chain,
    InvalidStructure,
    MultipartiteGraph,
    PartiteThreeGraph,
    PartiteVertexSet,
)
from regulab.generators import SplitMix64, random_bipartite, random_chain, random_multipartite
from regulab.quasirandom import (
    DeviationFunction2,
    DeviationFunction3,
    PolyFunction,
    c4_sum,
    chain_quasirandomness,
    eta_psi_check,
    graph_pair_quasirandomness,
    graph_quasirandomness,
    is_graph_quasirandom,
    multipartite_graph_quasirandomness,
    oct_sum,
    pair_quasirandomness,
    part_triple_chain,
    tpartite_chain_quasirandomness,
    weak_quasirandom_check,
)
from conftest import build_box_chain, build_pair_only_chain


def test_c4_sum_sign_matrix():
    f = DeviationFunction2.from_rows([[1, -1], [-1, 1]])
    assert c4_sum(f, "fast") == 16
    assert c4_sum(f, "naive") == 16


def test_c4_sum_all_ones():
    f = DeviationFunction2.from_rows([[1] * 3] * 3)
    assert c4_sum(f, "fast") == 3**4


def test_pair_certificate_single_edge():
    bg = BipartiteGraph.from_edges(2, 2, [(0, 0)])
    for mode in ("fast", "naive"):
        cert = pair_quasirandomness(bg, mode=mode)
        assert cert.value == Fraction(7, 256)
        assert not cert.degenerate


def test_pair_certificate_two_blocks():
    bg = BipartiteGraph(4, 4, (0b0011, 0b0011, 0b1100, 0b1100))
    assert pair_quasirandomness(bg).value == Fraction(1, 16)
    assert pair_quasirandomness(bg, mode="naive").value == Fraction(1, 16)


def test_pair_certificate_complete_and_empty():
    assert pair_quasirandomness(BipartiteGraph.complete(3, 4)).value == 0
    cert = pair_quasirandomness(BipartiteGraph.empty(3, 3))
    assert cert.value == 0 and not cert.degenerate


def test_pair_certificate_degenerate_side():
    cert = pair_quasirandomness(BipartiteGraph(0, 3, ()))
    assert cert.degenerate and cert.value == 0


def test_certificate_normalizer_is_size_squared():
    bg = BipartiteGraph.from_edges(2, 2, [(0, 0)])
    cert = pair_quasirandomness(bg)
    assert cert.normalizer == (2 * 2) ** 2
    assert cert.raw_sum == cert.value * cert.normalizer


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_pair_fast_equals_naive(seed):
    rng = SplitMix64(seed)
    na, nb = 1 + rng.below(7), 1 + rng.below(7)
    g = random_bipartite(na, nb, Fraction(1, 2), seed=rng.next_u64())
    a = pair_quasirandomness(g, mode="fast")
    b = pair_quasirandomness(g, mode="naive")
    assert a.raw_sum == b.raw_sum and a.value == b.value


def test_graph_pair_matches_restriction():
    rng = SplitMix64(21)
    from regulab.generators import random_graph

    g = random_graph(8, Fraction(1, 2), seed=6)
    xs, ys = (0, 2, 5), (1, 3, 4, 7)
    cert = graph_pair_quasirandomness(g, xs, ys)
    rows = tuple(
        sum(1 << j for j, y in enumerate(ys) if g.has_edge(x, y)) for x in xs
    )
    direct = pair_quasirandomness(BipartiteGraph(len(xs), len(ys), rows))
    assert cert.value == direct.value


def test_chain_certificate_complete():
    vs = PartiteVertexSet.of_sizes(2, 2, 2)
    g = MultipartiteGraph.complete(vs)
    trips = [(x, 2 + y, 4 + z) for x in range(2) for y in range(2) for z in range(2)]
    c = Chain(g, PartiteThreeGraph.from_triples(vs, trips))
    cert = chain_quasirandomness(c)
    assert cert.value == 0 and cert.raw_sum == 0


def test_chain_certificate_box_pattern():
    c = build_box_chain()
    for mode in ("fast", "naive"):
        cert = chain_quasirandomness(c, mode=mode)
        assert cert.value == Fraction(90309, 16777216)


def test_pair_only_pattern_sits_at_baseline():
    """A hyperedge rule using one pair alone is octahedrally invisible.

    Each pair appears twice in the 8-fold product, so its signs square
    out; any half-density pattern lands exactly on 1/256.
    """
    c = build_pair_only_chain()
    assert chain_quasirandomness(c).value == Fraction(1, 256)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_chain_fast_equals_naive(seed):
    rng = SplitMix64(seed)
    sizes = tuple(1 + rng.below(4) for _ in range(3))
    c = random_chain(sizes, Fraction(2, 3), Fraction(1, 2), seed=rng.next_u64())
    a = chain_quasirandomness(c, mode="fast")
    b = chain_quasirandomness(c, mode="naive")
    assert a.raw_sum == b.raw_sum and a.value == b.value


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_oct_sum_fast_equals_naive(seed):
    rng = SplitMix64(seed)
    sizes = tuple(1 + rng.below(3) for _ in range(3))
    c = random_chain(sizes, Fraction(3, 4), Fraction(1, 2), seed=rng.next_u64())
    f = DeviationFunction3.from_chain(c)
    assert oct_sum(f, "fast") == oct_sum(f, "naive")


def test_graph_quasirandomness_collects_all_pairs():
    g = random_multipartite((3, 3, 3), Fraction(1, 2), seed=2)
    certs = graph_quasirandomness(g)
    assert set(certs) == {(0, 1), (0, 2), (1, 2)}
    assert multipartite_graph_quasirandomness(g) == max(c.value for c in certs.values())


def test_is_graph_quasirandom_threshold():
    vs = PartiteVertexSet.of_sizes(4, 4)
    blocks = BipartiteGraph(4, 4, (0b0011, 0b0011, 0b1100, 0b1100))
    g = MultipartiteGraph(vs, {(0, 1): blocks})
    assert not is_graph_quasirandom(g, Fraction(1, 32))
    assert is_graph_quasirandom(g, Fraction(1, 16))


def test_eta_psi_check_modes_agree():
    rng = SplitMix64(17)
    for _ in range(5):
        c = random_chain((3, 3, 3), Fraction(3, 4), Fraction(1, 2), seed=rng.next_u64())
        psi = PolyFunction(Fraction(1), 1)
        a = eta_psi_check(c, Fraction(1, 4), psi, mode="fast")
        b = eta_psi_check(c, Fraction(1, 4), psi, mode="naive")
        assert a == b


def test_tpartite_matches_per_triple():
    g = random_multipartite((2, 3, 2, 2), Fraction(2, 3), seed=5)
    vs = g.vertex_set
    rng = SplitMix64(9)
    trips = []
    from regulab.core import triangle_count

    for (i, j, k) in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        from itertools import product

        ab, ac, bc = g.pair(i, j), g.pair(i, k), g.pair(j, k)
        for x in range(vs.sizes[i]):
            for y in range(vs.sizes[j]):
                if not ab.has_edge(x, y):
                    continue
                for z in range(vs.sizes[k]):
                    if ac.has_edge(x, z) and bc.has_edge(y, z) and rng.bernoulli(Fraction(1, 2)):
                        trips.append((vs.to_global(i, x), vs.to_global(j, y), vs.to_global(k, z)))
    h = PartiteThreeGraph.from_triples(vs, trips)
    ok, certs = tpartite_chain_quasirandomness(g, h, Fraction(1, 4))
    for (i, j, k), cert in certs.items():
        single = chain_quasirandomness(part_triple_chain(g, h, i, j, k))
        assert cert.value == single.value
    assert ok == all(c.value <= Fraction(1, 4) for c in certs.values())


def test_weak_check_flags_star_links():
    vs = PartiteVertexSet.of_sizes(4, 4, 4)
    h = PartiteThreeGraph.from_triples(
        vs, [(0, 4 + y, 8 + z) for y in range(4) for z in range(4)]
    )
    ok, wit = weak_quasirandom_check(
        h, list(range(4)), list(range(4, 8)), list(range(8, 12)), Fraction(1, 100)
    )
    assert not ok and wit is not None


def test_poly_function_parse_and_eval():
    psi = PolyFunction.parse("1/16,3")
    assert psi(Fraction(1, 2)) == Fraction(1, 128)
    tiny = PolyFunction.parse("2**-100,28")
    assert tiny(Fraction(1)) == Fraction(1, 2**100)
    with pytest.raises(InvalidStructure):
        PolyFunction.parse("nope")
    with pytest.raises(InvalidStructure):
        PolyFunction.parse("1/2")
