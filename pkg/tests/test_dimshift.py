from hypothesis import given, settings
from hypothesis import strategies as st

from nambu_graphs.catalogue import bare_bracket, builtin, graph_no10, sunflower
from nambu_graphs.dimshift import (
    contra_embed,
    descendant_list,
    descendants,
    embed,
    external_casimir_arrows,
    kontsevich_expand,
)
from nambu_graphs.graphs import GraphSum, KontsevichGraph, is_wellformed_nambu, serialize_encoding

from conftest import micro_graphs


def test_embedding_strings():
    assert serialize_encoding(embed(builtin("a1"))) == "(0,2,4,7;1,3,5,8;1,2,6,9)"
    assert serialize_encoding(embed(graph_no10())) == "(0,1,4,7;1,6,5,8;4,5,6,9)"


def test_contra_embedding_swaps_species():
    # a^1 labels 4,5,6 trade places with a^2 labels 7,8,9
    assert serialize_encoding(contra_embed(graph_no10())) == "(0,1,7,4;1,9,8,5;7,8,9,6)"


def test_no10_external_arrows():
    # vertex 2 points at Casimir 6, vertex 3 at Casimirs 4 and 5
    assert external_casimir_arrows(graph_no10()) == [(2, 1), (3, 0), (3, 1)]
    lifts = descendant_list(graph_no10(), drop_zero=False)
    assert len(lifts) == 8
    assert sum(c.is_embedding for c, _, _ in lifts) == 1
    assert sum(c.is_full_redirect for c, _, _ in lifts) == 1


def test_bracket_has_a_single_descendant():
    (choice, g, sign), = descendant_list(bare_bracket())
    assert choice.is_embedding and sign == 1
    assert serialize_encoding(g) == "(0,1,3,4)"


def test_single_wedge_expands_to_bracket():
    gs = kontsevich_expand(GraphSum(((1, KontsevichGraph(2, 1, ((0, 1),))),)), 3)
    assert [serialize_encoding(g) for g in gs.graphs] == ["(0,1,3)"]


def test_sunflower_raw_expansion_size():
    # every arrow into a wedge has d-1 landing options: 2*4*4 + 2*4*4 = 64
    raw = kontsevich_expand(sunflower(), 3, "raw", drop_zero=False)
    assert len(raw) == 64
    assert len(kontsevich_expand(sunflower(), 3, "raw")) < 64


@given(micro_graphs(n=st.integers(1, 3)))
def test_descendants_are_wellformed(g):
    k = len(external_casimir_arrows(g))
    lifts = descendant_list(g, drop_zero=False)
    assert len(lifts) == 2**k
    for _, h, _ in lifts:
        assert h.d == g.d + 1 and is_wellformed_nambu(h)[0]


def _lift_sum(gs: GraphSum) -> GraphSum:
    terms = []
    for c, g in gs.terms:
        terms.extend((c * s, h) for s, h in descendants(g).terms)
    return GraphSum(tuple(terms)).normalized("canonical")


def _same_sum(a: GraphSum, b: GraphSum) -> bool:
    return {g: c for c, g in a.terms} == {g: c for c, g in b.terms}


@st.composite
def kontsevich_graphs(draw):
    m, n = draw(st.integers(1, 2)), draw(st.integers(1, 3))
    wedges = tuple(
        tuple(draw(st.lists(st.integers(0, m + n - 1), min_size=2, max_size=2, unique=True))) for _ in range(n)
    )
    return KontsevichGraph(m, n, wedges)


def test_sunflower_lift_commutes_with_expansion():
    assert _same_sum(_lift_sum(kontsevich_expand(sunflower(), 3)), kontsevich_expand(sunflower(), 4))


@settings(max_examples=40, deadline=None)
@given(kontsevich_graphs())
def test_lift_commutes_with_expansion(k):
    gs = GraphSum(((1, k),))
    assert _same_sum(_lift_sum(kontsevich_expand(gs, 3)), kontsevich_expand(gs, 4))
