import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nambu_graphs.catalogue import bare_bracket, graph_no10, hamiltonian_h9
from nambu_graphs.dimshift import embed
from nambu_graphs.graphs import (
    GraphSum,
    MicroGraph,
    automorphisms,
    is_wellformed_nambu,
    iso_canonical,
    relabel,
    sort_sign,
)
from nambu_graphs.polyalg import (
    DiffPolynomial,
    JetMonomial,
    direct_value,
    eq2_split,
    evaluate,
    evaluate_sum,
    instantiate,
    is_vanishing,
    numeric_probe,
    pairing_certificate,
    random_data,
)

from conftest import micro_graphs

ZERO_BY_HAND = MicroGraph(3, 1, 3, ((0, 3, 4), (0, 3, 5), (1, 2, 6)))


def _levi_civita_oracle(d=3):
    """rho eps^{i j k} d_i f0 d_j f1 d_k a1, written out from the definition."""
    coeffs = {}
    for p in itertools.permutations(range(1, d + 1)):
        mono = JetMonomial(((p[0],), (p[1],)), ((),), (((p[2],),),))
        coeffs[mono] = sort_sign(p)
    return DiffPolynomial(d, 2, 1, coeffs)


def test_bare_bracket_matches_definition():
    poly = evaluate(bare_bracket())
    assert len(poly) == 6
    assert set(poly.coeffs.values()) == {1, -1}
    assert poly == _levi_civita_oracle()


def test_tadpole_differentiates_own_rho():
    # (1, 0, 2): the first arrow returns to its own vertex
    poly = evaluate(MicroGraph(3, 1, 1, ((1, 0, 2),)))
    for mono, c in poly.coeffs.items():
        i, j, k = mono.rho[0][0], mono.sinks[0][0], mono.casimirs[0][0][0]
        assert c == sort_sign((i, j, k))
    assert len(poly) == 6


def test_known_vanishing_graphs():
    assert evaluate(graph_no10()).is_zero()
    assert evaluate(hamiltonian_h9()).is_zero()
    assert evaluate(ZERO_BY_HAND).is_zero()
    assert not is_vanishing(bare_bracket())


def test_repeated_target_is_zero():
    g = MicroGraph(3, 1, 2, ((0, 0, 3), (0, 1, 4)))
    assert evaluate(g).is_zero() and is_vanishing(g)


def test_workers_do_not_change_result():
    g = embed(graph_no10())
    assert evaluate(g, workers=2) == evaluate(g, workers=1)


def test_json_round_trip():
    poly = evaluate(MicroGraph(3, 1, 2, ((0, 2, 3), (1, 3, 4))))
    text = json.dumps(poly.to_json())
    assert DiffPolynomial.from_json(json.loads(text)) == poly


def test_polynomial_arithmetic():
    p = evaluate(bare_bracket())
    assert (p - p).is_zero()
    assert p.scale(3) == p + p + p
    with pytest.raises(ValueError):
        _ = p + evaluate(graph_no10())


def test_eq2_split_on_control():
    g = bare_bracket()
    split = eq2_split(g, embed(g))
    assert split.full == evaluate(embed(g))
    assert split.reduced == evaluate(g)
    assert not split.cross.is_zero()


def test_eq2_split_rejects_non_embedding():
    with pytest.raises(ValueError):
        eq2_split(bare_bracket(), MicroGraph(4, 2, 1, ((0, 1, 4, 3),)))


def test_certificates():
    cert = pairing_certificate(ZERO_BY_HAND)
    assert cert.valid and cert.method == "automorphism"
    with pytest.raises(ValueError, match="does not vanish"):
        pairing_certificate(bare_bracket())
    assert pairing_certificate(graph_no10()).valid


def test_direct_value_methods_agree():
    rng = np.random.default_rng(3)
    g = MicroGraph(3, 1, 2, ((0, 2, 3), (1, 0, 4)))
    data = random_data(3, 1, rng)
    assert direct_value(g, data, "loop") == direct_value(g, data, "einsum")
    assert instantiate(evaluate(g), data) == direct_value(g, data)


@settings(max_examples=30, deadline=None)
@given(micro_graphs(), st.data())
def test_slot_swap_flips_sign(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    a, b = data.draw(st.permutations(range(g.d)))[:2]
    t = list(g.targets[v])
    t[a], t[b] = t[b], t[a]
    swapped = MicroGraph(g.d, g.m, g.n, g.targets[:v] + (tuple(t),) + g.targets[v + 1:])
    assert evaluate(swapped) == -evaluate(g)


@settings(max_examples=30, deadline=None)
@given(micro_graphs(), st.data())
def test_relabeling_leaves_formula_unchanged(g, data):
    perm = data.draw(st.permutations(range(g.n)))
    assert evaluate(relabel(g, perm)) == evaluate(g)


@settings(max_examples=30, deadline=None)
@given(micro_graphs())
def test_iso_representative_is_wellformed_and_equivalent(g):
    h, sign = iso_canonical(g)
    assert is_wellformed_nambu(h)[0]
    assert evaluate(h).scale(sign) == evaluate(g) or sign == 0


@settings(max_examples=30, deadline=None)
@given(st.data(), st.integers(-4, 4), st.integers(-4, 4))
def test_linearity(data, a, b):
    n = data.draw(st.integers(1, 3))
    shape = dict(d=st.just(3), m=st.just(1), n=st.just(n))
    g, h = data.draw(micro_graphs(**shape)), data.draw(micro_graphs(**shape))
    gs = GraphSum(((a, g), (b, h)))
    assert evaluate_sum(gs) == evaluate(g).scale(a) + evaluate(h).scale(b)


@settings(max_examples=30, deadline=None)
@given(micro_graphs())
def test_automorphism_soundness(g):
    poly = evaluate(g)
    for aut in automorphisms(g):
        assert poly == poly.scale(aut.sign)


@settings(max_examples=15, deadline=None)
@given(micro_graphs(n=st.integers(1, 2)), st.integers(0, 2**16))
def test_numeric_probe_agrees(g, seed):
    assert numeric_probe(g, trials=1, seed=seed)
