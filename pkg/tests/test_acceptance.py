"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

All comparisons are exact.  Run with ``pytest tests/test_acceptance.py -v``;
the lines are collected in the "acceptance criteria" summary section.
"""

import time
from collections import Counter

import numpy as np
import pytest

from nambu_graphs.catalogue import BUILTINS, bare_bracket, builtin, graph_no10, hamiltonian_h9, sunflower
from nambu_graphs.dimshift import contra_embed, descendants, embed, kontsevich_expand
from nambu_graphs.experiments import (
    experiment_embedding_resilience,
    experiment_prop1,
    experiment_table1,
    load_pinned,
    vanishing_catalogue,
)
from nambu_graphs.graphs import GraphSum, MicroGraph, automorphisms, canonicalize
from nambu_graphs.polyalg import (
    blockwise_vanishing,
    evaluate,
    evaluate_sum,
    is_vanishing,
    numeric_probe,
    pairing_certificate,
)

from conftest import ACCEPTANCE_LINES

PINS = {k: v["value"] for k, v in load_pinned().items()}


def record(number: int, ok: bool, detail: str, elapsed: float, budget: float):
    ok = ok and elapsed < budget
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.1f}s / {budget:.0f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def table1():
    t0 = time.perf_counter()
    rep = experiment_table1()
    return rep, time.perf_counter() - t0


def test_criterion_01_sunflower_3d():
    t0 = time.perf_counter()
    van3 = vanishing_catalogue(3)
    count, classes = len(van3.graphs), len(van3.classes)
    ok = count == 48 and classes == 12
    detail = f"expansion {count} graphs, {classes} vanishing classes ({len(van3.vanishing)} graphs)"
    assert record(1, ok, detail, time.perf_counter() - t0, 10)


def test_criterion_02_flag_census(table1):
    rep, elapsed = table1
    c = rep.counts
    got = (c["zero"], c["aut"], c["trivial"])
    detail = f"zero/aut/trivial observed {got}, expected (2, 4, 6)"
    assert record(2, got == (2, 4, 6), detail, elapsed, 10)


def test_criterion_03_descendant_multisets(table1):
    rep, elapsed = table1
    r2, r3 = rep.multisets["descendants"], rep.multisets["vanishing_descendants"]
    t2, t3 = rep.counts["descendant_total"], rep.counts["vanishing_descendant_total"]
    ok = (
        Counter(r2) == Counter(PINS["descendant_counts"])
        and Counter(r3) == Counter(PINS["vanishing_descendant_counts"])
        and (t2, t3) == (118, 54)
    )
    detail = f"R2 {r2} R3 {r3}; totals {t2}/{t3} over every vanishing graph"
    assert record(3, ok, detail, elapsed, 120)


def test_criterion_04_graph_no10():
    t0 = time.perf_counter()
    g = graph_no10()
    lifts = descendants(g, "raw")
    vanishing = [h for _, h in lifts.terms if is_vanishing(h)]
    e = canonicalize(embed(g))[0]
    c = canonicalize(contra_embed(g))[0]
    ok = evaluate(g).is_zero() and len(lifts) == 8 and len(vanishing) == 2 and set(vanishing) == {e, c}
    detail = f"zero in 3D, {len(lifts)} descendants, {len(vanishing)} vanishing = embedding + contra-embedding"
    assert record(4, ok, detail, time.perf_counter() - t0, 10)


def test_criterion_05_sunflower_4d():
    t0 = time.perf_counter()
    rep = experiment_prop1()
    c = rep.counts
    detail = (f"expansion {c['expansion_4d']}, vanishing {c['vanishing_4d']}, "
              f"descendants of vanishing 3D {c['vanishing_descendants_of_van3']}, sets equal "
              f"{rep.checks[-2].passed}")
    assert record(5, rep.passed, detail, time.perf_counter() - t0, 300)


def test_criterion_06_hamiltonian_h9():
    t0 = time.perf_counter()
    h9 = hamiltonian_h9()
    assert (h9.d, h9.m, h9.n) == (4, 0, 2)
    zero4, zero5 = evaluate(h9).is_zero(), evaluate(embed(h9)).is_zero()
    assert record(6, zero4 and zero5, f"4D value zero {zero4}, 5D embedding zero {zero5}",
                  time.perf_counter() - t0, 60)


def test_criterion_07_embedding_split():
    t0 = time.perf_counter()
    rep = experiment_embedding_resilience(max_d=4)
    detail = "; ".join(f"{c.name} {c.passed}" for c in rep.checks)
    assert record(7, rep.passed, detail, time.perf_counter() - t0, 60)


def test_criterion_08_no10_blocks_and_pairing():
    t0 = time.perf_counter()
    g = graph_no10()
    blocks = {v: blockwise_vanishing(g, v) for v in g.lc_vertices}
    cert = pairing_certificate(g)
    ok = all(blocks.values()) and cert.valid
    detail = f"blockwise zero per vertex {blocks}; pairing certificate valid {cert.valid} ({len(cert.pairs)} pairs)"
    assert record(8, ok, detail, time.perf_counter() - t0, 10)


def _slot_swap(g: MicroGraph) -> MicroGraph:
    t = list(g.targets[0])
    t[0], t[1] = t[1], t[0]
    return MicroGraph(g.d, g.m, g.n, (tuple(t),) + g.targets[1:])


def _same_sum(a: GraphSum, b: GraphSum) -> bool:
    return {g: c for c, g in a.terms} == {g: c for c, g in b.terms}


def test_criterion_09_property_suite(van3, van4):
    t0 = time.perf_counter()
    catalogued = [builtin(name) for name in BUILTINS if name != "sunflower"]
    catalogued += list(van3.graphs) + list(van4.vanishing)
    failures = Counter()
    for g in van3.graphs[:16] + [bare_bracket(), builtin("a1")]:
        if evaluate(_slot_swap(g)) != -evaluate(g):
            failures["sign"] += 1
    rng = np.random.default_rng(0)
    graphs = van3.graphs
    for _ in range(10):
        i, j = rng.integers(len(graphs), size=2)
        a, b = (int(x) for x in rng.integers(-5, 6, size=2))
        expected = evaluate(graphs[i]).scale(a) + evaluate(graphs[j]).scale(b)
        if evaluate_sum(GraphSum(((a, graphs[i]), (b, graphs[j])))) != expected:
            failures["linearity"] += 1
    for g in van3.graphs:
        poly = evaluate(g)
        if any(poly != poly.scale(aut.sign) for aut in automorphisms(g)):
            failures["automorphism"] += 1
    lifted = []
    for c, g in kontsevich_expand(sunflower(), 3).terms:
        lifted.extend((c * s, h) for s, h in descendants(g).terms)
    if not _same_sum(GraphSum(tuple(lifted)).normalized("canonical"), kontsevich_expand(sunflower(), 4)):
        failures["compatibility"] += 1
    for g in catalogued:
        if not all(numeric_probe(g, trials=1, seed=s) for s in (0, 1, 2)):
            failures["probe"] += 1
    detail = f"{len(catalogued)} catalogued graphs probed on 3 seeds; failures {dict(failures) or 'none'}"
    assert record(9, not failures, detail, time.perf_counter() - t0, 300)


def test_criterion_10_embeddings_into_5d(van4):
    t0 = time.perf_counter()
    bad = [g for g in van4.vanishing if not is_vanishing(embed(g))]
    detail = f"{len(van4.vanishing) - len(bad)}/{len(van4.vanishing)} vanishing 4D graphs keep vanishing in 5D"
    assert record(10, not bad and len(van4.vanishing) == 54, detail, time.perf_counter() - t0, 1800)
