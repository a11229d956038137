"""Dimension lifts: embedding, contra-embedding, descendants, Leibniz expansion."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graphs import (
    GraphSum,
    KontsevichGraph,
    MicroGraph,
    canonicalize,
    is_wellformed_nambu,
    permute_casimir_species,
    serialize_encoding,
)

__all__ = [
    "LiftChoice",
    "embed",
    "contra_embed",
    "external_casimir_arrows",
    "descendant_list",
    "descendants",
    "kontsevich_expand",
    "vanishing_subset",
]


def _require_wellformed(graph: MicroGraph):
    ok, problems = is_wellformed_nambu(graph)
    if not ok:
        raise ValueError(f"ill-formed micro-graph {serialize_encoding(graph)}: {'; '.join(problems)}")


def embed(graph: MicroGraph) -> MicroGraph:
    """Attach a new Casimir a^{d-1} to every Levi-Civita vertex as its last slot."""
    _require_wellformed(graph)
    k = graph.d - 1
    targets = tuple(t + (graph.casimir(v, k),) for v, t in zip(graph.lc_vertices, graph.targets))
    return MicroGraph(graph.d + 1, graph.m, graph.n, targets)


def contra_embed(graph: MicroGraph) -> MicroGraph:
    """Embedding 3D -> 4D followed by the species swap a^1 <-> a^2."""
    if graph.d != 3:
        raise ValueError("contra-embedding is defined for d = 3; use embed + permute_casimir_species")
    return permute_casimir_species(embed(graph), (2, 1))


def external_casimir_arrows(graph: MicroGraph) -> list[tuple[int, int]]:
    """``(vertex, slot)`` of every arrow into a Casimir owned by another vertex."""
    out = []
    for v, t in zip(graph.lc_vertices, graph.targets):
        own = set(graph.own_casimirs(v))
        for s, x in enumerate(t):
            if graph.role(x)[0] == "casimir" and x not in own:
                out.append((v, s))
    return out


@dataclass(frozen=True)
class LiftChoice:
    """Which external Casimir arrows are redirected to the new Casimir."""

    arrows: tuple[tuple[int, int], ...]
    redirected: tuple[bool, ...]

    @property
    def is_embedding(self) -> bool:
        return not any(self.redirected)

    @property
    def is_full_redirect(self) -> bool:
        return all(self.redirected)


def _apply_choice(graph: MicroGraph, choice: LiftChoice) -> MicroGraph:
    lifted = embed(graph)
    new_species = graph.d - 1
    targets = [list(t) for t in lifted.targets]
    for (v, s), flip in zip(choice.arrows, choice.redirected):
        if flip:
            parent = graph.role(graph.tuple_of(v)[s])[2]
            targets[v - graph.m][s] = lifted.casimir(parent, new_species)
    return MicroGraph(lifted.d, lifted.m, lifted.n, tuple(map(tuple, targets)))


def descendant_list(graph: MicroGraph, drop_zero: bool = True) -> list[tuple[LiftChoice, MicroGraph, int]]:
    """All ``2^k`` Leibniz lifts (``k`` external Casimir arrows), canonicalized.

    Each entry is ``(choice, sorted graph, sign)``; zero-flagged lifts are
    dropped unless ``drop_zero`` is false (they then carry sign 0).
    """
    _require_wellformed(graph)
    arrows = tuple(external_casimir_arrows(graph))
    out = []
    for flips in itertools.product((False, True), repeat=len(arrows)):
        choice = LiftChoice(arrows, flips)
        g, sign = canonicalize(_apply_choice(graph, choice))
        if sign == 0 and drop_zero:
            continue
        out.append((choice, g, sign))
    return out


def descendants(graph: MicroGraph, count_mode: str = "raw", drop_zero: bool = True) -> GraphSum:
    """Descendants in dimension ``d+1`` as a graph sum under ``count_mode``."""
    raw = GraphSum(tuple((sign, g) for _, g, sign in descendant_list(graph, drop_zero) if sign or not drop_zero))
    return raw if count_mode == "raw" else raw.normalized(count_mode)


def kontsevich_expand(gs: GraphSum, d: int, count_mode: str = "canonical", drop_zero: bool = True) -> GraphSum:
    """Expand Kontsevich graphs into Nambu micro-graphs over dimension ``d``.

    Every wedge becomes a Levi-Civita vertex with ordered tuple
    ``(L, R, a^1, ..., a^{d-2})``; an arrow into another wedge lands, by the
    Leibniz rule, on that copy's rho or on one of its ``d-2`` Casimirs.
    """
    if d < 3:
        raise ValueError("Kontsevich expansion into micro-graphs needs d >= 3")
    staged = []
    for coeff, kg in gs.terms:
        if not isinstance(kg, KontsevichGraph):
            raise TypeError("kontsevich_expand expects a sum of Kontsevich graphs")
        m, n = kg.m, kg.n
        options = []
        for w in kg.wedges:
            for x in w:
                if x < m:
                    options.append((x,))
                else:
                    options.append((x,) + tuple(x + k * n for k in range(1, d - 1)))
        for pick in itertools.product(*options):
            targets = []
            for i in range(n):
                own = tuple(m + i + k * n for k in range(1, d - 1))
                targets.append(tuple(pick[2 * i:2 * i + 2]) + own)
            g = MicroGraph(d, m, n, tuple(targets))
            h, sign = canonicalize(g)
            if sign == 0 and drop_zero:
                continue
            staged.append((coeff * sign if sign else coeff, h))
    raw = GraphSum(tuple(staged))
    return raw if count_mode == "raw" else raw.normalized(count_mode)


def vanishing_subset(gs: GraphSum, workers: int = 1) -> list[MicroGraph]:
    """Graphs of ``gs`` whose individual formula is identically zero."""
    from .polyalg import is_vanishing

    graphs = [g for _, g in gs.terms]
    if workers <= 1:
        return [g for g in graphs if is_vanishing(g)]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        flags = list(pool.map(is_vanishing, graphs, chunksize=8))
    return [g for g, f in zip(graphs, flags) if f]
