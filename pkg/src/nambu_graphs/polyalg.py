"""Exact differential-polynomial evaluation of Nambu micro-graphs.

A micro-graph's formula is the sum over one permutation of ``1..d`` per
Levi-Civita vertex (the only index assignments the epsilon symbols keep) of
the signed product of vertex contents.  Every jet factor is identified by the
multiset of derivative directions landing on its vertex; a multiset over
``1..d`` is stored as the base-``B`` number whose ``j``-th digit counts
direction ``j+1``.  Rows of such codes are merged with ``numpy.unique``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .graphs import (
    GraphSum,
    MicroGraph,
    automorphisms,
    canonicalize,
    is_wellformed_nambu,
    serialize_encoding,
)

__all__ = [
    "JetMonomial",
    "DiffPolynomial",
    "Eq2Split",
    "PairingCertificate",
    "signed_terms",
    "evaluate",
    "evaluate_sum",
    "is_vanishing",
    "eq2_split",
    "pairing_certificate",
    "blockwise_vanishing",
    "numeric_probe",
    "direct_value",
    "random_data",
]

MultiIndex = tuple[int, ...]


@dataclass(frozen=True, order=True)
class JetMonomial:
    """Product of jets: one rho factor per Levi-Civita vertex, ``n`` factors of
    every Casimir species, and one derivative multi-index per sink slot.

    Multi-indices are sorted tuples over ``1..d``; the empty tuple is an
    undifferentiated rho (or an untouched sink argument).
    """

    sinks: tuple[MultiIndex, ...]
    rho: tuple[MultiIndex, ...]
    casimirs: tuple[tuple[MultiIndex, ...], ...]

    def degree(self) -> int:
        return sum(len(a) for a in self.rho) + sum(len(a) for s in self.casimirs for a in s)

    def times_casimir(self, species: int, factors: tuple[MultiIndex, ...]) -> "JetMonomial":
        """Append a new species (``species`` must be the next one) with ``factors``."""
        assert species == len(self.casimirs) + 1
        return JetMonomial(self.sinks, self.rho, self.casimirs + (tuple(sorted(factors)),))

    def __str__(self):
        def jet(name, idx):
            return name if not idx else f"{name}_{{{''.join(map(str, idx))}}}"

        parts = [jet("rho", a) for a in self.rho]
        for k, spec in enumerate(self.casimirs, start=1):
            parts += [jet(f"a{k}", a) for a in spec]
        parts += [f"d_{{{''.join(map(str, a))}}}(f{s})" if a else f"f{s}" for s, a in enumerate(self.sinks)]
        return " ".join(parts)


Coefficient = Union[int, Fraction]


@dataclass
class DiffPolynomial:
    """Canonical map ``JetMonomial -> exact coefficient`` without zero entries."""

    d: int
    m: int
    n: int
    coeffs: dict[JetMonomial, Coefficient] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {k: v for k, v in self.coeffs.items() if v != 0}

    @property
    def meta(self) -> tuple[int, int, int]:
        return (self.d, self.m, self.n)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, DiffPolynomial):
            return NotImplemented
        return self.meta == other.meta and self.coeffs == other.coeffs

    def _check(self, other: "DiffPolynomial"):
        if self.meta != other.meta:
            raise ValueError(f"polynomial signatures differ: {self.meta} vs {other.meta}")

    def __add__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return DiffPolynomial(self.d, self.m, self.n, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffPolynomial":
        c = Fraction(c)
        if c.denominator == 1:
            c = c.numerator
        return DiffPolynomial(self.d, self.m, self.n, {k: c * v for k, v in self.coeffs.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def sorted_terms(self) -> list[tuple[JetMonomial, Coefficient]]:
        """Terms ordered by (sink multi-indices, rho factors, Casimir factors)."""
        return sorted(self.coeffs.items())

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "n": self.n,
            "terms": [
                {
                    "coeff": str(c),
                    "rho": [list(a) for a in mono.rho],
                    "casimirs": {str(k): [list(a) for a in s] for k, s in enumerate(mono.casimirs, start=1)},
                    "sinks": [list(a) for a in mono.sinks],
                }
                for mono, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiffPolynomial":
        coeffs = {}
        for t in data["terms"]:
            cas = tuple(
                tuple(tuple(a) for a in t["casimirs"][str(k)]) for k in range(1, len(t["casimirs"]) + 1)
            )
            mono = JetMonomial(
                tuple(tuple(a) for a in t["sinks"]), tuple(tuple(a) for a in t["rho"]), cas
            )
            c = Fraction(t["coeff"])
            coeffs[mono] = c.numerator if c.denominator == 1 else c
        return cls(data["d"], data["m"], data["n"], coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        return "\n".join(f"{c:+} * {mono}" for mono, c in self.sorted_terms())


# ---------------------------------------------------------------- expansion


@lru_cache(maxsize=None)
def _perm_table(d: int) -> tuple[np.ndarray, np.ndarray]:
    """All permutations of 1..d (rows) and their parities."""
    perms = np.array(list(itertools.permutations(range(1, d + 1))), dtype=np.int8)
    signs = np.array(
        [-1 if sum(p[i] > p[j] for i in range(d) for j in range(i + 1, d)) % 2 else 1 for p in perms],
        dtype=np.int8,
    )
    perms.setflags(write=False)
    signs.setflags(write=False)
    return perms, signs


@dataclass(frozen=True)
class _Layout:
    """Column layout of expanded term rows for one graph."""

    base: int
    incoming: dict  # label -> list of (vertex offset, slot)

    @classmethod
    def of(cls, graph: MicroGraph) -> "_Layout":
        incoming = {x: [(v - graph.m, s) for v, s in e] for x, e in graph.in_edges().items()}
        base = max((len(e) for e in incoming.values()), default=0) + 1
        return cls(base, incoming)


def _require_wellformed(graph: MicroGraph):
    ok, problems = is_wellformed_nambu(graph)
    if not ok:
        raise ValueError(f"ill-formed Nambu micro-graph {serialize_encoding(graph)}: {'; '.join(problems)}")


def signed_terms(graph: MicroGraph, fixed: dict[int, int] | None = None):
    """Expand all signed index assignments as arrays.

    Returns ``(grid, codes, signs, base)``: ``grid[N, n]`` holds the permutation
    row used by each Levi-Civita vertex, ``codes[N, C]`` the monomial key of each
    term (sinks, then rho columns sorted, then each Casimir species sorted) and
    ``signs[N]`` the product of permutation parities.  ``fixed`` pins vertex
    offsets to a permutation row.
    """
    d, m, n = graph.d, graph.m, graph.n
    perms, psigns = _perm_table(d)
    nperm = len(perms)
    fixed = fixed or {}
    axes = [np.array([fixed[v]]) if v in fixed else np.arange(nperm) for v in range(n)]
    if n:
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    else:
        grid = np.zeros((1, 0), dtype=np.int64)
    nrows = len(grid)
    layout = _Layout.of(graph)
    base = layout.base
    dtype = np.int64 if base ** d >= 2**31 else np.int32
    powers = np.array([0] + [base ** (j - 1) for j in range(1, d + 1)], dtype=dtype)

    def code(label: int) -> np.ndarray:
        out = np.zeros(nrows, dtype=dtype)
        for v, s in layout.incoming[label]:
            out += powers[perms[grid[:, v], s]]
        return out

    blocks = []
    lc = np.stack([code(m + i) for i in range(n)], axis=1) if n else np.zeros((nrows, 0), dtype)
    blocks.append(np.sort(lc, axis=1))
    for k in range(1, d - 1):
        cols = np.stack([code(m + k * n + i) for i in range(n)], axis=1)
        blocks.append(np.sort(cols, axis=1))
    sinks = np.stack([code(s) for s in range(m)], axis=1) if m else np.zeros((nrows, 0), dtype)
    codes = np.concatenate([sinks] + blocks, axis=1)
    signs = np.prod(psigns[grid], axis=1, dtype=np.int64) if n else np.ones(nrows, dtype=np.int64)
    return grid, codes, signs, base


def _pack(codes: np.ndarray, base: int, d: int) -> np.ndarray:
    """Pack code rows into a 1-D array of exact fixed-width keys."""
    nrows, ncols = codes.shape
    bits = max(1, (base**d - 1).bit_length())
    per_word = max(1, 63 // bits)
    nwords = -(-ncols // per_word)
    words = np.zeros((nrows, nwords), dtype=np.int64)
    for j in range(ncols):
        w, pos = divmod(j, per_word)
        words[:, w] |= codes[:, j].astype(np.int64) << (bits * pos)
    if nwords == 1:
        return words[:, 0]
    return np.ascontiguousarray(words).view(np.dtype((np.void, 8 * nwords))).ravel()


def _reduce(codes: np.ndarray, signs: np.ndarray, base: int, d: int):
    """Merge equal rows; returns ``(unique rows, summed coefficients, inverse)``."""
    if codes.shape[1] == 0:
        total = np.array([signs.sum()], dtype=np.int64)
        return codes[:1], total, np.zeros(len(codes), dtype=np.int64)
    keys = _pack(codes, base, d)
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    coeffs = np.bincount(inverse, weights=signs, minlength=len(first))
    return codes[first], np.rint(coeffs).astype(np.int64), inverse


def _decode(code: int, base: int, d: int) -> MultiIndex:
    out = []
    for j in range(1, d + 1):
        code, count = divmod(code, base)
        out.extend([j] * count)
    return tuple(out)


def _to_polynomial(graph: MicroGraph, rows: np.ndarray, coeffs: np.ndarray, base: int) -> DiffPolynomial:
    d, m, n = graph.d, graph.m, graph.n
    result = {}
    for row, c in zip(rows.tolist(), coeffs.tolist()):
        if c == 0:
            continue
        idx = [_decode(x, base, d) for x in row]
        sinks = tuple(idx[:m])
        rho = tuple(sorted(idx[m:m + n]))
        cas = tuple(tuple(sorted(idx[m + k * n:m + (k + 1) * n])) for k in range(1, d - 1))
        result[JetMonomial(sinks, rho, cas)] = int(c)
    return DiffPolynomial(d, m, n, result)


def _evaluate_block(args) -> tuple[np.ndarray, np.ndarray, int]:
    graph, rows = args
    parts_codes, parts_coeffs = [], []
    base = 0
    for r in rows:
        _, codes, signs, base = signed_terms(graph, {0: r} if graph.n else None)
        u, c, _ = _reduce(codes, signs, base, graph.d)
        keep = c != 0
        parts_codes.append(u[keep])
        parts_coeffs.append(c[keep])
    return np.concatenate(parts_codes), np.concatenate(parts_coeffs), base


def evaluate(graph: MicroGraph, workers: int = 1) -> DiffPolynomial:
    """Exact formula of ``graph`` as a canonical differential polynomial.

    ``workers > 1`` splits the expansion over the permutations of the first
    Levi-Civita vertex; the merged result does not depend on the split.
    """
    _require_wellformed(graph)
    if graph.has_repeated_target:
        return DiffPolynomial(graph.d, graph.m, graph.n)
    if workers <= 1 or graph.n == 0:
        _, codes, signs, base = signed_terms(graph)
        rows, coeffs, _ = _reduce(codes, signs, base, graph.d)
        return _to_polynomial(graph, rows, coeffs, base)
    nperm = math.factorial(graph.d)
    chunks = [list(range(i, nperm, workers)) for i in range(min(workers, nperm))]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_evaluate_block, [(graph, c) for c in chunks]))
    codes = np.concatenate([p[0] for p in parts])
    coeffs = np.concatenate([p[1] for p in parts])
    base = parts[0][2]
    if len(codes) == 0:
        return DiffPolynomial(graph.d, graph.m, graph.n)
    rows, total, _ = _reduce(codes, coeffs, base, graph.d)
    return _to_polynomial(graph, rows, total, base)


def evaluate_sum(gs: GraphSum, workers: int = 1) -> DiffPolynomial:
    """Coefficient-weighted sum of the formulas of the terms of ``gs``."""
    if not gs.terms:
        raise ValueError("empty graph sum has no signature")
    sig = gs.signature
    if sig[0] != "micro":
        raise ValueError("evaluate_sum needs micro-graphs; expand Kontsevich sums first")
    _, d, m, n = sig
    total = DiffPolynomial(d, m, n)
    for c, g in gs.terms:
        total = total + evaluate(g, workers).scale(c)
    return total


def is_vanishing(obj: MicroGraph | GraphSum, workers: int = 1) -> bool:
    """True iff the formula is identically zero."""
    if isinstance(obj, GraphSum):
        return evaluate_sum(obj, workers).is_zero()
    if workers > 1:
        return evaluate(obj, workers).is_zero()
    _require_wellformed(obj)
    if obj.has_repeated_target:
        return True
    _, codes, signs, base = signed_terms(obj)
    _, coeffs, _ = _reduce(codes, signs, base, obj.d)
    return not np.any(coeffs)


# ---------------------------------------------------------------- embedding split


@dataclass
class Eq2Split:
    """Split of an embedded graph's formula.

    ``head`` holds the monomials whose new-Casimir factors are all the first
    derivative along the new direction; ``cross`` holds the rest.  ``reduced``
    is ``head`` with those factors stripped, a polynomial in one dimension less.
    """

    head: DiffPolynomial
    cross: DiffPolynomial
    reduced: DiffPolynomial

    @property
    def full(self) -> DiffPolynomial:
        return self.head + self.cross


def lift_by_new_casimir(poly: DiffPolynomial) -> DiffPolynomial:
    """Multiply every monomial by ``(d a^{d-1} / d x^{d+1})^n``."""
    d, n = poly.d + 1, poly.n
    factors = tuple((d,) for _ in range(n))
    return DiffPolynomial(
        d, poly.m, n, {mono.times_casimir(d - 2, factors): c for mono, c in poly.coeffs.items()}
    )


def eq2_split(original: MicroGraph, embedded: MicroGraph, workers: int = 1) -> Eq2Split:
    from .dimshift import embed

    expected, s1 = canonicalize(embed(original))
    given, s2 = canonicalize(embedded)
    if expected != given or s1 == 0 or s1 != s2:
        raise ValueError(
            f"{serialize_encoding(embedded)} is not the embedding of {serialize_encoding(original)}"
        )
    full = evaluate(embedded, workers)
    d, m, n = full.meta
    marker = tuple((d,) for _ in range(n))
    head, cross, reduced = {}, {}, {}
    for mono, c in full.coeffs.items():
        if mono.casimirs and mono.casimirs[-1] == marker:
            head[mono] = c
            reduced[JetMonomial(mono.sinks, mono.rho, mono.casimirs[:-1])] = c
        else:
            cross[mono] = c
    return Eq2Split(
        DiffPolynomial(d, m, n, head),
        DiffPolynomial(d, m, n, cross),
        DiffPolynomial(d - 1, m, n, reduced),
    )


# ---------------------------------------------------------------- certificates


@dataclass
class PairingCertificate:
    """Disjoint pairing of expanded terms into equal-monomial, opposite-sign pairs.

    Terms are tuples of per-vertex permutations (index assigned to each slot).
    ``transposition_pairs`` counts pairs whose two assignments differ by one
    swap inside a single Levi-Civita vertex.  ``moved_casimirs`` lists Casimir
    labels moved by some nontrivial automorphism; ``marked_casimirs`` the
    Casimirs targeted by the swapped slots of the transposition pairs.
    """

    pairs: list[tuple[tuple, tuple]]
    residue: list[tuple]
    method: str
    transposition_pairs: int = 0
    moved_casimirs: tuple[int, ...] = ()
    marked_casimirs: tuple[int, ...] = ()

    @property
    def valid(self) -> bool:
        if self.residue:
            return False
        seen = set()
        for a, b in self.pairs:
            if a in seen or b in seen or a == b:
                return False
            seen.update((a, b))
        return True

    @property
    def strict(self) -> bool:
        """Every pair is a single-transposition pair."""
        return self.valid and self.transposition_pairs == len(self.pairs)

    def summary(self) -> dict:
        return {
            "method": self.method,
            "valid": self.valid,
            "pairs": len(self.pairs),
            "residue": len(self.residue),
            "transposition_pairs": self.transposition_pairs,
            "moved_casimirs": list(self.moved_casimirs),
            "marked_casimirs": list(self.marked_casimirs),
        }


def _assignment(perms: np.ndarray, grid_row) -> tuple:
    return tuple(tuple(int(x) for x in perms[p]) for p in grid_row)


def _transposition_partner(a: tuple, b: tuple):
    """Return ``(vertex, slot_i, slot_j)`` if ``b`` is ``a`` with one swap, else None."""
    diff = [(v, i) for v, (p, q) in enumerate(zip(a, b)) for i in range(len(p)) if p[i] != q[i]]
    if len(diff) != 2 or diff[0][0] != diff[1][0]:
        return None
    v, i = diff[0]
    _, j = diff[1]
    if a[v][i] == b[v][j] and a[v][j] == b[v][i]:
        return v, i, j
    return None


def _moved_casimirs(graph: MicroGraph) -> tuple[int, ...]:
    moved = set()
    for aut in automorphisms(graph):
        for x in range(graph.m + graph.n, graph.num_vertices):
            if aut.image(graph, x) != x:
                moved.add(x)
    return tuple(sorted(moved))


def _automorphism_pairing(graph: MicroGraph, grid, perms) -> list[tuple[tuple, tuple]] | None:
    """Pair each term with its image under a sign-reversing involution."""
    from .graphs import is_zero_by_symmetry

    zero, aut = is_zero_by_symmetry(graph)
    if not zero:
        return None
    if not aut.compose(aut).is_identity:
        return None
    m = graph.m
    # slot map: (vertex offset, slot) -> (image vertex offset, slot)
    slot_map = {}
    for v in graph.lc_vertices:
        t = graph.tuple_of(v)
        w = aut.image(graph, v)
        tw = graph.tuple_of(w)
        for s, x in enumerate(t):
            slot_map[(v - m, s)] = (w - m, tw.index(aut.image(graph, x)))
    pairs, seen = [], set()
    for row in grid:
        a = _assignment(perms, row)
        if a in seen:
            continue
        b = [[0] * graph.d for _ in range(graph.n)]
        for (v, s), (w, s2) in slot_map.items():
            b[w][s2] = a[v][s]
        b = tuple(tuple(x) for x in b)
        if b == a or b in seen:
            return None
        seen.update((a, b))
        pairs.append((a, b))
    return pairs


def pairing_certificate(graph: MicroGraph, use_automorphism: bool = True) -> PairingCertificate:
    """Pair the expanded terms of a vanishing graph.

    Zero-by-symmetry graphs are paired by their sign-reversing automorphism.
    Otherwise terms are grouped by monomial; within a class, plus and minus
    terms differing by one transposition are matched greedily in term order,
    the remainder by maximum bipartite matching on the same adjacency, and any
    leftovers in term order.  An unbalanced class leaves a residue.
    """
    _require_wellformed(graph)
    if graph.has_repeated_target:
        raise ValueError("repeated-target graphs vanish termwise; no pairing to certify")
    grid, codes, signs, base = signed_terms(graph)
    perms, _ = _perm_table(graph.d)
    rows, coeffs, inverse = _reduce(codes, signs, base, graph.d)
    if np.any(coeffs != 0):
        raise ValueError(f"{serialize_encoding(graph)} does not vanish; pairing needs a vanishing graph")
    moved = _moved_casimirs(graph)

    if use_automorphism:
        pairs = _automorphism_pairing(graph, grid, perms)
        if pairs is not None:
            ntrans = sum(_transposition_partner(a, b) is not None for a, b in pairs)
            return PairingCertificate(pairs, [], "automorphism", ntrans, moved)

    order = np.argsort(inverse, kind="stable")
    bounds = np.flatnonzero(np.diff(inverse[order])) + 1
    pairs, residue = [], []
    ntrans = 0
    marked = set()
    for cls in np.split(order, bounds):
        plus = [_assignment(perms, grid[i]) for i in cls if signs[i] > 0]
        minus = [_assignment(perms, grid[i]) for i in cls if signs[i] < 0]
        adjacency = {}
        for i, a in enumerate(plus):
            for j, b in enumerate(minus):
                t = _transposition_partner(a, b)
                if t is not None:
                    adjacency[(i, j)] = t
        chosen, used_p, used_m = [], set(), set()
        for i, j in sorted(adjacency):
            if i not in used_p and j not in used_m:
                chosen.append((i, j))
                used_p.add(i)
                used_m.add(j)
        if adjacency and len(chosen) < min(len(plus), len(minus)):
            ij = np.array(sorted(adjacency))
            mat = csr_matrix((np.ones(len(ij)), (ij[:, 0], ij[:, 1])), shape=(len(plus), len(minus)))
            match = maximum_bipartite_matching(mat, perm_type="column")
            if (match >= 0).sum() > len(chosen):
                chosen = [(i, int(match[i])) for i in range(len(plus)) if match[i] >= 0]
        for i, j in chosen:
            v, s1, s2 = adjacency[(i, j)]
            t = graph.targets[v]
            marked.update(x for x in (t[s1], t[s2]) if x >= graph.m + graph.n)
            pairs.append((plus[i], minus[j]))
        ntrans += len(chosen)
        rest_p = [a for i, a in enumerate(plus) if i not in {c[0] for c in chosen}]
        rest_m = [b for j, b in enumerate(minus) if j not in {c[1] for c in chosen}]
        for a, b in zip(rest_p, rest_m):
            pairs.append((a, b))
        k = min(len(rest_p), len(rest_m))
        residue.extend(rest_p[k:] + rest_m[k:])
    return PairingCertificate(pairs, residue, "matching", ntrans, moved, tuple(sorted(marked)))


def blockwise_vanishing(graph: MicroGraph, lc_vertex: int) -> bool:
    """True iff every fixed permutation on ``lc_vertex`` gives a zero partial sum."""
    _require_wellformed(graph)
    if not graph.m <= lc_vertex < graph.m + graph.n:
        raise ValueError(f"{lc_vertex} is not a Levi-Civita vertex label")
    if graph.has_repeated_target:
        return True
    offset = lc_vertex - graph.m
    for p in range(math.factorial(graph.d)):
        _, codes, signs, base = signed_terms(graph, {offset: p})
        _, coeffs, _ = _reduce(codes, signs, base, graph.d)
        if np.any(coeffs != 0):
            return False
    return True


# ---------------------------------------------------------------- numeric oracle


class _Poly:
    """Dense-enough integer polynomial ``{exponent tuple: coefficient}``."""

    def __init__(self, terms: dict[tuple[int, ...], int]):
        self.terms = {e: c for e, c in terms.items() if c}

    def derivative(self, directions: MultiIndex) -> "_Poly":
        terms = dict(self.terms)
        for j in directions:
            new = {}
            for e, c in terms.items():
                if e[j - 1]:
                    f = list(e)
                    f[j - 1] -= 1
                    f = tuple(f)
                    new[f] = new.get(f, 0) + c * e[j - 1]
            terms = new
        return _Poly(terms)

    def __call__(self, point) -> int:
        return sum(c * math.prod(x**k for x, k in zip(point, e)) for e, c in self.terms.items())


@dataclass
class ProbeData:
    """Random integer test data: rho, Casimirs a^1..a^{d-2}, sink arguments."""

    d: int
    rho: _Poly
    casimirs: list[_Poly]
    sinks: list[_Poly]
    point: tuple[int, ...]

    @lru_cache(maxsize=None)
    def jet(self, which: str, idx: int, directions: MultiIndex) -> int:
        poly = {"rho": lambda: self.rho, "a": lambda: self.casimirs[idx - 1], "f": lambda: self.sinks[idx]}[which]()
        return poly.derivative(directions)(self.point)

    __hash__ = object.__hash__


def random_data(d: int, m: int, rng: np.random.Generator, degree: int = 3, coeff_bound: int = 9) -> ProbeData:
    exps = [e for e in itertools.product(range(degree + 1), repeat=d) if sum(e) <= degree]

    def poly():
        cs = rng.integers(-coeff_bound, coeff_bound + 1, size=len(exps))
        return _Poly({e: int(c) for e, c in zip(exps, cs)})

    rho = poly()
    cas = [poly() for _ in range(d - 2)]
    sinks = [poly() for _ in range(m)]
    point = tuple(int(x) for x in rng.integers(-3, 4, size=d))
    return ProbeData(d, rho, cas, sinks, point)


def instantiate(poly: DiffPolynomial, data: ProbeData):
    """Value of a canonical polynomial at the jets of ``data``."""
    total = 0
    for mono, c in poly.coeffs.items():
        value = c
        for a in mono.rho:
            value *= data.jet("rho", 0, a)
        for k, spec in enumerate(mono.casimirs, start=1):
            for a in spec:
                value *= data.jet("a", k, a)
        for s, a in enumerate(mono.sinks):
            value *= data.jet("f", s, a)
        total += value
    return total


def _epsilon(idx) -> int:
    if len(set(idx)) != len(idx):
        return 0
    inv = sum(1 for i in range(len(idx)) for j in range(i + 1, len(idx)) if idx[i] > idx[j])
    return -1 if inv % 2 else 1


def _content(graph: MicroGraph, data: ProbeData, label: int, directions) -> int:
    role = graph.role(label)
    directions = tuple(sorted(directions))
    if role[0] == "sink":
        return data.jet("f", label, directions)
    if role[0] == "lc":
        return data.jet("rho", 0, directions)
    return data.jet("a", role[1], directions)


def _direct_loop(graph: MicroGraph, data: ProbeData) -> int:
    d, n = graph.d, graph.n
    edges = [(v, s, x) for v, t in zip(graph.lc_vertices, graph.targets) for s, x in enumerate(t)]
    total = 0
    for idx in itertools.product(range(1, d + 1), repeat=n * d):
        value = 1
        for i in range(n):
            value *= _epsilon(idx[i * d:(i + 1) * d])
            if not value:
                break
        if not value:
            continue
        landing: dict[int, list[int]] = {x: [] for x in range(graph.num_vertices)}
        for (v, s, x), j in zip(edges, idx):
            landing[x].append(j)
        for x, dirs in landing.items():
            value *= _content(graph, data, x, dirs)
            if not value:
                break
        total += value
    return total


def _direct_einsum(graph: MicroGraph, data: ProbeData) -> int:
    """The same full index sum, contracted edge by edge with object tensors."""
    d, m, n = graph.d, graph.m, graph.n
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if n * d > len(letters):
        raise ValueError("graph too large for the einsum oracle")
    edge_letter = {}
    for i, t in enumerate(graph.targets):
        for s in range(d):
            edge_letter[(m + i, s)] = letters[i * d + s]
    incoming = graph.in_edges()
    operands, subs = [], []
    scalar = 1
    for x in range(graph.num_vertices):
        in_letters = "".join(edge_letter[e] for e in incoming[x])
        k = len(incoming[x])
        if graph.role(x)[0] == "lc":
            out_letters = "".join(edge_letter[(x, s)] for s in range(d))
            shape = (d,) * (d + k)
            arr = np.empty(shape, dtype=object)
            for idx in itertools.product(range(d), repeat=d + k):
                eps = _epsilon(idx[:d])
                arr[idx] = eps * _content(graph, data, x, tuple(j + 1 for j in idx[d:])) if eps else 0
            letters_here = out_letters + in_letters
        else:
            if k == 0:
                # an untouched sink still contributes its value
                scalar *= _content(graph, data, x, ())
                continue
            arr = np.empty((d,) * k, dtype=object)
            for idx in itertools.product(range(d), repeat=k):
                arr[idx] = _content(graph, data, x, tuple(j + 1 for j in idx))
            letters_here = in_letters
        # a tadpole letter appears twice on its own vertex; take the diagonal
        if len(set(letters_here)) != len(letters_here):
            arr, letters_here = _diagonal(arr, letters_here)
        operands.append(arr)
        subs.append(letters_here)
    value = np.einsum(",".join(subs) + "->", *operands, optimize="greedy")
    return scalar * int(value)


def _diagonal(arr: np.ndarray, letters: str):
    while len(set(letters)) != len(letters):
        seen = {}
        for pos, ch in enumerate(letters):
            if ch in seen:
                first = seen[ch]
                arr = np.diagonal(arr, axis1=first, axis2=pos)
                letters = "".join(c for i, c in enumerate(letters) if i not in (first, pos)) + ch
                break
            seen[ch] = pos
    return np.ascontiguousarray(arr), letters


def direct_value(graph: MicroGraph, data: ProbeData, method: str = "auto") -> int:
    """Brute-force value of a graph's formula over every edge-index assignment."""
    if method == "auto":
        method = "loop" if graph.d ** (graph.n * graph.d) <= 5000 else "einsum"
    if method == "loop":
        return _direct_loop(graph, data)
    if method == "einsum":
        return _direct_einsum(graph, data)
    raise ValueError(f"unknown method {method!r}")


def numeric_probe(
    obj: MicroGraph | GraphSum,
    trials: int = 5,
    seed: int = 0,
    degree: int = 3,
    method: str = "auto",
    return_values: bool = False,
):
    """Compare the symbolic engine against brute-force numeric evaluation.

    Each trial draws integer polynomial data (coefficients in [-9, 9]) for
    rho, every Casimir and every sink argument, plus an integer base point.
    """
    if isinstance(obj, GraphSum):
        _, d, m, n = obj.signature
        poly = evaluate_sum(obj)
        terms = obj.terms
    else:
        d, m = obj.d, obj.m
        poly = evaluate(obj)
        terms = ((1, obj),)
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(trials):
        data = random_data(d, m, rng, degree)
        symbolic = instantiate(poly, data)
        brute = sum(c * direct_value(g, data, method) for c, g in terms)
        values.append((symbolic, brute))
    agree = all(a == b for a, b in values)
    return (agree, values) if return_values else agree
