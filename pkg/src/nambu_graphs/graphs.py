"""Kontsevich graphs, Nambu micro-graphs, their encodings and symmetries.

Labels are 0-based with sinks first.  For a micro-graph over dimension ``d``
with ``m`` sinks and ``n`` Levi-Civita vertices::

    sinks            0 ... m-1
    Levi-Civita      m ... m+n-1
    Casimir a^k      m+k*n ... m+(k+1)*n-1      (k = 1 ... d-2)

and the Casimir ``a^k`` owned by Levi-Civita vertex ``v`` has label ``v + k*n``.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "EncodingError",
    "KontsevichGraph",
    "MicroGraph",
    "GraphSum",
    "SignedAutomorphism",
    "COUNT_MODES",
    "parse_encoding",
    "serialize_encoding",
    "parse_graph_sum",
    "serialize_graph_sum",
    "graph_to_record",
    "graph_from_record",
    "sort_sign",
    "canonicalize",
    "is_wellformed_nambu",
    "automorphisms",
    "is_zero_by_symmetry",
    "permute_casimir_species",
    "relabel",
    "iso_key",
]

COUNT_MODES = ("raw", "canonical", "iso")

Coefficient = Union[int, Fraction]


class EncodingError(ValueError):
    """Raised for malformed or ill-formed graph encodings."""


def sort_sign(seq: Sequence[int]) -> int:
    """Parity of the permutation sorting ``seq``; 0 if ``seq`` has repeats."""
    if len(set(seq)) != len(seq):
        return 0
    inversions = sum(
        1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j]
    )
    return -1 if inversions % 2 else 1


def _normalize_coefficient(c) -> Coefficient:
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


@dataclass(frozen=True)
class KontsevichGraph:
    """Wedge graph: ``m`` ordered sinks, ``n`` wedges with ordered (L, R) targets."""

    m: int
    n: int
    wedges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "wedges", tuple(tuple(int(x) for x in w) for w in self.wedges))
        if self.m < 0 or self.n < 0:
            raise EncodingError("m and n must be non-negative")
        if len(self.wedges) != self.n:
            raise EncodingError(f"expected {self.n} wedges, got {len(self.wedges)}")
        for w in self.wedges:
            if len(w) != 2:
                raise EncodingError(f"wedge {w} must have exactly 2 targets")
            for t in w:
                if not 0 <= t < self.m + self.n:
                    raise EncodingError(f"target {t} out of range 0..{self.m + self.n - 1}")

    @property
    def kind(self) -> str:
        return "kontsevich"

    @property
    def signature(self) -> tuple:
        return ("kontsevich", None, self.m, self.n)

    @property
    def tuples(self) -> tuple[tuple[int, ...], ...]:
        return self.wedges

    def canonical(self) -> tuple["KontsevichGraph", int]:
        """Sort every wedge pair; the sign is 0 for a doubled edge."""
        sign = 1
        wedges = []
        for w in self.wedges:
            sign *= sort_sign(w)
            wedges.append(tuple(sorted(w)))
        return KontsevichGraph(self.m, self.n, tuple(wedges)), sign

    def __str__(self):
        return serialize_encoding(self)


@dataclass(frozen=True)
class MicroGraph:
    """Nambu micro-graph over dimension ``d``.

    ``targets[i]`` is the ordered d-tuple of arrowheads issued from the
    Levi-Civita vertex with label ``m + i``.  Construction only checks arity and
    label ranges; Nambu well-formedness is checked by :func:`is_wellformed_nambu`.
    """

    d: int
    m: int
    n: int
    targets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(tuple(int(x) for x in t) for t in self.targets))
        if self.d < 2:
            raise EncodingError("dimension must be >= 2")
        if self.m < 0 or self.n < 0:
            raise EncodingError("m and n must be non-negative")
        if len(self.targets) != self.n:
            raise EncodingError(f"expected {self.n} tuples, got {len(self.targets)}")
        top = self.num_vertices
        for t in self.targets:
            if len(t) != self.d:
                raise EncodingError(f"tuple {t} has arity {len(t)}, expected d={self.d}")
            for x in t:
                if not 0 <= x < top:
                    raise EncodingError(f"target {x} out of range 0..{top - 1}")

    @property
    def kind(self) -> str:
        return "micro"

    @property
    def signature(self) -> tuple:
        return ("micro", self.d, self.m, self.n)

    @property
    def tuples(self) -> tuple[tuple[int, ...], ...]:
        return self.targets

    @property
    def num_vertices(self) -> int:
        return self.m + (self.d - 1) * self.n

    @property
    def lc_vertices(self) -> range:
        return range(self.m, self.m + self.n)

    @property
    def species(self) -> range:
        """Casimir species indices 1 ... d-2."""
        return range(1, self.d - 1)

    def casimir(self, v: int, k: int) -> int:
        """Label of the Casimir a^k owned by Levi-Civita vertex ``v``."""
        return v + k * self.n

    def tuple_of(self, v: int) -> tuple[int, ...]:
        return self.targets[v - self.m]

    def role(self, label: int) -> tuple:
        """``('sink', i)``, ``('lc', v)`` or ``('casimir', k, parent)``."""
        if label < self.m:
            return ("sink", label)
        if label < self.m + self.n:
            return ("lc", label)
        k, r = divmod(label - self.m, self.n)
        return ("casimir", k, self.m + r)

    def own_casimirs(self, v: int) -> tuple[int, ...]:
        return tuple(self.casimir(v, k) for k in self.species)

    @property
    def has_repeated_target(self) -> bool:
        return any(len(set(t)) != len(t) for t in self.targets)

    def in_edges(self) -> dict[int, list[tuple[int, int]]]:
        """Map each label to the list of ``(issuing vertex, slot)`` pointing at it."""
        incoming: dict[int, list[tuple[int, int]]] = {x: [] for x in range(self.num_vertices)}
        for v, t in zip(self.lc_vertices, self.targets):
            for s, x in enumerate(t):
                incoming[x].append((v, s))
        return incoming

    def __str__(self):
        return serialize_encoding(self)


Graph = Union[KontsevichGraph, MicroGraph]


# ---------------------------------------------------------------- encodings

_TUPLE_SEP = re.compile(r"\s*;\s*")


def _parse_tuples(text: str) -> list[tuple[int, ...]]:
    body = re.sub(r"\s+", "", text)
    if len(body) < 2 or body[0] not in "([" or body[-1] not in ")]":
        raise EncodingError(f"encoding must be enclosed in parentheses: {text!r}")
    body = body[1:-1]
    if not body:
        return []
    out = []
    for chunk in _TUPLE_SEP.split(body):
        if not re.fullmatch(r"-?\d+(,-?\d+)*", chunk):
            raise EncodingError(f"malformed tuple {chunk!r} in {text!r}")
        out.append(tuple(int(x) for x in chunk.split(",")))
    return out


def parse_encoding(
    text: str,
    kind: str = "micro",
    d: int | None = None,
    m: int = 1,
    n: int | None = None,
    one_based: bool = False,
    strict: bool = True,
) -> Graph:
    """Parse ``"(0,1,4;1,6,5;4,5,6)"``-style text into a graph.

    ``n`` defaults to the number of tuples.  With ``one_based`` every label is
    shifted down by one.  For micro-graphs ``strict`` additionally rejects
    tuples that miss or duplicate one of their own Casimirs.
    """
    tuples = _parse_tuples(text)
    if n is None:
        n = len(tuples)
    if one_based:
        tuples = [tuple(x - 1 for x in t) for t in tuples]
    if kind == "kontsevich":
        return KontsevichGraph(m, n, tuple(tuples))
    if kind != "micro":
        raise EncodingError(f"unknown graph kind {kind!r}")
    if d is None:
        if not tuples:
            raise EncodingError("dimension d is required for micro-graphs")
        d = len(tuples[0])
    g = MicroGraph(d, m, n, tuple(tuples))
    if strict:
        ok, problems = is_wellformed_nambu(g)
        if not ok:
            raise EncodingError("; ".join(problems))
    return g


def serialize_encoding(graph: Graph) -> str:
    return "(" + ";".join(",".join(str(x) for x in t) for t in graph.tuples) + ")"


# ---------------------------------------------------------------- graph sums


@dataclass(frozen=True)
class GraphSum:
    """Linear combination of graphs sharing one signature."""

    terms: tuple[tuple[Coefficient, Graph], ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((_normalize_coefficient(c), g) for c, g in self.terms)
        sigs = {g.signature for _, g in terms}
        if len(sigs) > 1:
            raise EncodingError(f"mixed graph signatures in one sum: {sorted(map(str, sigs))}")
        object.__setattr__(self, "terms", terms)

    @property
    def signature(self):
        return self.terms[0][1].signature if self.terms else None

    @property
    def graphs(self) -> list[Graph]:
        return [g for _, g in self.terms]

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "GraphSum") -> "GraphSum":
        return GraphSum(self.terms + other.terms)

    def __neg__(self) -> "GraphSum":
        return self.scale(-1)

    def scale(self, c) -> "GraphSum":
        return GraphSum(tuple((c * a, g) for a, g in self.terms))

    def normalized(self, mode: str = "canonical") -> "GraphSum":
        """Canonicalize every term and merge according to ``mode``.

        ``raw`` only sorts tuples (dropping zero-flagged terms), ``canonical``
        also merges equal sorted encodings, ``iso`` merges graphs equal up to
        the role-preserving relabeling group.  Zero coefficients are dropped
        in the merging modes.
        """
        if mode not in COUNT_MODES:
            raise ValueError(f"count mode must be one of {COUNT_MODES}")
        staged = []
        for c, g in self.terms:
            if mode == "iso" and isinstance(g, MicroGraph):
                h, s = iso_canonical(g)
            else:
                h, s = canonicalize(g) if isinstance(g, MicroGraph) else g.canonical()
            if s != 0 and c != 0:
                staged.append((c * s, h))
        if mode == "raw":
            return GraphSum(tuple(staged))
        merged: dict[Graph, Coefficient] = {}
        for c, h in staged:
            merged[h] = merged.get(h, 0) + c
        return GraphSum(tuple((c, h) for h, c in merged.items() if c != 0))

    def to_records(self) -> list[dict]:
        return [graph_to_record(g, c) for c, g in self.terms]

    def __str__(self):
        return serialize_graph_sum(self)


_SUM_TERM = re.compile(r"([+-]?\d+(?:/\d+)?)\*(\([^()]*\)|\[[^\[\]]*\])")


def parse_graph_sum(
    text: str,
    kind: str = "micro",
    d: int | None = None,
    m: int = 1,
    n: int | None = None,
    one_based: bool = False,
    strict: bool = True,
) -> GraphSum:
    """Parse ``coeff*graph + coeff*graph ...``; a bare graph means coefficient 1."""
    body = re.sub(r"\s+", "", text)
    if body and body[0] in "([":
        body = "1*" + body
    body = re.sub(r"([+-])([(\[])", r"\g<1>1*\2", body)
    terms = []
    pos = 0
    while pos < len(body):
        if pos > 0:
            if body[pos] == "+":
                pos += 1
            elif body[pos] != "-":
                raise EncodingError(f"expected '+' at position {pos} in {text!r}")
        match = _SUM_TERM.match(body, pos)
        if not match:
            raise EncodingError(f"malformed graph sum near {body[pos:pos + 20]!r}")
        coeff = Fraction(match.group(1))
        graph = parse_encoding(match.group(2), kind, d, m, n, one_based, strict)
        terms.append((coeff, graph))
        pos = match.end()
    if not terms:
        raise EncodingError("empty graph sum")
    return GraphSum(tuple(terms))


def serialize_graph_sum(gs: GraphSum) -> str:
    parts = []
    for c, g in gs.terms:
        text = f"{c}*{serialize_encoding(g)}"
        if parts and not text.startswith("-"):
            text = "+" + text
        parts.append(text)
    return "".join(parts) if parts else "0"


def graph_to_record(graph: Graph, coefficient: Coefficient = 1) -> dict:
    return {
        "kind": graph.kind,
        "d": graph.d if isinstance(graph, MicroGraph) else None,
        "m": graph.m,
        "n": graph.n,
        "targets": [list(t) for t in graph.tuples],
        "coefficient": str(coefficient),
    }


def graph_from_record(record: dict) -> tuple[Coefficient, Graph]:
    kind = record.get("kind", "micro")
    targets = tuple(tuple(t) for t in record["targets"])
    if kind == "kontsevich":
        g: Graph = KontsevichGraph(record["m"], record["n"], targets)
    elif kind == "micro":
        g = MicroGraph(record["d"], record["m"], record["n"], targets)
    else:
        raise EncodingError(f"unknown graph kind {kind!r}")
    return _normalize_coefficient(Fraction(record.get("coefficient", "1"))), g


def dump_records(gs: GraphSum) -> str:
    return json.dumps(gs.to_records(), indent=1)


# ---------------------------------------------------------------- normal forms


def canonicalize(graph: MicroGraph) -> tuple[MicroGraph, int]:
    """Sort each tuple ascending.

    Returns the sorted graph and the product of sorting parities, or sign 0
    when a tuple repeats a target (the Levi-Civita symbol then kills the term).
    """
    sign = 1
    out = []
    for t in graph.targets:
        sign *= sort_sign(t)
        out.append(tuple(sorted(t)))
    return MicroGraph(graph.d, graph.m, graph.n, tuple(out)), sign


def is_wellformed_nambu(graph: MicroGraph) -> tuple[bool, list[str]]:
    """Check own-Casimir and in-degree rules; return ``(ok, diagnostics)``."""
    problems = []
    for v in graph.lc_vertices:
        t = graph.tuple_of(v)
        for c in graph.own_casimirs(v):
            count = t.count(c)
            if count == 0:
                problems.append(f"missing own Casimir {c} in tuple of vertex {v}")
            elif count > 1:
                problems.append(f"duplicate own Casimir {c} in tuple of vertex {v}")
    incoming = graph.in_edges()
    for label in range(graph.m + graph.n, graph.num_vertices):
        if not incoming[label]:
            problems.append(f"Casimir vertex {label} has in-degree 0")
    return not problems, problems


# ---------------------------------------------------------------- symmetries


@dataclass(frozen=True)
class SignedAutomorphism:
    """Role-preserving relabeling fixing a micro-graph, with its slot sign.

    ``lc_permutation[i]`` is the image (as an offset) of Levi-Civita vertex
    ``m + i``; ``casimir_permutations[k-1][i]`` is the image offset of the
    Casimir ``m + k*n + i``.  Sinks are fixed.
    """

    lc_permutation: tuple[int, ...]
    casimir_permutations: tuple[tuple[int, ...], ...]
    sign: int

    @property
    def is_identity(self) -> bool:
        ident = tuple(range(len(self.lc_permutation)))
        return self.lc_permutation == ident and all(p == ident for p in self.casimir_permutations)

    def image(self, graph: MicroGraph, label: int) -> int:
        return _apply_relabel(graph, self.lc_permutation, self.casimir_permutations, label)

    def compose(self, other: "SignedAutomorphism") -> "SignedAutomorphism":
        """``self`` after ``other``."""
        lc = tuple(self.lc_permutation[i] for i in other.lc_permutation)
        cas = tuple(
            tuple(p[i] for i in q) for p, q in zip(self.casimir_permutations, other.casimir_permutations)
        )
        return SignedAutomorphism(lc, cas, self.sign * other.sign)

    def inverse(self) -> "SignedAutomorphism":
        def inv(p):
            out = [0] * len(p)
            for i, j in enumerate(p):
                out[j] = i
            return tuple(out)

        return SignedAutomorphism(
            inv(self.lc_permutation), tuple(inv(p) for p in self.casimir_permutations), self.sign
        )

    def key(self) -> tuple:
        return (self.lc_permutation, self.casimir_permutations)


def _apply_relabel(graph: MicroGraph, lc_perm, cas_perms, label: int) -> int:
    m, n = graph.m, graph.n
    if label < m:
        return label
    block, offset = divmod(label - m, n)
    perm = lc_perm if block == 0 else cas_perms[block - 1]
    return m + block * n + perm[offset]


def relabel(graph: MicroGraph, lc_perm: Sequence[int], cas_perms: Sequence[Sequence[int]] | None = None) -> MicroGraph:
    """Apply a role-preserving relabeling, keeping every tuple's slot order.

    With ``cas_perms`` omitted each Casimir follows its parent.
    """
    lc_perm = tuple(lc_perm)
    if cas_perms is None:
        cas_perms = tuple(lc_perm for _ in graph.species)
    new = [None] * graph.n
    for i, t in enumerate(graph.targets):
        new[lc_perm[i]] = tuple(_apply_relabel(graph, lc_perm, cas_perms, x) for x in t)
    return MicroGraph(graph.d, graph.m, graph.n, tuple(new))


def _relabelings(graph: MicroGraph, casimirs: str) -> Iterable[tuple[tuple, tuple]]:
    perms = list(itertools.permutations(range(graph.n)))
    if casimirs == "bound":
        for p in perms:
            yield p, tuple(p for _ in graph.species)
    elif casimirs == "free":
        for p in perms:
            for cas in itertools.product(perms, repeat=graph.d - 2):
                yield p, cas
    else:
        raise ValueError("casimirs must be 'free' or 'bound'")


def automorphisms(graph: MicroGraph, casimirs: str = "free") -> list[SignedAutomorphism]:
    """All role-preserving relabelings mapping ``graph`` onto itself.

    With ``casimirs="free"`` Casimir vertices may move independently of their
    parents within each species (the formula only sees which function sits in
    a vertex); ``"bound"`` restricts to Levi-Civita permutations dragging
    their own Casimirs along.  The identity is always first.
    """
    base = [tuple(sorted(t)) for t in graph.targets]
    base_signs = [sort_sign(t) if len(set(t)) == len(t) else 1 for t in graph.targets]
    found = []
    for lc_perm, cas in _relabelings(graph, casimirs):
        sign = 1
        for i, t in enumerate(graph.targets):
            mapped = tuple(_apply_relabel(graph, lc_perm, cas, x) for x in t)
            j = lc_perm[i]
            if tuple(sorted(mapped)) != base[j]:
                break
            s = sort_sign(mapped) if len(set(mapped)) == len(mapped) else 1
            sign *= s * base_signs[j]
        else:
            found.append(SignedAutomorphism(lc_perm, cas, sign))
    found.sort(key=lambda a: (not a.is_identity, a.key()))
    return found


def is_zero_by_symmetry(graph: MicroGraph, casimirs: str = "free") -> tuple[bool, SignedAutomorphism | None]:
    """True with a witness iff some automorphism reverses the sign."""
    if graph.has_repeated_target:
        return False, None
    for a in automorphisms(graph, casimirs):
        if a.sign == -1:
            return True, a
    return False, None


def _owns_casimirs(graph: MicroGraph) -> bool:
    return all(graph.tuple_of(v).count(graph.casimir(v, k)) == 1 for v in graph.lc_vertices for k in graph.species)


def iso_canonical(graph: MicroGraph, casimirs: str = "free") -> tuple[MicroGraph, int]:
    """Minimal sorted encoding over all role-preserving relabelings.

    Only images that keep every own Casimir in its tuple are candidates, so
    the representative of a well-formed graph is well-formed (an ill-formed
    input falls back to all images).  The sign
    relates the representative to ``graph``; it is 0 when the graph has
    repeated targets or a sign-reversing automorphism.
    """
    best = None
    signs = set()
    filtered = _owns_casimirs(graph)
    for lc_perm, cas in _relabelings(graph, casimirs):
        h = relabel(graph, lc_perm, cas)
        if filtered and not _owns_casimirs(h):
            continue
        hs, s = canonicalize(h)
        if best is None or hs.targets < best.targets:
            best, signs = hs, {s}
        elif hs.targets == best.targets:
            signs.add(s)
    sign = signs.pop() if len(signs) == 1 else 0
    return best, sign


def iso_key(graph: MicroGraph, casimirs: str = "free") -> tuple:
    return iso_canonical(graph, casimirs)[0].targets


def permute_casimir_species(graph: MicroGraph, perm: Sequence[int]) -> MicroGraph:
    """Relabel species: Casimir ``v + k*n`` becomes ``v + perm[k-1]*n``.

    ``perm`` lists the images of species ``1 ... d-2``.
    """
    perm = tuple(perm)
    species = tuple(graph.species)
    if sorted(perm) != list(species):
        raise ValueError(f"{perm} is not a permutation of species {species}")
    m, n = graph.m, graph.n

    def image(x: int) -> int:
        if x < m + n:
            return x
        k, r = divmod(x - m, n)
        return m + perm[k - 1] * n + r

    return MicroGraph(graph.d, m, n, tuple(tuple(image(x) for x in t) for t in graph.targets))
