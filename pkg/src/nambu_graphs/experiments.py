"""Experiment pipelines over the sunflower descendants.

Conventions used to count graphs:

* the sunflower expansion is counted by distinct sorted encodings
  (``canonical`` mode); ``Van_3`` is the set of its vanishing members;
* per-graph table statistics are taken over the isomorphism classes of
  ``Van_3`` (the ``iso`` convention), one representative each, while the
  totals are summed over every member of ``Van_3``.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Callable, Iterable

from .catalogue import bare_bracket, graph_no10, hamiltonian_h9, sunflower
from .dimshift import contra_embed, descendant_list, embed, kontsevich_expand
from .graphs import (
    MicroGraph,
    automorphisms,
    canonicalize,
    is_zero_by_symmetry,
    iso_key,
    serialize_encoding,
)
from .polyalg import (
    blockwise_vanishing,
    eq2_split,
    evaluate,
    is_vanishing,
    pairing_certificate,
)

__all__ = [
    "Check",
    "ExperimentReport",
    "load_pinned",
    "vanishing_catalogue",
    "experiment_table1",
    "experiment_prop1",
    "experiment_embedding_resilience",
    "experiment_certificates",
]


def load_pinned() -> dict[str, dict]:
    text = resources.files("nambu_graphs").joinpath("data/pinned.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass
class Check:
    name: str
    expected: Any
    observed: Any
    passed: bool
    source: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    manifest: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    multisets: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    findings: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, expected, observed, source="", compare: Callable | None = None) -> bool:
        ok = compare(expected, observed) if compare else expected == observed
        self.checks.append(Check(name, expected, observed, bool(ok), source))
        return ok

    def pinned(self, pins: dict, key: str, observed, compare: Callable | None = None) -> bool:
        pin = pins[key]
        return self.check(key, pin["value"], observed, pin["source"], compare)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        if not include_timings:
            out.pop("timings")
        return out

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=1, sort_keys=True, default=str)

    def to_text(self) -> str:
        lines = [f"experiment {self.experiment}: {'PASS' if self.passed else 'MISMATCH'}"]
        for c in self.checks:
            flag = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{flag}] {c.name}: expected {c.expected}, observed {c.observed}")
        for k, v in self.counts.items():
            lines.append(f"  {k} = {v}")
        for k, v in self.findings.items():
            lines.append(f"  finding {k}: {v}")
        return "\n".join(lines)


def _multiset_equal(a, b) -> bool:
    return Counter(a) == Counter(b)


def _map(fn, items: Iterable, workers: int):
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _enc(g: MicroGraph) -> str:
    return serialize_encoding(g)


@dataclass
class VanishingCatalogue:
    """Sunflower expansion in one dimension with its vanishing members."""

    d: int
    graphs: list[MicroGraph]
    vanishing: list[MicroGraph]

    @property
    def classes(self) -> list[list[MicroGraph]]:
        """Vanishing graphs grouped by isomorphism class, in encoding order."""
        groups: dict[tuple, list[MicroGraph]] = {}
        for g in sorted(self.vanishing, key=lambda h: h.targets):
            groups.setdefault(iso_key(g), []).append(g)
        return sorted(groups.values(), key=lambda grp: grp[0].targets)


def _vanishes(g: MicroGraph) -> bool:
    return is_vanishing(g)


def vanishing_catalogue(d: int, workers: int = 1) -> VanishingCatalogue:
    graphs = list(kontsevich_expand(sunflower(), d, "canonical").graphs)
    flags = _map(_vanishes, graphs, workers)
    return VanishingCatalogue(d, graphs, [g for g, f in zip(graphs, flags) if f])


def _graph_profile(g: MicroGraph) -> dict:
    auts = automorphisms(g)
    zero, witness = is_zero_by_symmetry(g)
    desc = descendant_list(g)
    vanishing_desc = [(c, h) for c, h, _ in desc if is_vanishing(h)]
    emb = canonicalize(embed(g))[0]
    con = canonicalize(contra_embed(g))[0]
    van_set = {h for _, h in vanishing_desc}
    flag = "zero" if zero else ("aut" if len(auts) > 1 else "")
    return {
        "encoding": _enc(g),
        "flag": flag,
        "aut_order": len(auts),
        "descendants": len(desc),
        "vanishing_descendants": len(vanishing_desc),
        "embedding_vanishes": emb in van_set,
        "contra_embedding_vanishes": con in van_set,
        "extra_vanishing": sorted(_enc(h) for h in van_set - {emb, con}),
    }


def experiment_table1(workers: int = 1) -> ExperimentReport:
    """Vanishing 3D sunflower micro-graphs and their 4D-descendants."""
    pins = load_pinned()
    rep = ExperimentReport("table1", manifest={"source": "sunflower", "d": 3, "countMode": "canonical"})
    t0 = time.perf_counter()
    cat = vanishing_catalogue(3, workers)
    rep.timings["expand_and_filter"] = time.perf_counter() - t0
    classes = cat.classes
    reps = [grp[0] for grp in classes]
    rep.counts.update(
        expansion=len(cat.graphs),
        vanishing_graphs=len(cat.vanishing),
        vanishing_classes=len(classes),
    )
    rep.pinned(pins, "sunflower_3d_count", len(cat.graphs))
    rep.pinned(pins, "vanishing_3d_classes", len(classes))

    t0 = time.perf_counter()
    profiles = _map(_graph_profile, cat.vanishing, workers)
    rep.timings["profiles"] = time.perf_counter() - t0
    by_enc = {p["encoding"]: p for p in profiles}
    class_profiles = [by_enc[_enc(g)] for g in reps]
    for grp, p in zip(classes, class_profiles):
        rep.verdicts.append(dict(p, members=[_enc(g) for g in grp]))

    flags = Counter(p["flag"] for p in class_profiles)
    rep.counts.update(zero=flags["zero"], aut=flags["aut"], trivial=flags[""])
    rep.pinned(pins, "zero_by_symmetry", flags["zero"])
    rep.pinned(pins, "aut_nonzero", flags["aut"])
    rep.pinned(pins, "trivial_aut", flags[""])

    r2 = sorted(p["descendants"] for p in class_profiles)
    r3 = sorted(p["vanishing_descendants"] for p in class_profiles)
    r4 = sorted(len(p["extra_vanishing"]) for p in class_profiles)
    rep.multisets.update(descendants=r2, vanishing_descendants=r3, extra_vanishing=r4)
    rep.pinned(pins, "descendant_counts", r2, _multiset_equal)
    rep.pinned(pins, "vanishing_descendant_counts", r3, _multiset_equal)
    rep.pinned(pins, "extra_vanishing_descendants", r4, _multiset_equal)
    total2 = sum(p["descendants"] for p in profiles)
    total3 = sum(p["vanishing_descendants"] for p in profiles)
    rep.counts.update(descendant_total=total2, vanishing_descendant_total=total3)
    rep.pinned(pins, "descendant_total", total2)
    rep.pinned(pins, "vanishing_descendant_total", total3)
    rep.check(
        "embedding_and_contra_embedding_vanish",
        True,
        all(p["embedding_vanishes"] and p["contra_embedding_vanishes"] for p in profiles),
        "every vanishing 3D graph keeps e and c vanishing",
    )

    no10 = canonicalize(graph_no10())[0]
    p10 = by_enc.get(_enc(no10))
    rep.check("no10_is_vanishing", True, p10 is not None, "graph No. 10 is in the vanishing list")
    if p10 is not None:
        rep.pinned(pins, "no10_descendants", p10["descendants"])
        rep.pinned(pins, "no10_vanishing_descendants", p10["vanishing_descendants"])
        rep.check("no10_vanishing_are_e_c", [], p10["extra_vanishing"], "no extra vanishing descendants")
    rep.findings["class_members"] = {_enc(grp[0]): len(grp) for grp in classes if len(grp) > 1}
    return rep


def _vanishing_descendants(g: MicroGraph) -> list[MicroGraph]:
    return [h for _, h, _ in descendant_list(g) if is_vanishing(h)]


def experiment_prop1(workers: int = 1) -> ExperimentReport:
    """Vanishing 4D sunflower descendants come only from vanishing 3D ones."""
    pins = load_pinned()
    rep = ExperimentReport("prop1", manifest={"source": "sunflower", "d": 4, "countMode": "canonical"})
    t0 = time.perf_counter()
    cat3 = vanishing_catalogue(3, workers)
    cat4 = vanishing_catalogue(4, workers)
    rep.timings["expand_and_filter"] = time.perf_counter() - t0
    rep.counts.update(expansion_4d=len(cat4.graphs), vanishing_4d=len(cat4.vanishing))
    rep.pinned(pins, "sunflower_4d_count", len(cat4.graphs))
    rep.pinned(pins, "vanishing_4d_count", len(cat4.vanishing))

    t0 = time.perf_counter()
    lifted = {h for hs in _map(_vanishing_descendants, cat3.vanishing, workers) for h in hs}
    rep.timings["descendants"] = time.perf_counter() - t0
    van4 = set(cat4.vanishing)
    rep.counts["vanishing_descendants_of_van3"] = len(lifted)
    rep.check("vanishing_descendants_of_van3", pins["vanishing_4d_count"]["value"], len(lifted),
              "vanishing 4D-descendants of the vanishing 3D graphs")
    diff = sorted(_enc(g) for g in van4 ^ lifted)
    rep.check("symmetric_difference", [], diff, "Van_4 equals the vanishing 4D-descendants of Van_3")
    iso4 = {iso_key(g) for g in van4}
    iso_lifted = {iso_key(h) for g in (grp[0] for grp in cat3.classes) for h in _vanishing_descendants(g)}
    rep.counts["vanishing_4d_classes"] = len(iso4)
    rep.check("iso_class_equality", True, iso4 == iso_lifted, "same statement on isomorphism classes")
    return rep


def _embedding_record(g: MicroGraph) -> dict:
    lifted = embed(g)
    split = eq2_split(g, lifted)
    return {
        "encoding": _enc(g),
        "d": g.d,
        "embedding_vanishes": split.full.is_zero(),
        "head_zero": split.head.is_zero(),
        "cross_zero": split.cross.is_zero(),
    }


def experiment_embedding_resilience(max_d: int = 5, workers: int = 1) -> ExperimentReport:
    """Vanishing survives the embedding d -> d+1 and both parts of the split vanish."""
    if max_d > 5:
        raise ValueError("resilience checks are limited to max_d <= 5")
    rep = ExperimentReport("resilience", manifest={"source": "sunflower", "max_d": max_d})
    graphs = []
    for d in range(3, max_d):
        t0 = time.perf_counter()
        cat = vanishing_catalogue(d, workers)
        rep.timings[f"catalogue_{d}"] = time.perf_counter() - t0
        graphs.extend(cat.vanishing)
    h9 = hamiltonian_h9()
    if max_d >= 5:
        graphs.append(h9)
    t0 = time.perf_counter()
    records = _map(_embedding_record, graphs, workers)
    rep.timings["embeddings"] = time.perf_counter() - t0
    rep.verdicts = records
    for d in range(3, max_d):
        sub = [r for r in records if r["d"] == d and r["encoding"] != _enc(h9)]
        rep.counts[f"vanishing_{d}d"] = len(sub)
        rep.check(
            f"embeddings_{d}d_to_{d + 1}d_vanish",
            True,
            all(r["embedding_vanishes"] and r["head_zero"] and r["cross_zero"] for r in sub),
            "vanishing is preserved by the embedding; head and cross-terms both vanish",
        )
    if max_d >= 5:
        r = records[-1]
        rep.check("h9_vanishes", True, is_vanishing(h9), "the vanishing 4D Hamiltonian")
        rep.check("h9_embedding_vanishes", True, r["embedding_vanishes"], "its 5D embedding still vanishes")
    control = bare_bracket()
    split = eq2_split(control, embed(control))
    rep.check("control_head_plus_cross", True, split.full == evaluate(embed(control)), "split is complete")
    rep.check("control_head_recovers_original", True, split.reduced == evaluate(control), "old formula reappears")
    rep.check("control_nonzero", False, split.full.is_zero(), "bare bracket does not vanish")
    return rep


def _certificate_record(g: MicroGraph) -> dict:
    cert = pairing_certificate(g)
    blocks = {str(v): blockwise_vanishing(g, v) for v in g.lc_vertices}
    return {"encoding": _enc(g), "d": g.d, "aut_order": len(automorphisms(g)), "blocks": blocks, **cert.summary(),
            "strict": cert.strict}


def experiment_certificates(workers: int = 1, dims: tuple[int, ...] = (3, 4)) -> ExperimentReport:
    """Pairing certificates and per-block vanishing for every vanishing graph."""
    rep = ExperimentReport("certificates", manifest={"source": "sunflower", "dims": list(dims)})
    graphs = []
    for d in dims:
        graphs.extend(vanishing_catalogue(d, workers).vanishing)
    t0 = time.perf_counter()
    records = _map(_certificate_record, graphs, workers)
    rep.timings["certificates"] = time.perf_counter() - t0
    rep.verdicts = records
    for d in dims:
        sub = [r for r in records if r["d"] == d]
        rep.counts[f"graphs_{d}d"] = len(sub)
        rep.counts[f"valid_{d}d"] = sum(r["valid"] for r in sub)
        rep.counts[f"strict_{d}d"] = sum(r["strict"] for r in sub)
        rep.counts[f"some_block_vanishing_{d}d"] = sum(any(r["blocks"].values()) for r in sub)
    no10 = _enc(canonicalize(graph_no10())[0])
    r10 = next((r for r in records if r["encoding"] == no10), None)
    if r10 is not None:
        rep.findings["no10_certificate_valid"] = r10["valid"]
        rep.findings["no10_blockwise"] = r10["blocks"]
    rep.check("all_certificates_valid", True, all(r["valid"] for r in records), "vanishing graphs pair off")
    return rep
