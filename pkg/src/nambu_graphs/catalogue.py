"""Built-in graphs and catalogue files."""

from __future__ import annotations

import json
from pathlib import Path

from .graphs import (
    GraphSum,
    MicroGraph,
    graph_from_record,
    parse_encoding,
    parse_graph_sum,
)

SUNFLOWER_TEXT = "1*(0,1;1,3;1,2) + 2*(0,2;1,3;1,2)"

# name -> (encoding, kind, d, m, one_based)
BUILTINS = {
    "sunflower": (SUNFLOWER_TEXT, "kontsevich", None, 1, False),
    "a1": ("(0,2,4;1,3,5;1,2,6)", "micro", 3, 1, False),
    "no10": ("(0,1,4;1,6,5;4,5,6)", "micro", 3, 1, False),
    "h9": ("(1,2,3,5;3,4,5,6)", "micro", 4, 0, True),
    "bracket": ("(0,1,3)", "micro", 3, 2, False),
}


def sunflower() -> GraphSum:
    return parse_graph_sum(SUNFLOWER_TEXT, kind="kontsevich", m=1)


def builtin(name: str):
    """Graph (or graph sum, for the sunflower) registered under ``name``."""
    text, kind, d, m, one_based = BUILTINS[name]
    if name == "sunflower":
        return sunflower()
    return parse_encoding(text, kind, d=d, m=m, one_based=one_based)


def graph_no10() -> MicroGraph:
    return builtin("no10")


def hamiltonian_h9() -> MicroGraph:
    return builtin("h9")


def bare_bracket() -> MicroGraph:
    return builtin("bracket")


def write_catalogue(path, gs: GraphSum, source: str, count_mode: str, vanishing: list[int]) -> None:
    sig = gs.signature
    doc = {
        "manifest": {
            "source": source,
            "d": sig[1] if sig else None,
            "count": len(gs),
            "countMode": count_mode,
            "vanishing": sorted(vanishing),
        },
        "graphs": gs.to_records(),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_catalogue(path) -> tuple[dict, GraphSum]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    records = doc["graphs"] if isinstance(doc, dict) else doc
    manifest = doc.get("manifest", {}) if isinstance(doc, dict) else {}
    return manifest, GraphSum(tuple(graph_from_record(r) for r in records))
