"""Command-line interface: ``nambu-graphs <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 experiment mismatch against the
pinned values (the report is still printed and written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalogue
from .dimshift import contra_embed, descendant_list, embed, kontsevich_expand
from .experiments import (
    experiment_certificates,
    experiment_embedding_resilience,
    experiment_prop1,
    experiment_table1,
)
from .graphs import (
    COUNT_MODES,
    EncodingError,
    GraphSum,
    MicroGraph,
    automorphisms,
    graph_to_record,
    is_zero_by_symmetry,
    parse_encoding,
    parse_graph_sum,
    serialize_encoding,
)
from .polyalg import evaluate, evaluate_sum, is_vanishing, numeric_probe

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH = 0, 2, 3


def _common(p: argparse.ArgumentParser, graph: bool = True):
    if graph:
        p.add_argument("encoding", help="graph encoding, graph sum, or built-in name "
                       f"({', '.join(catalogue.BUILTINS)})")
        p.add_argument("--d", type=int, help="dimension (defaults to the tuple length)")
        p.add_argument("--m", type=int, default=1, help="number of sinks")
        p.add_argument("--n", type=int, help="number of Levi-Civita vertices")
        p.add_argument("--one-based", action="store_true", help="labels start at 1")
    p.add_argument("--count-mode", choices=COUNT_MODES, default="canonical")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", type=Path, help="write JSON output to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nambu-graphs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("eval", "evaluate a micro-graph or graph sum"),
        ("vanishes", "decide whether the formula is identically zero"),
        ("aut", "list signed automorphisms"),
        ("embed", "embed d -> d+1"),
        ("contra-embed", "embed 3 -> 4 and swap a^1 <-> a^2"),
        ("descend", "list (d+1)-descendants with vanishing flags"),
        ("probe", "compare the symbolic and brute-force numeric evaluations"),
    ]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "aut":
            p.add_argument("--casimirs", choices=("free", "bound"), default="free")
        if name == "probe":
            p.add_argument("--trials", type=int, default=5)
    p = sub.add_parser("expand", help="expand a Kontsevich graph sum into micro-graphs")
    _common(p)
    p.add_argument("--vanishing", action="store_true", help="also test each micro-graph")
    for name, help_ in [
        ("table1", "vanishing 3D sunflower graphs and their 4D-descendants"),
        ("prop1", "vanishing 4D sunflower graphs versus descendants of vanishing 3D ones"),
        ("resilience", "vanishing survives the embedding"),
        ("certificates", "pairing certificates and blockwise vanishing"),
    ]:
        p = sub.add_parser(name, help=help_)
        _common(p, graph=False)
        if name == "resilience":
            p.add_argument("--max-d", type=int, default=5)
        p.add_argument("--timings", action="store_true", help="include timings in JSON")
    return parser


def _load(args, kind: str = "micro"):
    text = args.encoding
    if text in catalogue.BUILTINS:
        return catalogue.builtin(text)
    path = Path(text)
    if path.suffix == ".json" and path.exists():
        return catalogue.read_catalogue(path)[1]
    if "*" in text or "+" in text:
        return parse_graph_sum(text, kind, args.d, args.m, args.n, args.one_based)
    return parse_encoding(text, kind, args.d, args.m, args.n, args.one_based)


def _emit(args, payload, text: str):
    if args.out:
        args.out.write_text(json.dumps(payload, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps(payload, indent=1, sort_keys=True, default=str))
    else:
        print(text)


def _as_micro(obj) -> MicroGraph | GraphSum:
    if isinstance(obj, GraphSum) and obj.signature[0] != "micro":
        raise EncodingError("expected micro-graphs; use 'expand' for Kontsevich graphs")
    return obj


def _single(obj) -> MicroGraph:
    if not isinstance(obj, MicroGraph):
        raise EncodingError("expected a single micro-graph")
    return obj


def run(args) -> int:
    cmd = args.command
    if cmd == "eval":
        obj = _as_micro(_load(args))
        poly = evaluate_sum(obj, args.threads) if isinstance(obj, GraphSum) else evaluate(obj, args.threads)
        text = "ZERO polynomial" if poly.is_zero() else f"{len(poly)} monomials\n{poly}"
        _emit(args, poly.to_json(), text)
    elif cmd == "vanishes":
        v = is_vanishing(_as_micro(_load(args)), args.threads)
        _emit(args, {"vanishing": v}, "true" if v else "false")
    elif cmd == "aut":
        g = _single(_load(args))
        auts = automorphisms(g, args.casimirs)
        zero, _ = is_zero_by_symmetry(g, args.casimirs)
        rows = [{"lc": a.lc_permutation, "casimirs": a.casimir_permutations, "sign": a.sign} for a in auts]
        text = "\n".join(f"{r['sign']:+d}  lc={r['lc']} casimirs={r['casimirs']}" for r in rows)
        text += f"\norder {len(auts)}; zero by symmetry: {zero}"
        _emit(args, {"order": len(auts), "zero": zero, "automorphisms": rows}, text)
    elif cmd in ("embed", "contra-embed"):
        g = _single(_load(args))
        h = embed(g) if cmd == "embed" else contra_embed(g)
        _emit(args, graph_to_record(h), serialize_encoding(h))
    elif cmd == "descend":
        g = _single(_load(args))
        rows = []
        for choice, h, sign in descendant_list(g):
            tag = "e" if choice.is_embedding else ("c" if choice.is_full_redirect else "")
            rows.append({"graph": serialize_encoding(h), "sign": sign, "vanishing": is_vanishing(h), "tag": tag})
        if args.count_mode != "raw":
            merged = GraphSum(tuple((r["sign"], parse_encoding(r["graph"], d=g.d + 1, m=g.m)) for r in rows))
            keep = {serialize_encoding(h) for h in merged.normalized(args.count_mode).graphs}
            rows = [r for r in rows if r["graph"] in keep]
        nvan = sum(r["vanishing"] for r in rows)
        text = "\n".join(f"{r['sign']:+d} {r['graph']} {'VANISHES' if r['vanishing'] else ''} {r['tag']}".rstrip()
                         for r in rows)
        text += f"\n{len(rows)} descendants, {nvan} vanishing"
        _emit(args, {"count": len(rows), "vanishing": nvan, "descendants": rows}, text)
    elif cmd == "expand":
        obj = _load(args, kind="kontsevich")
        if not isinstance(obj, GraphSum):
            obj = GraphSum(((1, obj),))
        if args.d is None:
            raise EncodingError("expand needs --d")
        gs = kontsevich_expand(obj, args.d, args.count_mode)
        vanishing = [i for i, g in enumerate(gs.graphs) if args.vanishing and is_vanishing(g)]
        if args.out:
            catalogue.write_catalogue(args.out, gs, args.encoding, args.count_mode, vanishing)
            args.out = None
        lines = [f"{c:+} {serialize_encoding(g)}{' VANISHES' if i in vanishing else ''}"
                 for i, (c, g) in enumerate(gs.terms)]
        lines.append(f"{len(gs)} micro-graphs" + (f", {len(vanishing)} vanishing" if args.vanishing else ""))
        _emit(args, {"count": len(gs), "graphs": gs.to_records(), "vanishing": vanishing}, "\n".join(lines))
    elif cmd == "probe":
        obj = _as_micro(_load(args))
        agree, values = numeric_probe(obj, args.trials, args.seed, return_values=True)
        text = "\n".join(f"symbolic {a}  brute-force {b}" for a, b in values)
        text += f"\n{'AGREE' if agree else 'DISAGREE'}"
        _emit(args, {"agree": agree, "values": [[str(a), str(b)] for a, b in values]}, text)
        return EXIT_OK if agree else EXIT_MISMATCH
    else:
        if cmd == "table1":
            rep = experiment_table1(args.threads)
        elif cmd == "prop1":
            rep = experiment_prop1(args.threads)
        elif cmd == "resilience":
            rep = experiment_embedding_resilience(args.max_d, args.threads)
        else:
            rep = experiment_certificates(args.threads)
        _emit(args, rep.to_dict(args.timings), rep.to_text())
        return EXIT_OK if rep.passed else EXIT_MISMATCH
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (EncodingError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
