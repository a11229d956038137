"""Nambu micro-graph calculus: encodings, exact evaluation, dimension lifts."""

from .dimshift import contra_embed, descendants, embed, kontsevich_expand
from .graphs import (
    EncodingError,
    GraphSum,
    KontsevichGraph,
    MicroGraph,
    automorphisms,
    canonicalize,
    is_wellformed_nambu,
    is_zero_by_symmetry,
    parse_encoding,
    parse_graph_sum,
    serialize_encoding,
)
from .polyalg import DiffPolynomial, evaluate, is_vanishing, numeric_probe, pairing_certificate

__all__ = [
    "EncodingError",
    "GraphSum",
    "KontsevichGraph",
    "MicroGraph",
    "DiffPolynomial",
    "automorphisms",
    "canonicalize",
    "contra_embed",
    "descendants",
    "embed",
    "evaluate",
    "is_vanishing",
    "is_wellformed_nambu",
    "is_zero_by_symmetry",
    "kontsevich_expand",
    "numeric_probe",
    "pairing_certificate",
    "parse_encoding",
    "parse_graph_sum",
    "serialize_encoding",
]
