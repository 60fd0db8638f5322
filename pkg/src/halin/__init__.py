"""Exact total and AVD 4-coloring of cubic and subcubic Halin graphs."""

from .model import (
    BoundaryTuple,
    HalinGraph,
    Mode,
    Tripole,
    TreeFormatError,
    canonical_form,
    decode_tuple,
    decompose,
    encode_tuple,
    parse_halin,
    parse_tree,
    parse_tripole,
    tripole_of,
)

__version__ = "0.1.0"
