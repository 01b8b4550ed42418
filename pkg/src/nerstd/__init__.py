"""Standardization tooling for token-labeled named entity corpora."""

from nerstd.labels import (
    OUTSIDE,
    Corpus,
    Label,
    Mention,
    Scheme,
    TaggedSentence,
    normalize_label,
    parse_label,
)
from nerstd.codec import (
    RepairStrategy,
    Violation,
    ViolationKind,
    convert,
    decode,
    encode,
    flatten_nested,
    repair,
    validate,
)

__all__ = [
    "OUTSIDE",
    "Corpus",
    "Label",
    "Mention",
    "Scheme",
    "TaggedSentence",
    "normalize_label",
    "parse_label",
    "RepairStrategy",
    "Violation",
    "ViolationKind",
    "convert",
    "decode",
    "encode",
    "flatten_nested",
    "repair",
    "validate",
]

__version__ = "0.1.0"
