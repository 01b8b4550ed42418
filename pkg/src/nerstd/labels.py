"""Label grammar, chunk encoding schemes and the core corpus data model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from nerstd.errors import MalformedLabel


class Scheme(enum.Enum):
    IO = "IO"
    IOB1 = "IOB1"
    BIO = "BIO"
    BIOES = "BIOES"

    @property
    def prefixes(self) -> frozenset[str]:
        return _ADMISSIBLE[self]

    @classmethod
    def parse(cls, name: str | Scheme) -> Scheme:
        if isinstance(name, Scheme):
            return name
        key = name.strip().upper()
        # common aliases
        key = {"IOB2": "BIO", "IOB": "IOB1", "IOBES": "BIOES"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown scheme {name!r}") from None


_ADMISSIBLE = {
    Scheme.IO: frozenset("I"),
    Scheme.IOB1: frozenset("BI"),
    Scheme.BIO: frozenset("BI"),
    Scheme.BIOES: frozenset("BIES"),
}

PREFIX_LETTERS = "BIES"
OUTSIDE_TEXT = "O"


@dataclass(frozen=True)
class Label:
    """A per-token annotation: outside, or a boundary prefix plus a type.

    ``prefix`` is ``"O"`` exactly when the label is outside, in which case
    ``entity_type`` is ``None``.
    """

    prefix: str
    entity_type: str | None = None

    def __post_init__(self):
        if self.prefix == OUTSIDE_TEXT:
            if self.entity_type is not None:
                raise MalformedLabel(str(self.entity_type), "outside label cannot carry a type")
            return
        if self.prefix not in PREFIX_LETTERS:
            raise MalformedLabel(self.prefix, "unknown boundary prefix")
        if not self.entity_type or any(c.isspace() for c in self.entity_type):
            raise MalformedLabel(
                f"{self.prefix}-{self.entity_type}", "type must be non-empty without whitespace"
            )

    @property
    def is_outside(self) -> bool:
        return self.prefix == OUTSIDE_TEXT

    def with_prefix(self, prefix: str) -> Label:
        return Label(prefix, self.entity_type)

    def with_type(self, entity_type: str) -> Label:
        return Label(self.prefix, entity_type)

    def __str__(self) -> str:
        if self.is_outside:
            return OUTSIDE_TEXT
        return f"{self.prefix}-{self.entity_type}"

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"


OUTSIDE = Label(OUTSIDE_TEXT)


def render(label: Label) -> str:
    return str(label)


def parse_label(raw: str, scheme: Scheme = Scheme.BIO) -> Label:
    """Parse ``"O"`` or ``"P-TYPE"`` under ``scheme``.

    Only the first dash separates prefix from type, so ``B-GPE-LOC`` has type
    ``GPE-LOC``. Prefix letters are case-sensitive.
    """
    if raw == OUTSIDE_TEXT:
        return OUTSIDE
    if len(raw) < 2 or raw[1] != "-":
        raise MalformedLabel(raw, "expected 'O' or PREFIX-TYPE")
    prefix, entity_type = raw[0], raw[2:]
    if prefix not in scheme.prefixes:
        raise MalformedLabel(raw, f"prefix {prefix!r} not admissible under {scheme.value}")
    if not entity_type:
        raise MalformedLabel(raw, "empty entity type")
    if any(c.isspace() for c in entity_type):
        raise MalformedLabel(raw, "entity type contains whitespace")
    return Label(prefix, entity_type)


def normalize_label(raw: str, scheme: Scheme = Scheme.BIO) -> str:
    """Insert the missing dash in labels like ``BLOC`` -> ``B-LOC``.

    A dash is inserted only when the first character is a prefix letter
    admissible under ``scheme`` and the remainder is at least two characters
    starting with an uppercase letter. Anything else comes back unchanged.
    """
    if raw == OUTSIDE_TEXT or len(raw) < 3:
        return raw
    if raw[1] == "-":
        return raw
    if raw[0] in scheme.prefixes and raw[1].isupper():
        return f"{raw[0]}-{raw[1:]}"
    return raw


@dataclass(frozen=True, order=True)
class Mention:
    sentence_index: int
    start: int
    end: int
    entity_type: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid mention span [{self.start}, {self.end})")

    @property
    def span(self) -> tuple[int, int, int]:
        return (self.sentence_index, self.start, self.end)

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    labels: tuple[Label, ...]
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.tokens) != len(self.labels):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.labels)} labels"
            )
        for tok in self.tokens:
            if not tok or "\n" in tok or "\r" in tok:
                raise ValueError(f"invalid token {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def with_labels(self, labels) -> TaggedSentence:
        return TaggedSentence(self.tokens, tuple(labels), self.metadata)


Split = list[TaggedSentence]


@dataclass
class Corpus:
    """Named splits of sentences. Split order is preserved as inserted."""

    splits: dict[str, Split] = field(default_factory=dict)
    provenance: str = ""

    def __getitem__(self, name: str) -> Split:
        return self.splits[name]

    def __iter__(self):
        return iter(self.splits.items())

    def map_sentences(self, fn) -> Corpus:
        return Corpus({name: [fn(s) for s in sents] for name, sents in self.splits.items()},
                      self.provenance)
