"""Transition validation, repair and scheme conversion for chunk labels.

Everything here works on one sentence's label sequence at a time. Conversion
always goes through a list of :class:`Mention` spans, so any pair of schemes
is supported by composing ``decode`` and ``encode``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from nerstd.errors import (
    InvalidSequence,
    LayerOutOfRange,
    MalformedLabel,
    OutOfRange,
    OverlappingMentions,
    RaggedLayers,
    UnrepairedViolations,
)
from nerstd.labels import OUTSIDE, Label, Mention, Scheme, TaggedSentence, parse_label

SENTENCE_START = "<START>"


class ViolationKind(enum.Enum):
    ILLEGAL_START = "IllegalStart"
    TYPE_MISMATCH_CONTINUATION = "TypeMismatchContinuation"
    ILLEGAL_PREFIX_TRANSITION = "IllegalPrefixTransition"
    UNTERMINATED_CHUNK = "UnterminatedChunk"


class RepairStrategy(enum.Enum):
    CONLLEVAL = "conlleval"
    DISCARD = "discard"
    NONE = "none"

    @classmethod
    def parse(cls, name: str | RepairStrategy) -> RepairStrategy:
        if isinstance(name, RepairStrategy):
            return name
        key = name.strip().lower()
        key = {"conllevalstyle": "conlleval", "conlleval-style": "conlleval"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown repair strategy {name!r}") from None


@dataclass(frozen=True)
class Violation:
    sentence_index: int
    token_index: int
    prior: Label | None  # None at sentence start
    current: Label
    kind: ViolationKind

    def to_line(self) -> str:
        prior = SENTENCE_START if self.prior is None else str(self.prior)
        return "\t".join(
            [str(self.sentence_index), str(self.token_index), self.kind.value, prior, str(self.current)]
        )

    def to_dict(self) -> dict:
        return {
            "sentence": self.sentence_index,
            "token": self.token_index,
            "kind": self.kind.value,
            "prior": None if self.prior is None else str(self.prior),
            "current": str(self.current),
        }


def violations_to_text(violations: Iterable[Violation]) -> str:
    return "".join(v.to_line() + "\n" for v in violations)


def violations_to_json(violations: Iterable[Violation]) -> str:
    return json.dumps([v.to_dict() for v in violations], ensure_ascii=False, indent=1)


def _check_admissible(labels: Sequence[Label], scheme: Scheme) -> None:
    allowed = scheme.prefixes
    for label in labels:
        if not label.is_outside and label.prefix not in allowed:
            raise MalformedLabel(str(label), f"prefix not admissible under {scheme.value}")


def validate(labels: Sequence[Label], scheme: Scheme, sentence_index: int = 0) -> list[Violation]:
    """Return every illegal transition in ``labels``; empty means legal."""
    _check_admissible(labels, scheme)
    if scheme is Scheme.IO:
        return []
    out = []
    prior: Label | None = None
    for i, cur in enumerate(labels):
        kind = _transition(prior, cur, scheme)
        if kind is not None:
            out.append(Violation(sentence_index, i, prior, cur, kind))
        prior = cur
    if scheme is Scheme.BIOES and prior is not None and prior.prefix in "BI":
        n = len(labels)
        before = labels[n - 2] if n > 1 else None
        out.append(Violation(sentence_index, n - 1, before, prior, ViolationKind.UNTERMINATED_CHUNK))
    return out


def _transition(prior: Label | None, cur: Label, scheme: Scheme) -> ViolationKind | None:
    open_prior = prior is not None and not prior.is_outside
    if scheme is Scheme.BIO:
        if cur.prefix != "I":
            return None
        if not open_prior:
            return ViolationKind.ILLEGAL_START
        if prior.entity_type != cur.entity_type:
            return ViolationKind.TYPE_MISMATCH_CONTINUATION
        return None
    if scheme is Scheme.IOB1:
        if cur.prefix == "B" and not (open_prior and prior.entity_type == cur.entity_type):
            return ViolationKind.ILLEGAL_START
        return None
    # BIOES
    if prior is None or prior.is_outside or prior.prefix in "ES":
        if cur.prefix in "IE":
            return ViolationKind.ILLEGAL_START
        return None
    # prior is B-X or I-X: the chunk must continue with I-X or E-X
    if cur.prefix in "IE":
        if cur.entity_type != prior.entity_type:
            return ViolationKind.TYPE_MISMATCH_CONTINUATION
        return None
    return ViolationKind.ILLEGAL_PREFIX_TRANSITION


def _starts_chunk(prior: Label | None, cur: Label) -> bool:
    # Lenient chunking shared by all schemes; matches conlleval's chunk-start rule.
    if cur.is_outside:
        return False
    if prior is None or prior.is_outside:
        return True
    if cur.prefix in "BS" or prior.prefix in "ES":
        return True
    return prior.entity_type != cur.entity_type


def chunk_spans(labels: Sequence[Label]) -> list[tuple[int, int, str]]:
    """Chunk any label sequence, legal or not, as conlleval would."""
    spans = []
    start = None
    prior = None
    for i, cur in enumerate(labels):
        if start is not None and (cur.is_outside or _starts_chunk(prior, cur)):
            spans.append((start, i, labels[start].entity_type))
            start = None
        if start is None and not cur.is_outside:
            start = i
        prior = cur
    if start is not None:
        spans.append((start, len(labels), labels[start].entity_type))
    return spans


def decode(labels: Sequence[Label], scheme: Scheme, sentence_index: int = 0) -> list[Mention]:
    violations = validate(labels, scheme, sentence_index)
    if violations:
        v = violations[0]
        raise InvalidSequence(
            f"sentence {sentence_index}, token {v.token_index}: {v.kind.value} "
            f"({'start' if v.prior is None else v.prior} -> {v.current}) under {scheme.value}"
        )
    return [Mention(sentence_index, s, e, t) for s, e, t in chunk_spans(labels)]


def encode(mentions: Iterable[Mention], length: int, scheme: Scheme) -> list[Label]:
    labels = [OUTSIDE] * length
    prev: Mention | None = None
    for m in sorted(mentions, key=lambda m: (m.start, m.end)):
        if m.end > length:
            raise OutOfRange(f"mention [{m.start}, {m.end}) exceeds sentence length {length}")
        if prev is not None and m.start < prev.end:
            raise OverlappingMentions(
                f"mentions [{prev.start}, {prev.end}) and [{m.start}, {m.end}) overlap"
            )
        t = m.entity_type
        if scheme is Scheme.IO:
            for i in range(m.start, m.end):
                labels[i] = Label("I", t)
        elif scheme is Scheme.BIO:
            labels[m.start] = Label("B", t)
            for i in range(m.start + 1, m.end):
                labels[i] = Label("I", t)
        elif scheme is Scheme.IOB1:
            adjacent = prev is not None and prev.end == m.start and prev.entity_type == t
            labels[m.start] = Label("B" if adjacent else "I", t)
            for i in range(m.start + 1, m.end):
                labels[i] = Label("I", t)
        else:
            if m.end - m.start == 1:
                labels[m.start] = Label("S", t)
            else:
                labels[m.start] = Label("B", t)
                for i in range(m.start + 1, m.end - 1):
                    labels[i] = Label("I", t)
                labels[m.end - 1] = Label("E", t)
        prev = m
    return labels


def convert(labels: Sequence[Label], source: Scheme, target: Scheme) -> list[Label]:
    return encode(decode(labels, source), len(labels), target)


def _to_bio_prefixes(labels: Sequence[Label]) -> list[Label]:
    table = {"E": "I", "S": "B"}
    return [l if l.is_outside or l.prefix not in table else l.with_prefix(table[l.prefix])
            for l in labels]


def _repair_conlleval(labels: Sequence[Label], scheme: Scheme) -> list[Label]:
    if scheme is Scheme.BIOES:
        fixed = _repair_conlleval(_to_bio_prefixes(labels), Scheme.BIO)
        return encode(decode(fixed, Scheme.BIO), len(fixed), Scheme.BIOES)
    out = list(labels)
    for v in validate(labels, scheme):
        cur = out[v.token_index]
        # BIO: a stray I- opens a chunk, so it becomes B-; IOB1: a stray B- becomes I-
        out[v.token_index] = cur.with_prefix("B" if scheme is Scheme.BIO else "I")
    return out


def _repair_discard(labels: Sequence[Label], scheme: Scheme) -> list[Label]:
    out = list(labels)
    while True:
        violations = validate(out, scheme)
        if not violations:
            return out
        owner = {}
        for span in chunk_spans(out):
            for i in range(span[0], span[1]):
                owner[i] = span
        doomed = set()
        for v in violations:
            i = v.token_index
            involved = [i]
            if scheme is Scheme.BIOES:
                # under BIOES the prior chunk never closed, so it is broken too
                if v.kind is ViolationKind.ILLEGAL_PREFIX_TRANSITION:
                    involved = [i - 1]
                elif v.kind is ViolationKind.TYPE_MISMATCH_CONTINUATION:
                    involved = [i - 1, i]
            for i in involved:
                if i in owner:
                    doomed.add(owner[i])
        for start, end, _ in doomed:
            for i in range(start, end):
                out[i] = OUTSIDE


def repair(labels: Sequence[Label], scheme: Scheme,
           strategy: RepairStrategy = RepairStrategy.CONLLEVAL) -> list[Label]:
    """Return a legal version of ``labels``.

    ``CONLLEVAL`` keeps every entity token and fixes prefixes the way
    conlleval reads the sequence. ``DISCARD`` turns every chunk involved in a
    violation into ``O``. ``NONE`` returns the input if it is already legal
    and raises :class:`UnrepairedViolations` otherwise.
    """
    violations = validate(labels, scheme)
    if not violations:
        return list(labels)
    if strategy is RepairStrategy.NONE:
        raise UnrepairedViolations(violations)
    if strategy is RepairStrategy.CONLLEVAL:
        return _repair_conlleval(labels, scheme)
    return _repair_discard(labels, scheme)


def flatten_nested(layers: Sequence[Sequence[Label]], layer_index: int = 0) -> list[Label]:
    if not layers:
        raise LayerOutOfRange("no annotation layers")
    n = len(layers[0])
    for i, layer in enumerate(layers):
        if len(layer) != n:
            raise RaggedLayers(f"layer {i} has {len(layer)} labels, layer 0 has {n}")
    if not 0 <= layer_index < len(layers):
        raise LayerOutOfRange(f"layer {layer_index} requested, {len(layers)} available")
    return list(layers[layer_index])


@dataclass(frozen=True)
class Override:
    sentence_index: int
    token_index: int
    label: Label


def load_overrides(text: str, scheme: Scheme) -> list[Override]:
    """Parse a manual-repair file: ``sentence<TAB>token<TAB>label`` per line.

    Blank lines and ``#`` comments are ignored.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(fields)}")
        try:
            sent, tok = int(fields[0]), int(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: sentence and token indices must be integers") from None
        try:
            label = parse_label(fields[2], scheme)
        except MalformedLabel as exc:
            exc.line = lineno
            raise
        out.append(Override(sent, tok, label))
    return out


def apply_overrides(sentences: Sequence[TaggedSentence],
                    overrides: Iterable[Override]) -> tuple[list[TaggedSentence], int]:
    """Apply manual label fixes; returns the new sentences and the number applied."""
    by_sentence: dict[int, dict[int, Label]] = {}
    for o in overrides:
        if not 0 <= o.sentence_index < len(sentences):
            raise OutOfRange(f"override sentence {o.sentence_index} out of range")
        if not 0 <= o.token_index < len(sentences[o.sentence_index]):
            raise OutOfRange(f"override token {o.token_index} out of range "
                             f"in sentence {o.sentence_index}")
        by_sentence.setdefault(o.sentence_index, {})[o.token_index] = o.label
    out = list(sentences)
    count = 0
    for si, fixes in by_sentence.items():
        labels = list(out[si].labels)
        for ti, label in fixes.items():
            labels[ti] = label
            count += 1
        out[si] = out[si].with_labels(labels)
    return out, count


def validate_sentences(sentences: Iterable[TaggedSentence], scheme: Scheme) -> list[Violation]:
    out = []
    for i, sent in enumerate(sentences):
        out.extend(validate(sent.labels, scheme, sentence_index=i))
    return out


def decode_sentences(sentences: Iterable[TaggedSentence], scheme: Scheme) -> list[Mention]:
    out = []
    for i, sent in enumerate(sentences):
        out.extend(decode(sent.labels, scheme, sentence_index=i))
    return out
