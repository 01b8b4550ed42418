"""Entity type renaming and dropping.

A type map file is YAML with three keys::

    renames:
      ORG: [Organization, ORGANIZATION, ORGANISATION, org, NEO]
      PER: [PERSON, PERS]
    drops: [MISC]
    unknown_policy: keep     # keep | error | drop

Each rename entry lists the source spellings that become the canonical name
on the left. Mapping is applied to decoded mentions, so chunk boundaries are
never merged or split.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import yaml

from nerstd.codec import decode, encode
from nerstd.errors import DuplicateSource, RenameChain, TypeMapParseError, UnknownType
from nerstd.labels import Corpus, Scheme, TaggedSentence

CORE_TYPES = frozenset({"LOC", "ORG", "PER"})
DROPPED = "O"  # target name used in change reports for dropped mentions


class UnknownPolicy(enum.Enum):
    KEEP = "keep"
    ERROR = "error"
    DROP = "drop"


@dataclass(frozen=True)
class TypeMap:
    renames: dict[str, str] = field(default_factory=dict)
    drops: frozenset[str] = frozenset()
    unknown_policy: UnknownPolicy = UnknownPolicy.KEEP

    def __post_init__(self):
        object.__setattr__(self, "drops", frozenset(self.drops))
        both = set(self.renames) & self.drops
        if both:
            raise DuplicateSource(f"types both renamed and dropped: {sorted(both)}")
        targets = set(self.renames.values())
        chained = targets & set(self.renames)
        if chained:
            raise RenameChain(f"rename targets also renamed: {sorted(chained)}")
        dropped_targets = targets & self.drops
        if dropped_targets:
            raise DuplicateSource(f"rename targets also dropped: {sorted(dropped_targets)}")

    @property
    def known(self) -> frozenset[str]:
        return frozenset(self.renames) | frozenset(self.renames.values()) | self.drops

    def target(self, entity_type: str) -> str | None:
        """Canonical name for ``entity_type``, or ``None`` if it is dropped."""
        if entity_type in self.renames:
            return self.renames[entity_type]
        if entity_type in self.drops:
            return None
        if entity_type in self.known or self.unknown_policy is UnknownPolicy.KEEP:
            return entity_type
        if self.unknown_policy is UnknownPolicy.DROP:
            return None
        raise UnknownType(entity_type)


def _fail(cls, message, node):
    raise cls(message, node.start_mark.line + 1 if node is not None else None)


def _scalar(node, what: str) -> str:
    if not isinstance(node, yaml.ScalarNode) or not str(node.value).strip():
        _fail(TypeMapParseError, f"{what} must be a non-empty string", node)
    value = str(node.value)
    if any(c.isspace() for c in value):
        _fail(TypeMapParseError, f"{what} {value!r} contains whitespace", node)
    return value


def _string_list(node, what: str) -> list[tuple[str, yaml.Node]]:
    if isinstance(node, yaml.ScalarNode):
        if node.value in ("", "null", "~"):
            return []
        return [(_scalar(node, what), node)]
    if not isinstance(node, yaml.SequenceNode):
        _fail(TypeMapParseError, f"{what} must be a list", node)
    return [(_scalar(item, what), item) for item in node.value]


def parse_typemap(text: str) -> TypeMap:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise TypeMapParseError(exc.problem or str(exc), line) from None
    if root is None:
        return TypeMap()
    if not isinstance(root, yaml.MappingNode):
        _fail(TypeMapParseError, "type map must be a mapping", root)

    renames: dict[str, str] = {}
    drops: set[str] = set()
    policy = UnknownPolicy.KEEP
    seen: dict[str, int] = {}

    def claim(name: str, node) -> None:
        if name in seen:
            _fail(DuplicateSource,
                  f"source type {name!r} already listed on line {seen[name]}", node)
        seen[name] = node.start_mark.line + 1

    for key_node, value_node in root.value:
        key = _scalar(key_node, "top-level key")
        if key == "renames":
            if isinstance(value_node, yaml.ScalarNode) and value_node.value in ("", "null", "~"):
                continue
            if not isinstance(value_node, yaml.MappingNode):
                _fail(TypeMapParseError, "renames must be a mapping", value_node)
            for canon_node, aliases_node in value_node.value:
                canon = _scalar(canon_node, "canonical type")
                for alias, alias_node in _string_list(aliases_node, "alias"):
                    if alias == canon:
                        continue
                    claim(alias, alias_node)
                    renames[alias] = canon
        elif key == "drops":
            for name, node in _string_list(value_node, "dropped type"):
                claim(name, node)
                drops.add(name)
        elif key == "unknown_policy":
            raw = _scalar(value_node, "unknown_policy").lower()
            try:
                policy = UnknownPolicy(raw)
            except ValueError:
                _fail(TypeMapParseError, "unknown_policy must be keep, error or drop", value_node)
        else:
            _fail(TypeMapParseError, f"unexpected key {key!r}", key_node)

    targets = set(renames.values())
    for alias, canon in renames.items():
        if alias in targets:
            raise RenameChain(f"{alias!r} is both a rename target and renamed to {canon!r}",
                              seen[alias])
    for name in drops & targets:
        raise DuplicateSource(f"{name!r} is both a rename target and dropped", seen[name])
    return TypeMap(renames, frozenset(drops), policy)


def load_typemap(path: str | Path) -> TypeMap:
    return parse_typemap(Path(path).read_text(encoding="utf-8"))


def default_core_map() -> TypeMap:
    text = resources.files("nerstd").joinpath("data/core_map.yaml").read_text(encoding="utf-8")
    return parse_typemap(text)


def default_unify_map() -> TypeMap:
    text = resources.files("nerstd").joinpath("data/unify_map.yaml").read_text(encoding="utf-8")
    return parse_typemap(text)


def map_sentences(sentences: Sequence[TaggedSentence], tmap: TypeMap,
                  scheme: Scheme = Scheme.BIO) -> tuple[list[TaggedSentence], Counter]:
    """Rename or drop mention types in one split.

    Returns the new sentences and a counter of ``(source, target)`` pairs for
    every mention whose type changed; dropped mentions use target ``"O"``.
    """
    out = []
    changes: Counter = Counter()
    for si, sent in enumerate(sentences):
        kept = []
        changed = False
        for m in decode(sent.labels, scheme, si):
            try:
                target = tmap.target(m.entity_type)
            except UnknownType:
                raise UnknownType(m.entity_type, si) from None
            if target == m.entity_type:
                kept.append(m)
                continue
            changed = True
            changes[(m.entity_type, DROPPED if target is None else target)] += 1
            if target is not None:
                kept.append(type(m)(m.sentence_index, m.start, m.end, target))
        out.append(sent.with_labels(encode(kept, len(sent), scheme)) if changed else sent)
    return out, changes


def apply_typemap(corpus: Corpus, tmap: TypeMap,
                  scheme: Scheme = Scheme.BIO) -> tuple[Corpus, Counter]:
    total: Counter = Counter()
    splits = {}
    for name, sentences in corpus:
        splits[name], changes = map_sentences(sentences, tmap, scheme)
        total.update(changes)
    return Corpus(splits, corpus.provenance), total


def core_map_from(tmap: TypeMap) -> TypeMap:
    """Restrict ``tmap`` to the core types: unknown types are dropped."""
    extra = set(tmap.renames.values()) - CORE_TYPES
    if extra:
        raise ValueError(f"core map renames to non-core types: {sorted(extra)}")
    return _CoreMap(dict(tmap.renames), tmap.drops, UnknownPolicy.DROP)


@dataclass(frozen=True)
class _CoreMap(TypeMap):
    # LOC/ORG/PER survive even when the map never mentions them
    @property
    def known(self) -> frozenset[str]:
        return super().known | CORE_TYPES


def core_types_sentences(sentences: Sequence[TaggedSentence], core_map: TypeMap | None = None,
                         scheme: Scheme = Scheme.BIO) -> tuple[list[TaggedSentence], Counter]:
    return map_sentences(sentences, core_map_from(core_map or default_core_map()), scheme)


def core_types(corpus: Corpus, core_map: TypeMap | None = None,
               scheme: Scheme = Scheme.BIO) -> tuple[Corpus, Counter]:
    """Reduce every split to LOC/ORG/PER mentions; everything else becomes O."""
    return apply_typemap(corpus, core_map_from(core_map or default_core_map()), scheme)


def format_changes(changes: Counter) -> str:
    lines = [f"{src}\t{dst}\t{n}" for (src, dst), n in sorted(changes.items())]
    return "".join(line + "\n" for line in lines)
