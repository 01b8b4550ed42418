"""Corpus statistics and reproducible train/dev/test splitting."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence, TypeVar

from nerstd.codec import decode
from nerstd.errors import BadRatios, EmptyInput
from nerstd.labels import Corpus, Scheme, TaggedSentence

T = TypeVar("T")

MASK64 = (1 << 64) - 1


@dataclass
class SplitStats:
    sentence_count: int = 0
    token_count: int = 0
    mention_counts: Counter = field(default_factory=Counter)

    @property
    def mention_count(self) -> int:
        return sum(self.mention_counts.values())


@dataclass
class CorpusStats:
    splits: dict[str, SplitStats] = field(default_factory=dict)

    @property
    def total(self) -> SplitStats:
        out = SplitStats()
        for s in self.splits.values():
            out.sentence_count += s.sentence_count
            out.token_count += s.token_count
            out.mention_counts.update(s.mention_counts)
        return out

    @property
    def types(self) -> list[str]:
        return sorted(self.total.mention_counts)

    def to_dict(self) -> dict:
        def one(s: SplitStats) -> dict:
            return {
                "sentences": s.sentence_count,
                "tokens": s.token_count,
                "mentions": s.mention_count,
                "types": dict(sorted(s.mention_counts.items())),
            }
        return {"splits": {k: one(v) for k, v in self.splits.items()}, "total": one(self.total)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        names = list(self.splits) + ["total"]
        rows = {**self.splits, "total": self.total}
        width = max([len(n) for n in names] + [9])
        lines = [f"{'':<{width}} {'sentences':>10} {'tokens':>10} {'mentions':>10}"]
        for n in names:
            s = rows[n]
            lines.append(f"{n:<{width}} {s.sentence_count:>10} {s.token_count:>10} "
                         f"{s.mention_count:>10}")
        lines.append("")
        total = self.total
        for t in self.types:
            lines.append(f"{t}\t{total.mention_counts[t]}")
        return "\n".join(lines) + "\n"


def split_stats(sentences: Sequence[TaggedSentence], scheme: Scheme = Scheme.BIO) -> SplitStats:
    out = SplitStats(sentence_count=len(sentences))
    for i, sent in enumerate(sentences):
        out.token_count += len(sent)
        out.mention_counts.update(m.entity_type for m in decode(sent.labels, scheme, i))
    return out


def corpus_stats(corpus: Corpus, scheme: Scheme = Scheme.BIO) -> CorpusStats:
    return CorpusStats({name: split_stats(sents, scheme) for name, sents in corpus})


class SplitMix64:
    """The SplitMix64 generator; identical output on every platform."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def shuffled_indices(n: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def split_sizes(n: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    # the epsilon keeps 0.29 * 100 == 28.999... from flooring to 28
    train = math.floor(n * ratios[0] + 1e-9)
    dev = math.floor(n * ratios[1] + 1e-9)
    return train, dev, n - train - dev


def split(items: Sequence[T], ratios: Sequence[float] = (0.8, 0.1, 0.1),
          seed: int = 0, shuffle: bool = True) -> tuple[list[T], list[T], list[T]]:
    """Shuffle with a seeded SplitMix64 Fisher-Yates, then cut into train/dev/test.

    Train and dev sizes are floored; the remainder goes to test. With
    ``shuffle=False`` the cut is taken over the input order and ``seed`` is unused.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1) > 1e-9:
        raise BadRatios(f"ratios must be three positive fractions summing to 1, got {ratios}")
    if not items:
        raise EmptyInput("nothing to split")
    order = shuffled_indices(len(items), seed) if shuffle else range(len(items))
    n_train, n_dev, _ = split_sizes(len(items), ratios)
    picked = [items[i] for i in order]
    return picked[:n_train], picked[n_train:n_train + n_dev], picked[n_train + n_dev:]
