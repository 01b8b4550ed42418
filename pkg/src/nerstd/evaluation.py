"""Exact-match span scoring with conlleval semantics."""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from nerstd.codec import decode
from nerstd.errors import SentenceCountMismatch, TokenCountMismatch
from nerstd.labels import Scheme, TaggedSentence


@dataclass(frozen=True)
class Counts:
    gold_count: int = 0
    predicted_count: int = 0
    correct_count: int = 0

    @property
    def precision(self) -> float:
        return self.correct_count / self.predicted_count if self.predicted_count else 0.0

    @property
    def recall(self) -> float:
        return self.correct_count / self.gold_count if self.gold_count else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: Counts) -> Counts:
        return Counts(self.gold_count + other.gold_count,
                      self.predicted_count + other.predicted_count,
                      self.correct_count + other.correct_count)

    def to_dict(self) -> dict:
        return {
            "gold_count": self.gold_count,
            "predicted_count": self.predicted_count,
            "correct_count": self.correct_count,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class ScoreReport:
    per_type: dict[str, Counts] = field(default_factory=dict)
    token_count: int = 0

    @property
    def micro(self) -> Counts:
        return sum(self.per_type.values(), Counts())

    def to_dict(self) -> dict:
        return {
            "micro": self.micro.to_dict(),
            "per_type": {t: c.to_dict() for t, c in sorted(self.per_type.items())},
            "token_count": self.token_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> ScoreReport:
        per_type = {
            t: Counts(c["gold_count"], c["predicted_count"], c["correct_count"])
            for t, c in data["per_type"].items()
        }
        return cls(per_type, data.get("token_count", 0))

    def to_text(self) -> str:
        m = self.micro
        lines = [
            f"processed {self.token_count} tokens with {m.gold_count} phrases; "
            f"found: {m.predicted_count} phrases; correct: {m.correct_count}.",
            f"precision: {100 * m.precision:6.2f}%; recall: {100 * m.recall:6.2f}%; "
            f"FB1: {100 * m.f1:6.2f}",
        ]
        for t, c in sorted(self.per_type.items()):
            lines.append(
                f"{t:>17}: precision: {100 * c.precision:6.2f}%; recall: {100 * c.recall:6.2f}%; "
                f"FB1: {100 * c.f1:6.2f}  {c.predicted_count}"
            )
        return "\n".join(lines) + "\n"


def score(gold: Sequence[TaggedSentence], predicted: Sequence[TaggedSentence],
          scheme: Scheme = Scheme.BIO) -> ScoreReport:
    """Micro and per-type precision/recall/F1 over exactly matching mentions."""
    if len(gold) != len(predicted):
        raise SentenceCountMismatch(
            f"gold has {len(gold)} sentences, predicted has {len(predicted)}"
        )
    g_counts: Counter = Counter()
    p_counts: Counter = Counter()
    c_counts: Counter = Counter()
    tokens = 0
    for i, (g, p) in enumerate(zip(gold, predicted)):
        if len(g) != len(p):
            raise TokenCountMismatch(i, len(g), len(p))
        tokens += len(g)
        g_mentions = set(decode(g.labels, scheme, i))
        p_mentions = set(decode(p.labels, scheme, i))
        g_counts.update(m.entity_type for m in g_mentions)
        p_counts.update(m.entity_type for m in p_mentions)
        c_counts.update(m.entity_type for m in g_mentions & p_mentions)
    types = set(g_counts) | set(p_counts)
    return ScoreReport(
        {t: Counts(g_counts[t], p_counts[t], c_counts[t]) for t in types}, tokens
    )


@dataclass(frozen=True)
class Aggregate:
    n: int
    mean: float
    stderr: float

    def __str__(self) -> str:
        return f"{self.mean:.2f} ± {self.stderr:.2f} (n={self.n})"


def mean_stderr(values: Iterable[float]) -> Aggregate:
    """Mean and standard error of the mean (sample std / sqrt(n))."""
    values = list(values)
    if not values:
        raise ValueError("no values to aggregate")
    if len(values) == 1:
        return Aggregate(1, values[0], 0.0)
    return Aggregate(len(values), statistics.fmean(values),
                     statistics.stdev(values) / math.sqrt(len(values)))


def aggregate_reports(reports: Sequence[ScoreReport]) -> dict[str, Aggregate]:
    """F1 (in percent) across runs: ``"micro"`` plus one entry per type."""
    out = {"micro": mean_stderr(100 * r.micro.f1 for r in reports)}
    types = sorted(set().union(*(r.per_type for r in reports)))
    for t in types:
        out[t] = mean_stderr(100 * r.per_type.get(t, Counts()).f1 for r in reports)
    return out
