"""Compare conlleval-style and discard repair on randomly corrupted BIO sequences.

Each legal sequence has a fraction of its labels replaced at random; we report
how many corrupted sentences had violations and, per strategy, the span F1 of
the repaired labels against the uncorrupted original.

    python3 scripts/repair_comparison.py --sentences 5000 --noise 0.1
"""

import argparse
import random

from nerstd.codec import RepairStrategy, repair, validate
from nerstd.evaluation import score
from nerstd.labels import OUTSIDE, Label, Scheme, TaggedSentence

TYPES = ("PER", "LOC", "ORG")
ALPHABET = [OUTSIDE] + [Label(p, t) for p in "BI" for t in TYPES]


def legal_bio(rng, n):
    out = []
    for _ in range(n):
        prev = out[-1] if out else OUTSIDE
        opts = [OUTSIDE, OUTSIDE] + [Label("B", t) for t in TYPES]
        if not prev.is_outside:
            opts += [Label("I", prev.entity_type)] * 2
        out.append(rng.choice(opts))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=5000)
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    gold, noisy = [], []
    for _ in range(args.sentences):
        seq = legal_bio(rng, rng.randint(3, 25))
        bad = [rng.choice(ALPHABET) if rng.random() < args.noise else x for x in seq]
        gold.append(TaggedSentence(["w"] * len(seq), seq))
        noisy.append(bad)

    flagged = sum(bool(validate(x, Scheme.BIO)) for x in noisy)
    print(f"sentences with violations: {flagged}/{args.sentences}")
    for strategy in (RepairStrategy.CONLLEVAL, RepairStrategy.DISCARD):
        fixed = [TaggedSentence(["w"] * len(x), repair(x, Scheme.BIO, strategy)) for x in noisy]
        m = score(gold, fixed).micro
        print(f"{strategy.value:<10} P {100 * m.precision:6.2f}  R {100 * m.recall:6.2f}  "
              f"F1 {100 * m.f1:6.2f}  mentions {m.predicted_count}")


if __name__ == "__main__":
    main()
