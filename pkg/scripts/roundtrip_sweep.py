"""Round-trip sweep: decode/encode on random legal sequences, per scheme and length.

    python3 scripts/roundtrip_sweep.py --n 2000 --max-len 20
"""

import argparse
import random

from nerstd.codec import decode, encode
from nerstd.labels import OUTSIDE, Label, Scheme

TYPES = ("PER", "LOC", "ORG", "MISC")


def legal_sequence(rng, scheme, n):
    """Sample a legal sequence by walking the scheme's transition rules."""
    out = []
    for i in range(n):
        prev = out[-1] if out else OUTSIDE
        last = i == n - 1
        opts = [OUTSIDE]
        if scheme is Scheme.IO:
            opts += [Label("I", t) for t in TYPES]
        elif scheme is Scheme.BIO:
            opts += [Label("B", t) for t in TYPES]
            if not prev.is_outside:
                opts.append(Label("I", prev.entity_type))
        elif scheme is Scheme.IOB1:
            opts += [Label("I", t) for t in TYPES]
            if not prev.is_outside:
                opts.append(Label("B", prev.entity_type))
        elif prev.prefix in ("B", "I"):
            t = prev.entity_type
            opts = [Label("E", t)] if last else [Label("I", t), Label("E", t)]
        else:
            opts += [Label("S", t) for t in TYPES]
            if not last:
                opts += [Label("B", t) for t in TYPES]
        out.append(rng.choice(opts))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="sequences per (scheme, length)")
    ap.add_argument("--max-len", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print(f"{'scheme':<6} {'len':>4} {'exact':>8} {'mentions':>9}")
    for scheme in (Scheme.IO, Scheme.IOB1, Scheme.BIO, Scheme.BIOES):
        for n in range(1, args.max_len + 1, max(1, args.max_len // 4)):
            exact = 0
            mentions = 0
            for _ in range(args.n):
                seq = legal_sequence(rng, scheme, n)
                ms = decode(seq, scheme)
                mentions += len(ms)
                exact += encode(ms, n, scheme) == seq
            print(f"{scheme.value:<6} {n:>4} {100 * exact / args.n:>7.2f}% {mentions / args.n:>9.2f}")


if __name__ == "__main__":
    main()
