"""Acceptance gate.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion. Run directly with ``python3 tests/test_acceptance.py``.
"""

import itertools
import random
import subprocess
import sys
from collections import Counter

import pytest

from conftest import FIXTURES, TYPES, naive_bio_spans, random_legal
from nerstd.codec import RepairStrategy, decode, encode, repair, validate
from nerstd.errors import InvalidSequence
from nerstd.evaluation import score
from nerstd.formats import (
    ColumnSpec,
    drop_tokenless_lines,
    read_conll,
    read_conll_nested,
    read_conllu_plus,
    transcode,
    write_conll,
)
from nerstd.labels import OUTSIDE, Corpus, Label, Scheme, TaggedSentence
from nerstd.pipeline import digest, run_manifest
from nerstd.stats import corpus_stats, split
from nerstd.typemap import TypeMap, apply_typemap, core_types, load_typemap

N_RANDOM = 10_000
ALL_TYPES = ("PER", "LOC", "ORG", "MISC", "DATE", "GPE-LOC", "X")


def span_multiset(sentences, scheme):
    return Counter((i, m.start, m.end, m.entity_type)
                   for i, s in enumerate(sentences) for m in decode(s.labels, scheme, i))


def brute_force_counts(gold, predicted):
    g = {(i, *s) for i, seq in enumerate(gold) for s in naive_bio_spans(seq)}
    p = {(i, *s) for i, seq in enumerate(predicted) for s in naive_bio_spans(seq)}
    out = Counter()
    for x in g:
        out[x[3], "gold"] += 1
    for x in p:
        out[x[3], "pred"] += 1
    for x in g & p:
        out[x[3], "correct"] += 1
    return out


def bio_alphabet(types):
    return [OUTSIDE] + [Label(p, t) for t in types for p in "BI"]


def bio_legal(seq):
    return all(l.prefix != "I" or (i > 0 and not seq[i - 1].is_outside
                                   and seq[i - 1].entity_type == l.entity_type)
               for i, l in enumerate(seq))


def discard_oracle(seq):
    """BIO discard: blank each run that opens with an illegal I and continues with its I's."""
    out = list(seq)
    i = 0
    while i < len(seq):
        cur = seq[i]
        stray = cur.prefix == "I" and (
            i == 0 or seq[i - 1].is_outside or seq[i - 1].entity_type != cur.entity_type)
        if stray:
            t = cur.entity_type
            j = i
            while j < len(seq) and (j == i or seq[j] == Label("I", t)):
                out[j] = OUTSIDE
                j += 1
            i = j
        else:
            i += 1
    return out


# 1 ------------------------------------------------------------------------

@pytest.mark.criterion("1 codec round-trip")
@pytest.mark.parametrize("scheme", [Scheme.BIO, Scheme.IOB1, Scheme.BIOES])
def test_round_trip_random(scheme):
    rng = random.Random(f"roundtrip-{scheme.value}")
    for _ in range(N_RANDOM):
        seq = random_legal(rng, scheme, types=ALL_TYPES)
        assert validate(seq, scheme) == []
        assert encode(decode(seq, scheme), len(seq), scheme) == seq


@pytest.mark.criterion("1 codec round-trip")
def test_bio_exhaustive_vs_naive():
    alphabet = bio_alphabet(("A", "B"))
    for n in range(7):
        for seq in itertools.product(alphabet, repeat=n):
            if bio_legal(seq):
                got = [(m.start, m.end, m.entity_type) for m in decode(seq, Scheme.BIO)]
                assert got == naive_bio_spans(seq)
                assert encode(decode(seq, Scheme.BIO), n, Scheme.BIO) == list(seq)
            else:
                with pytest.raises(InvalidSequence):
                    decode(seq, Scheme.BIO)


# 2 ------------------------------------------------------------------------

@pytest.mark.criterion("2 repair soundness")
@pytest.mark.parametrize("scheme", [Scheme.IO, Scheme.IOB1, Scheme.BIO, Scheme.BIOES])
@pytest.mark.parametrize("strategy", [RepairStrategy.CONLLEVAL, RepairStrategy.DISCARD])
def test_repair_sound_and_idempotent(scheme, strategy):
    rng = random.Random(f"repair-{scheme.value}-{strategy.value}")
    alphabet = [OUTSIDE] + [Label(p, t) for p in sorted(scheme.prefixes) for t in TYPES]
    for _ in range(3000):
        seq = [rng.choice(alphabet) for _ in range(rng.randint(0, 10))]
        fixed = repair(seq, scheme, strategy)
        assert validate(fixed, scheme) == []
        assert repair(fixed, scheme, strategy) == fixed
        if strategy is RepairStrategy.DISCARD:
            assert all(a == b or b.is_outside for a, b in zip(seq, fixed))


@pytest.mark.criterion("2 repair soundness")
@pytest.mark.parametrize("t", ALL_TYPES)
def test_stray_inside_becomes_begin(t):
    seq = [OUTSIDE, Label("I", t), Label("I", t)]
    assert repair(seq, Scheme.BIO, RepairStrategy.CONLLEVAL) == \
        [OUTSIDE, Label("B", t), Label("I", t)]


@pytest.mark.criterion("2 repair soundness")
def test_discard_zeroes_exactly_violating_chunks():
    alphabet = bio_alphabet(("A", "B"))
    for n in range(7):
        for seq in itertools.product(alphabet, repeat=n):
            assert repair(seq, Scheme.BIO, RepairStrategy.DISCARD) == discard_oracle(seq)


# 3 ------------------------------------------------------------------------

@pytest.mark.criterion("3 conversion fidelity")
def test_io_to_bio_kind(fixture_tree):
    def prefixed(raw):
        return raw if raw == "O" else f"I-{raw}"
    run_manifest(fixture_tree / "kind.yaml")
    for split_name in ("train", "test"):
        src = read_conll((FIXTURES / f"kind_{split_name}.tsv").read_bytes(),
                         scheme=Scheme.IO, label_fn=prefixed)
        out = read_conll((fixture_tree / "out" / "kind" / f"{split_name}.conll").read_bytes())
        assert span_multiset(src, Scheme.IO) == span_multiset(out, Scheme.BIO)
    expected = Counter({"PER": 3, "LOC": 4, "ORG": 2})
    assert Counter(k[3] for k in span_multiset(
        read_conll((fixture_tree / "out" / "kind" / "train.conll").read_bytes())
        + read_conll((fixture_tree / "out" / "kind" / "test.conll").read_bytes()),
        Scheme.BIO)) == expected


@pytest.mark.criterion("3 conversion fidelity")
def test_bioes_top_layer_to_bio_thai(fixture_tree):
    run_manifest(fixture_tree / "thai.yaml")
    top = read_conll_nested((FIXTURES / "thai_nested.txt").read_bytes(), scheme=Scheme.BIOES, layer=0)
    out = read_conll((fixture_tree / "out" / "thai" / "train.conll").read_bytes())
    assert span_multiset(top, Scheme.BIOES) == span_multiset(out, Scheme.BIO)
    assert span_multiset(out, Scheme.BIO) == Counter(
        {(0, 0, 2, "ORG"): 1, (1, 0, 3, "PER"): 1, (1, 4, 5, "LOC"): 1})


# 4 ------------------------------------------------------------------------

def _sents(seqs):
    return [TaggedSentence(["w"] * len(s), s) for s in seqs]


@pytest.mark.criterion("4 scorer oracle")
def test_scorer_matches_brute_force():
    rng = random.Random("scorer")
    for _ in range(N_RANDOM):
        gold, pred = [], []
        for _ in range(rng.randint(1, 3)):
            g = random_legal(rng, Scheme.BIO, max_len=8)
            p = random_legal(rng, Scheme.BIO, max_len=len(g))
            while len(p) != len(g):
                p = random_legal(rng, Scheme.BIO, max_len=len(g))
            gold.append(g)
            pred.append(p)
        report = score(_sents(gold), _sents(pred))
        oracle = brute_force_counts(gold, pred)
        types = {t for t, _ in oracle}
        assert set(report.per_type) == types
        for t, c in report.per_type.items():
            assert (c.gold_count, c.predicted_count, c.correct_count) == \
                (oracle[t, "gold"], oracle[t, "pred"], oracle[t, "correct"])
        m = report.micro
        assert m.gold_count == sum(v for (t, k), v in oracle.items() if k == "gold")
        assert m.predicted_count == sum(v for (t, k), v in oracle.items() if k == "pred")
        assert m.correct_count == sum(v for (t, k), v in oracle.items() if k == "correct")


@pytest.mark.criterion("4 scorer oracle")
def test_scorer_anchors():
    def lab(text):
        return [Label("O") if x == "O" else Label(x[0], x[2:]) for x in text.split()]
    gold = _sents([lab("B-PER O B-LOC O B-ORG")])
    pred = _sents([lab("B-PER O B-LOC I-LOC O")])
    m = score(gold, pred).micro
    assert (m.gold_count, m.predicted_count, m.correct_count) == (3, 2, 1)
    assert f"{100 * m.precision:.2f}" == "50.00"
    assert f"{100 * m.recall:.2f}" == "33.33"
    assert f"{100 * m.f1:.2f}" == "40.00"
    g = read_conll((FIXTURES / "mixed_types.conll").read_bytes())
    assert f"{100 * score(g, g).micro.f1:.2f}" == "100.00"
    none = _sents([lab("B-PER I-PER O")])
    shifted = _sents([lab("O B-PER I-PER")])
    assert f"{100 * score(none, shifted).micro.f1:.2f}" == "0.00"


# 5 ------------------------------------------------------------------------

ORG_ALIASES = {"Organization", "ORGANIZATION", "ORGANISATION", "org", "NEO"}


@pytest.mark.criterion("5 type unification")
def test_org_alias_unification():
    corpus = Corpus({"train": read_conll((FIXTURES / "org_variants.conll").read_bytes())})
    before = span_multiset(corpus["train"], Scheme.BIO)
    assert ORG_ALIASES <= {k[3] for k in before}
    tmap = TypeMap({a: "ORG" for a in ORG_ALIASES})
    out, _ = apply_typemap(corpus, tmap)
    after = span_multiset(out["train"], Scheme.BIO)
    org_like = ORG_ALIASES | {"ORG"}
    assert {k[3] for k in after} & org_like == {"ORG"}
    assert Counter(k[:3] for k in before) == Counter(k[:3] for k in after)
    assert Counter(k[:3] for k in before if k[3] in org_like) == \
        Counter(k[:3] for k in after if k[3] == "ORG")
    file_map = load_typemap(FIXTURES / "org_unify.yaml")
    assert all(file_map.target(a) == "ORG" for a in ORG_ALIASES)


@pytest.mark.criterion("5 type unification")
def test_core_reduction():
    corpus = Corpus({"train": read_conll((FIXTURES / "core_five.conll").read_bytes())})
    before = span_multiset(corpus["train"], Scheme.BIO)
    assert {k[3] for k in before} == {"LOC", "ORG", "PER", "MISC", "DATE"}
    out, _ = core_types(corpus)
    after = span_multiset(out["train"], Scheme.BIO)
    assert after == Counter({k: v for k, v in before.items() if k[3] in {"LOC", "ORG", "PER"}})


# 6 ------------------------------------------------------------------------

@pytest.mark.criterion("6 statistics integrity")
def test_stats_hand_counts(fixture_tree):
    run_manifest(fixture_tree / "kind.yaml")
    out = fixture_tree / "out" / "kind"
    corpus = Corpus({name: read_conll((out / f"{name}.conll").read_bytes())
                     for name in ("train", "test")})
    stats = corpus_stats(corpus)
    train, test = stats.splits["train"], stats.splits["test"]
    assert (train.sentence_count, train.token_count) == (3, 17)
    assert (test.sentence_count, test.token_count) == (2, 6)
    assert dict(train.mention_counts) == {"PER": 2, "LOC": 2, "ORG": 2}
    assert dict(test.mention_counts) == {"PER": 1, "LOC": 2}
    assert stats.total.sentence_count == 5
    assert dict(stats.total.mention_counts) == {"PER": 3, "LOC": 4, "ORG": 2}


@pytest.mark.criterion("6 statistics integrity")
def test_stats_additivity():
    one = TaggedSentence(["w"], [OUTSIDE])
    corpus = Corpus({"train": [one] * 4383, "dev": [one] * 564, "test": [one] * 565})
    stats = corpus_stats(corpus)
    assert stats.total.sentence_count == 5512
    assert stats.total.sentence_count == sum(s.sentence_count for s in stats.splits.values())
    assert stats.total.token_count == sum(s.token_count for s in stats.splits.values())


# 7 ------------------------------------------------------------------------

@pytest.mark.criterion("7 split contract")
def test_split_sizes_and_permutation():
    items = [f"sent{i}" for i in range(10)]
    parts = split(items, (0.8, 0.1, 0.1), seed=0)
    assert tuple(map(len, parts)) == (8, 1, 1)
    assert sorted(sum(parts, [])) == sorted(items)
    assert split(items, (0.8, 0.1, 0.1), seed=0) == parts


@pytest.mark.criterion("7 split contract")
def test_split_reproducible_across_processes():
    code = "from nerstd.stats import split; print(split(list(range(1000)), (0.8, 0.1, 0.1), 12345))"
    runs = [subprocess.run([sys.executable, "-c", code], capture_output=True, check=True).stdout
            for _ in range(2)]
    assert runs[0] == runs[1]
    assert runs[0].decode().strip() == str(split(list(range(1000)), (0.8, 0.1, 0.1), 12345))


# 8 ------------------------------------------------------------------------

@pytest.mark.criterion("8 format robustness")
def test_latin1_transcode():
    assert transcode(b"Espa\xf1a", "iso-8859-1") == "España".encode("utf-8")
    assert transcode(b"\xf1", "iso-8859-1").decode("utf-8") == "ñ"
    sents = read_conll(transcode((FIXTURES / "conll02_latin1.txt").read_bytes(), "iso-8859-1"))
    assert "España" in sents[1].tokens


@pytest.mark.criterion("8 format robustness")
def test_conllup_underscore_is_outside():
    sents = read_conllu_plus((FIXTURES / "hr500k.conllup").read_bytes(), ColumnSpec("NER"))
    assert sents[0].labels[2] == OUTSIDE and sents[0].labels[3] == OUTSIDE
    assert sents[0].labels[5] == OUTSIDE  # NER column absent on the row
    assert sents[1].labels[1] == OUTSIDE  # "*"


@pytest.mark.criterion("8 format robustness")
def test_bare_label_lines_removed():
    data = (FIXTURES / "masakhane_bare.conll").read_bytes()
    cleaned, dropped = drop_tokenless_lines(data)
    assert dropped == 2
    assert cleaned.count(b"\n") == data.count(b"\n") - 2
    assert [len(s) for s in read_conll(cleaned)] == [3, 2]


@pytest.mark.criterion("8 format robustness")
@pytest.mark.parametrize("name", ["clean.conll", "mixed_types.conll", "org_variants.conll", "core_five.conll"])
def test_canonical_write_idempotent(name):
    once = write_conll(read_conll((FIXTURES / name).read_bytes()))
    assert write_conll(read_conll(once)) == once


# 9 ------------------------------------------------------------------------

@pytest.mark.criterion("9 end-to-end determinism")
@pytest.mark.parametrize("name", ["kind", "thai", "conll02", "masakhane", "l3cube", "ronec", "hr500k", "galician"])
def test_run_twice_identical(fixture_tree, name):
    outdir = fixture_tree / "out" / name
    first = run_manifest(fixture_tree / f"{name}.yaml")
    snap = {p.name: p.read_bytes() for p in outdir.glob("*.conll")}
    second = run_manifest(fixture_tree / f"{name}.yaml")
    again = {p.name: p.read_bytes() for p in outdir.glob("*.conll")}
    assert snap == again and snap
    assert first.outputs == second.outputs == {k: digest(v) for k, v in snap.items()}


@pytest.mark.criterion("9 end-to-end determinism")
def test_validate_exit_codes(tmp_path):
    def run(path):
        return subprocess.run([sys.executable, "-m", "nerstd", "validate", str(path)],
                              capture_output=True).returncode
    assert run(FIXTURES / "clean.conll") == 0
    assert run(FIXTURES / "three_violations.conll") == 1
    assert run(tmp_path / "missing.conll") == 2
    bad = tmp_path / "bad.conll"
    bad.write_text("tok B_LOC\n")
    assert run(bad) == 2


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
