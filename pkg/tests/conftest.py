import random
import shutil
from pathlib import Path

import pytest
from hypothesis import strategies as st

from nerstd.labels import OUTSIDE, Label, Scheme, parse_label

FIXTURES = Path(__file__).parent / "fixtures"
TYPES = ("PER", "LOC", "ORG")


def labels(text, scheme=Scheme.BIO):
    return [parse_label(x, scheme) for x in text.split()]


def legal_walk(choose, n, scheme, types=TYPES):
    """Build a legal sequence by only ever choosing an allowed next label.

    The allowed-successor rules are written out here independently of
    nerstd.codec so generated sequences can serve as test inputs for it.
    """
    out = []
    for i in range(n):
        prev = out[-1] if out else OUTSIDE
        last = i == n - 1
        opts = [OUTSIDE]
        if scheme is Scheme.IO:
            opts += [Label("I", t) for t in types]
        elif scheme is Scheme.BIO:
            opts += [Label("B", t) for t in types]
            if not prev.is_outside:
                opts.append(Label("I", prev.entity_type))
        elif scheme is Scheme.IOB1:
            opts += [Label("I", t) for t in types]
            if not prev.is_outside:
                opts.append(Label("B", prev.entity_type))
        else:
            if prev.prefix in ("B", "I"):
                t = prev.entity_type
                opts = [Label("E", t)] if last else [Label("I", t), Label("E", t)]
            else:
                opts += [Label("S", t) for t in types]
                if not last:
                    opts += [Label("B", t) for t in types]
        out.append(choose(opts))
    return out


def random_legal(rng: random.Random, scheme, max_len=12, types=TYPES):
    return legal_walk(rng.choice, rng.randint(0, max_len), scheme, types)


@st.composite
def legal_sequences(draw, scheme, max_len=10, types=TYPES):
    n = draw(st.integers(0, max_len))
    return legal_walk(lambda opts: draw(st.sampled_from(opts)), n, scheme, types)


def any_label_strategy(scheme, types=TYPES):
    opts = [OUTSIDE] + [Label(p, t) for p in sorted(scheme.prefixes) for t in types]
    return st.sampled_from(opts)


def naive_bio_spans(seq):
    """Every (start, end, type) that is a complete BIO chunk, by brute force over all spans."""
    n = len(seq)
    found = []
    for s in range(n):
        for e in range(s + 1, n + 1):
            head = seq[s]
            if head.prefix != "B":
                continue
            t = head.entity_type
            if not all(seq[k] == Label("I", t) for k in range(s + 1, e)):
                continue
            if e < n and seq[e] == Label("I", t):
                continue
            found.append((s, e, t))
    return found


@pytest.fixture
def fixture_tree(tmp_path):
    dst = tmp_path / "fixtures"
    shutil.copytree(FIXTURES, dst, ignore=shutil.ignore_patterns("out"))
    return dst


# one PASS/FAIL line per acceptance criterion in the terminal summary
_acceptance: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _acceptance.get(key, "PASS")
        _acceptance[key] = "PASS" if prev == "PASS" and rep.passed else "FAIL"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(f"{_acceptance[key]}  criterion {key}")
