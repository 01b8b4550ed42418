"""Run every fixture manifest into a scratch copy and print reports and corpus stats.

    python3 scripts/standardize_fixtures.py [--keep DIR]
"""

import argparse
import shutil
import tempfile
from pathlib import Path

from nerstd.formats import read_conll
from nerstd.labels import Corpus
from nerstd.pipeline import run_manifest
from nerstd.stats import corpus_stats

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--keep", type=Path, help="copy fixtures here and leave outputs in place")
    args = ap.parse_args()

    root = args.keep or Path(tempfile.mkdtemp(prefix="nerstd-"))
    tree = root / "fixtures"
    if tree.exists():
        shutil.rmtree(tree)
    shutil.copytree(FIXTURES, tree)
    try:
        for manifest in sorted(tree.glob("*.yaml")):
            if manifest.name == "org_unify.yaml":
                continue
            report = run_manifest(manifest)
            outdir = tree / "out" / manifest.stem
            corpus = Corpus({name.rsplit(".", 1)[0]: read_conll((outdir / name).read_bytes())
                             for name in report.outputs})
            print(report.to_text(), end="")
            print(corpus_stats(corpus).to_text())
    finally:
        if args.keep is None:
            shutil.rmtree(root)


if __name__ == "__main__":
    main()
