"""Command line interface: ``nerstd <command> [options]``.

Exit codes: 0 success, 1 data findings (validation violations, unrepaired
input), 2 usage or operational errors. Data and reports go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from nerstd import codec, formats
from nerstd.codec import RepairStrategy
from nerstd.errors import NerStdError, UnrepairedViolations
from nerstd.evaluation import ScoreReport, aggregate_reports, score
from nerstd.labels import Corpus, Scheme, normalize_label
from nerstd.pipeline import run_manifest
from nerstd.stats import corpus_stats, split
from nerstd.typemap import (
    core_map_from,
    default_core_map,
    format_changes,
    load_typemap,
    map_sentences,
)


formats_choices = ["conll", "conllup", "json", "sentid"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # prefix matching would let --to collide with the global --token-column
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--format", choices=formats_choices, default=d("conll"),
                   help="input format (default: conll)")
    g.add_argument("--scheme", default=d("BIO"), help="input chunk encoding (default: BIO)")
    g.add_argument("--encoding", default=d("utf-8"),
                   help="declared input encoding: utf-8 or iso-8859-1 (default: utf-8)")
    g.add_argument("--output", "-o", default=d(None), help="output file (default: stdout)")
    g.add_argument("--quiet", "-q", action="store_true", default=d(False))
    f = parser.add_argument_group("format options")
    f.add_argument("--token-column", type=int, default=d(None))
    f.add_argument("--label-column", type=int, default=d(None))
    f.add_argument("--delimiter", choices=["space", "tab"], default=d("space"),
                   help="CoNLL output delimiter")
    f.add_argument("--comment-prefix", default=d(None))
    f.add_argument("--keep-docstart", action="store_true", default=d(False))
    f.add_argument("--layer", type=int, default=d(None),
                   help="read nested label columns and keep this layer (0 = outermost)")
    f.add_argument("--normalize-labels", action="store_true", default=d(False),
                   help="insert missing prefix dashes (BLOC -> B-LOC) while reading")
    f.add_argument("--ner-column", default=d("NER"), help="CoNLL-U Plus NER column name")
    f.add_argument("--tokens-field", default=d("tokens"), help="JSON tokens field")
    f.add_argument("--labels-field", default=d("ner_tags"), help="JSON labels field")
    f.add_argument("--id-column", type=int, default=d(0), help="sentence-id column")
    f.add_argument("--skip-header", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nerstd", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help):
        p = sub.add_parser(name, help=help)
        _common(p, suppress=True)
        return p

    p = add("validate", "report illegal label transitions")
    p.add_argument("input")
    p.add_argument("--json", action="store_true", help="JSON array instead of TSV lines")

    p = add("repair", "repair illegal label transitions")
    p.add_argument("input")
    p.add_argument("--strategy", default="conlleval", choices=[s.value for s in RepairStrategy])
    p.add_argument("--overrides", help="manual fixes: sentence, token, label per line")

    p = add("convert", "convert between chunk encodings")
    p.add_argument("input")
    p.add_argument("--to", required=True, dest="target")

    p = add("map-types", "rename and drop entity types with a type map")
    p.add_argument("input")
    p.add_argument("--map", required=True, dest="map_path")

    p = add("core-types", "reduce to LOC/ORG/PER")
    p.add_argument("input")
    p.add_argument("--map", dest="map_path", help="core map (default: built-in)")

    p = add("stats", "sentence, token and mention counts")
    p.add_argument("inputs", nargs="+", help="files, optionally as NAME=PATH")
    p.add_argument("--json", action="store_true")

    p = add("split", "seeded shuffle and train/dev/test split")
    p.add_argument("input")
    p.add_argument("--ratios", type=float, nargs=3, default=[0.8, 0.1, 0.1])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--contiguous", action="store_true",
                   help="cut blocks in input order instead of shuffling")

    p = add("score", "conlleval-style span precision, recall and F1")
    p.add_argument("gold")
    p.add_argument("predicted")
    p.add_argument("--json", action="store_true")

    p = add("run", "run a standardization manifest")
    p.add_argument("manifest")

    p = add("aggregate", "mean F1 and standard error over JSON score reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--json", action="store_true")
    return parser


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def read_input(path: str, args) -> list:
    scheme = Scheme.parse(args.scheme)
    data = formats.transcode(_read_bytes(path), args.encoding)
    label_fn = (lambda raw: normalize_label(raw, scheme)) if args.normalize_labels else None
    if args.format == "conll":
        kwargs = {"comment_prefix": args.comment_prefix, "keep_docstart": args.keep_docstart}
        if args.token_column is not None:
            kwargs["token_column"] = args.token_column
        if args.label_column is not None:
            kwargs["label_column"] = args.label_column
        cfg = formats.ConllConfig(**kwargs)
        if args.layer is not None:
            return formats.read_conll_nested(data, cfg, scheme, args.layer, label_fn)
        return formats.read_conll(data, cfg, scheme, label_fn)
    if args.format == "conllup":
        return formats.read_conllu_plus(data, formats.ColumnSpec(args.ner_column), scheme, label_fn)
    if args.format == "json":
        spec = formats.JsonRecordSpec(args.tokens_field, args.labels_field)
        return formats.read_json_records(data, spec, scheme, label_fn)
    cfg = formats.SentIdConfig(
        id_column=args.id_column,
        token_column=1 if args.token_column is None else args.token_column,
        label_column=2 if args.label_column is None else args.label_column,
        skip_header=args.skip_header,
    )
    return formats.read_sentence_id_delimited(data, cfg, scheme)


def _emit(data: bytes | str, args) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _write(sentences, args, scheme: Scheme) -> None:
    cfg = formats.ConllConfig(delimiter=args.delimiter)
    _emit(formats.write_conll(sentences, cfg, scheme), args)


def _note(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def cmd_validate(args) -> int:
    sentences = read_input(args.input, args)
    violations = codec.validate_sentences(sentences, Scheme.parse(args.scheme))
    if not args.quiet and (violations or args.json):
        if args.json:
            _emit(codec.violations_to_json(violations) + "\n", args)
        else:
            _emit(codec.violations_to_text(violations), args)
    return 1 if violations else 0


def cmd_repair(args) -> int:
    scheme = Scheme.parse(args.scheme)
    sentences = read_input(args.input, args)
    if args.overrides:
        overrides = codec.load_overrides(Path(args.overrides).read_text(encoding="utf-8"), scheme)
        sentences, applied = codec.apply_overrides(sentences, overrides)
        _note(args, f"applied {applied} override(s)")
    strategy = RepairStrategy.parse(args.strategy)
    out = []
    found = 0
    for si, sent in enumerate(sentences):
        violations = codec.validate(sent.labels, scheme, si)
        found += len(violations)
        if violations and strategy is RepairStrategy.NONE:
            raise UnrepairedViolations(codec.validate_sentences(sentences, scheme))
        out.append(sent.with_labels(codec.repair(sent.labels, scheme, strategy)))
    _note(args, f"repaired {found} violation(s)")
    _write(out, args, scheme)
    return 0


def cmd_convert(args) -> int:
    source, target = Scheme.parse(args.scheme), Scheme.parse(args.target)
    sentences = read_input(args.input, args)
    out = []
    for si, s in enumerate(sentences):
        mentions = codec.decode(s.labels, source, si)
        out.append(s.with_labels(codec.encode(mentions, len(s), target)))
    _write(out, args, target)
    return 0


def _map(args, tmap) -> int:
    scheme = Scheme.parse(args.scheme)
    sentences, changes = map_sentences(read_input(args.input, args), tmap, scheme)
    if not args.quiet and changes:
        sys.stderr.write(format_changes(changes))
    _write(sentences, args, scheme)
    return 0


def cmd_map_types(args) -> int:
    return _map(args, load_typemap(args.map_path))


def cmd_core_types(args) -> int:
    tmap = load_typemap(args.map_path) if args.map_path else default_core_map()
    return _map(args, core_map_from(tmap))


def cmd_stats(args) -> int:
    splits = {}
    for item in args.inputs:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        if name in splits:
            raise UsageError(f"split name {name!r} given twice")
        splits[name] = read_input(path, args)
    stats = corpus_stats(Corpus(splits), Scheme.parse(args.scheme))
    _emit(stats.to_json() + "\n" if args.json else stats.to_text(), args)
    return 0


def cmd_split(args) -> int:
    if not args.output:
        raise UsageError("split needs --output DIR")
    sentences = read_input(args.input, args)
    parts = split(sentences, args.ratios, args.seed, shuffle=not args.contiguous)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = formats.ConllConfig(delimiter=args.delimiter)
    scheme = Scheme.parse(args.scheme)
    for name, part in zip(("train", "dev", "test"), parts):
        (outdir / f"{name}.conll").write_bytes(formats.write_conll(part, cfg, scheme))
    _note(args, "sizes: " + " ".join(str(len(p)) for p in parts))
    return 0


def cmd_score(args) -> int:
    gold = read_input(args.gold, args)
    predicted = read_input(args.predicted, args)
    report = score(gold, predicted, Scheme.parse(args.scheme))
    _emit(report.to_json() + "\n" if args.json else report.to_text(), args)
    return 0


def cmd_run(args) -> int:
    report = run_manifest(args.manifest)
    if not args.quiet:
        _emit(report.to_text(), args)
    return 0


def cmd_aggregate(args) -> int:
    reports = [ScoreReport.from_dict(json.loads(Path(p).read_text(encoding="utf-8")))
               for p in args.reports]
    agg = aggregate_reports(reports)
    if args.json:
        data = {k: {"n": a.n, "mean": a.mean, "stderr": a.stderr} for k, a in agg.items()}
        _emit(json.dumps(data, indent=2) + "\n", args)
    else:
        _emit("".join(f"{k}\t{a}\n" for k, a in agg.items()), args)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "repair": cmd_repair,
    "convert": cmd_convert,
    "map-types": cmd_map_types,
    "core-types": cmd_core_types,
    "stats": cmd_stats,
    "split": cmd_split,
    "score": cmd_score,
    "run": cmd_run,
    "aggregate": cmd_aggregate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UnrepairedViolations as exc:
        print(f"nerstd: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"nerstd: error: {exc}", file=sys.stderr)
        return 2
    except (NerStdError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"nerstd: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
