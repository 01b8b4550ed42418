"""Manifest-driven standardization of one dataset.

A manifest is a YAML document, for example::

    dataset: kind
    source_encoding: utf-8
    scheme_in: IO
    output: out/kind
    splits:
      train: {path: raw/train.tsv, format: conll}
      test:  {path: raw/test.tsv, format: conll}
    transforms:
      - prefix_bare_labels: I
      - repair: conlleval
      - convert: BIO
      - apply_typemap: maps/unify.yaml

Relative paths resolve against the manifest's directory. The whole manifest
is checked before anything runs. Outputs are written only after every split
has been processed, so a failing run leaves no partial files behind.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from nerstd import codec, formats
from nerstd.codec import RepairStrategy
from nerstd.errors import ManifestError, NerStdError, StageError
from nerstd.labels import Scheme, TaggedSentence, normalize_label
from nerstd.typemap import core_map_from, default_core_map, load_typemap, map_sentences

FORMATS = ("conll", "conllup", "json", "sentid")

# stage name -> rank; ranks must not decrease along the transform list
STAGE_ORDER = {
    "drop_tokenless_lines": 0,
    "normalize_labels": 1,
    "prefix_bare_labels": 1,
    "flatten_nested": 1,
    "apply_overrides": 2,
    "repair": 3,
    "convert": 4,
    "apply_typemap": 5,
    "core_types": 6,
}

_FORMAT_OPTIONS = {
    "conll": {"token_column", "label_column", "delimiter", "comment_prefix", "keep_docstart"},
    "conllup": {"ner_column", "form_column"},
    "json": {"tokens_field", "labels_field"},
    "sentid": {"id_column", "token_column", "label_column", "delimiter", "skip_header"},
}


@dataclass(frozen=True)
class SplitSource:
    path: Path
    format: str = "conll"
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Stage:
    name: str
    arg: Any = None


@dataclass
class Manifest:
    dataset: str
    splits: dict[str, SplitSource]
    output: Path
    source_encoding: str = "utf-8"
    scheme_in: Scheme = Scheme.BIO
    transforms: list[Stage] = field(default_factory=list)

    def stage(self, name: str) -> Stage | None:
        return next((s for s in self.transforms if s.name == name), None)


@dataclass
class RunReport:
    dataset: str
    splits: dict[str, dict[str, dict[str, Any]]] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0

    def totals(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for stages in self.splits.values():
            for counters in stages.values():
                for key, value in counters.items():
                    if isinstance(value, int):
                        out[key] = out.get(key, 0) + value
        return out

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "splits": self.splits,
            "totals": self.totals(),
            "outputs": self.outputs,
            "wall_time": self.wall_time,
        }

    def to_text(self) -> str:
        lines = [f"dataset: {self.dataset}"]
        for split, stages in self.splits.items():
            lines.append(f"[{split}]")
            for stage, counters in stages.items():
                flat = ", ".join(f"{k}={v}" for k, v in counters.items() if not isinstance(v, dict))
                lines.append(f"  {stage}: {flat}")
        for name, digest in self.outputs.items():
            lines.append(f"sha256 {digest}  {name}")
        lines.append(f"wall time: {self.wall_time:.3f}s")
        return "\n".join(lines) + "\n"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ManifestError(message)


def _parse_stage(entry: Any, base: Path) -> Stage:
    if isinstance(entry, str):
        name, arg = entry, None
    elif isinstance(entry, dict) and len(entry) == 1:
        (name, arg), = entry.items()
    else:
        raise ManifestError(f"transform must be a name or a one-key mapping: {entry!r}")
    _require(name in STAGE_ORDER, f"unknown transform {name!r}")
    if name == "flatten_nested":
        arg = 0 if arg is None else arg
        _require(isinstance(arg, int) and arg >= 0, "flatten_nested takes a layer index")
    elif name == "prefix_bare_labels":
        arg = "I" if arg is None else arg
        _require(arg in ("B", "I"), "prefix_bare_labels takes B or I")
    elif name == "repair":
        try:
            arg = RepairStrategy.parse(arg or "conlleval")
        except ValueError as exc:
            raise ManifestError(str(exc)) from None
    elif name == "convert":
        _require(arg is not None, "convert needs a target scheme")
        try:
            arg = Scheme.parse(arg)
        except ValueError as exc:
            raise ManifestError(str(exc)) from None
    elif name == "apply_overrides":
        _require(isinstance(arg, dict) and arg, "apply_overrides maps split names to files")
        arg = {split: base / p for split, p in arg.items()}
    elif name == "apply_typemap":
        _require(isinstance(arg, str), "apply_typemap needs a map file")
        arg = base / arg
    elif name == "core_types":
        arg = None if arg in (None, "default") else base / arg
    elif arg is not None:
        raise ManifestError(f"transform {name!r} takes no argument")
    return Stage(name, arg)


def parse_manifest(data: dict, base: Path) -> Manifest:
    _require(isinstance(data, dict), "manifest must be a mapping")
    known = {"dataset", "source_encoding", "scheme_in", "splits", "transforms", "output"}
    extra = set(data) - known
    _require(not extra, f"unknown manifest keys: {sorted(extra)}")
    for key in ("dataset", "splits", "output"):
        _require(key in data, f"manifest is missing {key!r}")
    splits = {}
    _require(isinstance(data["splits"], dict) and data["splits"], "splits must be a mapping")
    for name, src in data["splits"].items():
        _require(isinstance(src, dict) and "path" in src, f"split {name!r} needs a path")
        fmt = src.get("format", "conll")
        _require(fmt in FORMATS, f"split {name!r}: unknown format {fmt!r}")
        config = dict(src.get("config") or {})
        bad = set(config) - _FORMAT_OPTIONS[fmt]
        _require(not bad, f"split {name!r}: options {sorted(bad)} not valid for {fmt}")
        splits[str(name)] = SplitSource(base / src["path"], fmt, config)
    try:
        scheme_in = Scheme.parse(data.get("scheme_in", "BIO"))
        formats._canonical_encoding(data.get("source_encoding", "utf-8"))
    except ValueError as exc:
        raise ManifestError(str(exc)) from None
    stages = [_parse_stage(e, base) for e in data.get("transforms") or []]
    manifest = Manifest(
        dataset=str(data["dataset"]),
        splits=splits,
        output=base / data["output"],
        source_encoding=data.get("source_encoding", "utf-8"),
        scheme_in=scheme_in,
        transforms=stages,
    )
    check_manifest(manifest)
    return manifest


def check_manifest(manifest: Manifest) -> None:
    """Stage order, uniqueness, format compatibility and path existence."""
    names = [s.name for s in manifest.transforms]
    for name in set(names):
        _require(names.count(name) == 1, f"transform {name!r} listed more than once")
    for a, b in zip(manifest.transforms, manifest.transforms[1:]):
        _require(STAGE_ORDER[a.name] <= STAGE_ORDER[b.name],
                 f"stage order: {b.name!r} must not come after {a.name!r}")
    if "flatten_nested" in names:
        _require(all(s.format == "conll" for s in manifest.splits.values()),
                 "flatten_nested needs conll input")
    for name, src in manifest.splits.items():
        _require(src.path.is_file(), f"split {name!r}: no such file {src.path}")
    for stage in manifest.transforms:
        paths = []
        if stage.name == "apply_overrides":
            for split in stage.arg:
                _require(split in manifest.splits, f"overrides for unknown split {split!r}")
            paths = list(stage.arg.values())
        elif stage.name in ("apply_typemap", "core_types") and stage.arg is not None:
            paths = [stage.arg]
        for p in paths:
            _require(p.is_file(), f"{stage.name}: no such file {p}")


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: {exc}") from None
    return parse_manifest(data, path.parent)


def _prefix_bare(prefix: str):
    def fn(raw: str) -> str:
        if raw == "O" or (len(raw) > 1 and raw[1] == "-"):
            return raw
        return f"{prefix}-{raw}"
    return fn


def _label_fn(manifest: Manifest):
    fns = []
    if manifest.stage("normalize_labels"):
        scheme = manifest.scheme_in
        fns.append(lambda raw: normalize_label(raw, scheme))
    bare = manifest.stage("prefix_bare_labels")
    if bare:
        fns.append(_prefix_bare(bare.arg))
    if not fns:
        return None

    def composed(raw: str) -> str:
        for fn in fns:
            raw = fn(raw)
        return raw
    return composed


def _read_split(manifest: Manifest, src: SplitSource, data: bytes) -> list[TaggedSentence]:
    scheme = manifest.scheme_in
    label_fn = _label_fn(manifest)
    opts = src.config
    if src.format == "conll":
        cfg = formats.ConllConfig(
            token_column=opts.get("token_column", 0),
            label_column=opts.get("label_column", formats.LAST),
            comment_prefix=opts.get("comment_prefix"),
            keep_docstart=opts.get("keep_docstart", False),
        )
        nested = manifest.stage("flatten_nested")
        if nested:
            return formats.read_conll_nested(data, cfg, scheme, nested.arg, label_fn)
        return formats.read_conll(data, cfg, scheme, label_fn)
    if src.format == "conllup":
        spec = formats.ColumnSpec(opts.get("ner_column", "NER"), opts.get("form_column", "FORM"))
        return formats.read_conllu_plus(data, spec, scheme, label_fn)
    if src.format == "json":
        spec = formats.JsonRecordSpec(opts.get("tokens_field", "tokens"),
                                      opts.get("labels_field", "ner_tags"))
        return formats.read_json_records(data, spec, scheme, label_fn)
    delim = opts.get("delimiter")
    cfg = formats.SentIdConfig(
        id_column=opts.get("id_column", 0),
        token_column=opts.get("token_column", 1),
        label_column=opts.get("label_column", 2),
        delimiter={"tab": "\t", "comma": ","}.get(delim, delim),
        skip_header=opts.get("skip_header", False),
    )
    return formats.read_sentence_id_delimited(data, cfg, scheme)


def process_split(manifest: Manifest, name: str) -> tuple[bytes, dict]:
    """Run every stage on one split; returns the output bytes and stage counters."""
    src = manifest.splits[name]
    counters: dict[str, dict[str, Any]] = {}
    stage = "read"
    try:
        data = formats.transcode(src.path.read_bytes(), manifest.source_encoding)
        if manifest.stage("drop_tokenless_lines"):
            stage = "drop_tokenless_lines"
            data, dropped = formats.drop_tokenless_lines(data)
            counters[stage] = {"lines_dropped": dropped}
        stage = "read"
        sentences = _read_split(manifest, src, data)
        counters[stage] = {"sentences": len(sentences), "tokens": sum(map(len, sentences))}
        scheme = manifest.scheme_in
        for st in manifest.transforms:
            stage = st.name
            if st.name == "apply_overrides":
                path = st.arg.get(name)
                if path is None:
                    continue
                overrides = codec.load_overrides(path.read_text(encoding="utf-8"), scheme)
                sentences, applied = codec.apply_overrides(sentences, overrides)
                counters[stage] = {"overrides_applied": applied}
            elif st.name == "repair":
                found = repaired = 0
                out = []
                for si, sent in enumerate(sentences):
                    violations = codec.validate(sent.labels, scheme, si)
                    found += len(violations)
                    if violations:
                        fixed = codec.repair(sent.labels, scheme, st.arg)
                        repaired += sum(a != b for a, b in zip(fixed, sent.labels))
                        sent = sent.with_labels(fixed)
                    out.append(sent)
                sentences = out
                counters[stage] = {"violations_found": found, "repairs_applied": repaired}
            elif st.name == "convert":
                sentences = [s.with_labels(codec.convert(s.labels, scheme, st.arg))
                             for s in sentences]
                counters[stage] = {"from": scheme.value, "to": st.arg.value}
                scheme = st.arg
            elif st.name in ("apply_typemap", "core_types"):
                if st.name == "apply_typemap":
                    tmap = load_typemap(st.arg)
                else:
                    tmap = core_map_from(load_typemap(st.arg) if st.arg else default_core_map())
                sentences, changes = map_sentences(sentences, tmap, scheme)
                counters[stage] = {
                    "type_changes": sum(changes.values()),
                    "changes": {f"{a}->{b}": n for (a, b), n in sorted(changes.items())},
                }
        stage = "write"
        out = formats.write_conll(sentences, formats.ConllConfig(), scheme)
    except (NerStdError, OSError, ValueError) as exc:
        raise StageError(stage, str(src.path), exc) from exc
    return out, counters


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_manifest(manifest: Manifest | str | Path) -> RunReport:
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    check_manifest(manifest)
    started = time.perf_counter()
    report = RunReport(manifest.dataset)
    outputs: dict[str, bytes] = {}
    for name in manifest.splits:
        data, counters = process_split(manifest, name)
        outputs[f"{name}.conll"] = data
        report.splits[name] = counters
    manifest.output.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for fname, data in outputs.items():
            path = manifest.output / fname
            path.write_bytes(data)
            written.append(path)
            report.outputs[fname] = digest(data)
        report.wall_time = time.perf_counter() - started
        (manifest.output / "run_report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(manifest.output / "run_report.json")
        (manifest.output / "run_report.txt").write_text(report.to_text(), encoding="utf-8")
    except OSError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        raise StageError("write", str(manifest.output), exc) from exc
    return report
