"""Readers and writers for the on-disk corpus formats.

Readers take ``bytes``, a binary stream, or a text stream and return a list
of :class:`TaggedSentence`. Bytes are decoded as strict UTF-8; run
:func:`transcode` first for Latin-1 sources. Readers never repair labels. The
only label rewriting they do is through an explicit ``label_fn`` hook (for
example :func:`nerstd.labels.normalize_label`).
"""

from __future__ import annotations

import codecs
import io
import json
from dataclasses import dataclass
from typing import BinaryIO, Callable, Iterable, Iterator, Sequence, TextIO, Union

from nerstd.codec import flatten_nested, validate
from nerstd.errors import (
    ColumnOutOfRange,
    EmptyTokenLine,
    FieldMissing,
    FormatError,
    InvalidSequence,
    InvalidUtf8,
    LengthMismatch,
    MalformedLabel,
    MissingColumn,
    MissingGlobalColumns,
    UnknownNerColumn,
    UnwritableToken,
)
from nerstd.labels import (
    OUTSIDE,
    Label,
    Scheme,
    TaggedSentence,
    normalize_label,
    parse_label,
)

Source = Union[bytes, str, BinaryIO, TextIO]
LabelFn = Callable[[str], str]

LAST = -1
DOCSTART = "-DOCSTART-"
DELIMITERS = {"space": " ", "tab": "\t"}


@dataclass(frozen=True)
class ConllConfig:
    token_column: int = 0
    label_column: int = LAST
    delimiter: str = "space"  # used on write; reading always splits on any whitespace
    comment_prefix: str | None = None
    keep_docstart: bool = False

    def __post_init__(self):
        if self.label_column != LAST and self.label_column == self.token_column:
            raise ValueError("token and label columns must differ")
        if self.delimiter not in DELIMITERS:
            raise ValueError(f"delimiter must be one of {sorted(DELIMITERS)}")


@dataclass(frozen=True)
class ColumnSpec:
    ner_column_name: str = "NER"
    form_column_name: str = "FORM"


@dataclass(frozen=True)
class JsonRecordSpec:
    tokens_field: str = "tokens"
    labels_field: str = "ner_tags"

    def __post_init__(self):
        if not self.tokens_field or not self.labels_field:
            raise ValueError("field names must be non-empty")


@dataclass(frozen=True)
class SentIdConfig:
    id_column: int = 0
    token_column: int = 1
    label_column: int = 2
    delimiter: str | None = None  # None splits on any whitespace
    skip_header: bool = False


def iter_lines(source: Source) -> Iterator[str]:
    """Yield lines without their terminators; CRLF is accepted."""
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    if isinstance(source, str):
        source = io.StringIO(source)
    for lineno, raw in enumerate(source, 1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise InvalidUtf8(f"invalid UTF-8 ({exc.reason})", lineno) from None
        yield raw.rstrip("\r\n")


def _read_text(source: Source) -> str:
    if isinstance(source, str):
        return source
    if not isinstance(source, bytes):
        source = source.read()
        if isinstance(source, str):
            return source
    try:
        return source.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidUtf8(f"invalid UTF-8 at byte {exc.start}") from None


def _parse(raw: str, scheme: Scheme, label_fn: LabelFn | None, line: int) -> Label:
    if label_fn is not None:
        raw = label_fn(raw)
    try:
        return parse_label(raw, scheme)
    except MalformedLabel as exc:
        raise MalformedLabel(raw, exc.reason, line) from None


def _conll_rows(source: Source, cfg: ConllConfig) -> Iterator[tuple[int, list[str] | None]]:
    """Yield (line number, fields) with ``None`` fields marking a sentence break."""
    for lineno, line in enumerate(iter_lines(source), 1):
        if cfg.comment_prefix and line.startswith(cfg.comment_prefix):
            continue
        fields = line.split()
        if not fields:
            yield lineno, None
            continue
        yield lineno, fields


def _group(rows: Iterable[tuple[int, list[str] | None]]) -> Iterator[list[tuple[int, list[str]]]]:
    current: list[tuple[int, list[str]]] = []
    for lineno, fields in rows:
        if fields is None:
            if current:
                yield current
                current = []
        else:
            current.append((lineno, fields))
    if current:
        yield current


def _token_of(fields: list[str], cfg: ConllConfig, lineno: int) -> str:
    if len(fields) == 1:
        raise EmptyTokenLine(f"label {fields[0]!r} without a token", lineno)
    needed = max(cfg.token_column, cfg.label_column) + 1
    if len(fields) < needed:
        raise ColumnOutOfRange(f"expected at least {needed} columns, got {len(fields)}", lineno)
    return fields[cfg.token_column]


def read_conll(source: Source, cfg: ConllConfig = ConllConfig(), scheme: Scheme = Scheme.BIO,
               label_fn: LabelFn | None = None) -> list[TaggedSentence]:
    """Read whitespace-separated CoNLL text, one token per line."""
    sentences = []
    for block in _group(_conll_rows(source, cfg)):
        tokens, labels = [], []
        for lineno, fields in block:
            if fields[0] == DOCSTART and not cfg.keep_docstart:
                continue
            token = _token_of(fields, cfg, lineno)
            tokens.append(token)
            labels.append(_parse(fields[cfg.label_column], scheme, label_fn, lineno))
        if tokens:
            sentences.append(TaggedSentence(tokens, labels))
    return sentences


def read_conll_layers(source: Source, cfg: ConllConfig = ConllConfig(),
                      scheme: Scheme = Scheme.BIOES, label_fn: LabelFn | None = None
                      ) -> list[tuple[list[str], list[list[Label]]]]:
    """Read nested annotation: every column right of the token is one layer.

    Layer 0 is the leftmost label column (the outermost annotation).
    """
    out = []
    for block in _group(_conll_rows(source, cfg)):
        tokens = []
        linenos = []
        rows: list[list[Label]] = []
        for lineno, fields in block:
            if fields[0] == DOCSTART and not cfg.keep_docstart:
                continue
            if len(fields) == 1:
                raise EmptyTokenLine(f"label {fields[0]!r} without a token", lineno)
            tokens.append(fields[cfg.token_column])
            linenos.append(lineno)
            rows.append([_parse(f, scheme, label_fn, lineno) for f in fields[cfg.token_column + 1:]])
        if not tokens:
            continue
        depth = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != depth:
                raise ColumnOutOfRange(
                    f"token {i} has {len(row)} label layers, expected {depth}", linenos[i]
                )
        layers = [[row[k] for row in rows] for k in range(depth)]
        out.append((tokens, layers))
    return out


def read_conll_nested(source: Source, cfg: ConllConfig = ConllConfig(),
                      scheme: Scheme = Scheme.BIOES, layer: int = 0,
                      label_fn: LabelFn | None = None) -> list[TaggedSentence]:
    return [TaggedSentence(tokens, flatten_nested(layers, layer))
            for tokens, layers in read_conll_layers(source, cfg, scheme, label_fn)]


def write_conll(sentences: Sequence[TaggedSentence], cfg: ConllConfig = ConllConfig(),
                scheme: Scheme = Scheme.BIO) -> bytes:
    """Canonical CoNLL: ``token<delim>label`` lines, a blank line after each sentence."""
    delim = DELIMITERS[cfg.delimiter]
    buf = io.StringIO()
    for si, sent in enumerate(sentences):
        violations = validate(sent.labels, scheme, si)
        if violations:
            v = violations[0]
            raise InvalidSequence(
                f"sentence {si}, token {v.token_index}: {v.kind.value} under {scheme.value}"
            )
        for tok, label in zip(sent.tokens, sent.labels):
            if any(c.isspace() for c in tok):
                raise UnwritableToken(f"sentence {si}: token {tok!r} contains whitespace")
            buf.write(tok)
            buf.write(delim)
            buf.write(str(label))
            buf.write("\n")
        buf.write("\n")
    return buf.getvalue().encode("utf-8")


_ENCODINGS = {"iso8859-1": "latin-1", "latin-1": "latin-1", "utf-8": "utf-8"}


def _canonical_encoding(name: str) -> str:
    try:
        info = codecs.lookup(name)
    except LookupError:
        raise ValueError(f"unknown encoding {name!r}") from None
    if info.name not in _ENCODINGS:
        raise ValueError(f"unsupported source encoding {name!r}; use ISO-8859-1 or UTF-8")
    return _ENCODINGS[info.name]


def transcode(data: bytes, source_encoding: str) -> bytes:
    """Re-encode ``data`` from ``source_encoding`` to UTF-8.

    The encoding is always declared by the caller. UTF-8 input is checked and
    passed through unchanged.
    """
    enc = _canonical_encoding(source_encoding)
    if enc == "utf-8":
        try:
            data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidUtf8(f"invalid UTF-8 at byte {exc.start}") from None
        return data
    return data.decode("latin-1").encode("utf-8")


def transcode_stream(src: BinaryIO, dst: BinaryIO, source_encoding: str,
                     chunk_size: int = 1 << 16) -> int:
    """Streaming form of :func:`transcode`; returns the number of bytes written."""
    enc = _canonical_encoding(source_encoding)
    decoder = codecs.getincrementaldecoder(enc)("strict")
    written = 0
    consumed = 0
    while True:
        chunk = src.read(chunk_size)
        final = not chunk
        try:
            text = decoder.decode(chunk, final=final)
        except UnicodeDecodeError as exc:
            raise InvalidUtf8(f"invalid UTF-8 near byte {consumed + exc.start}") from None
        consumed += len(chunk)
        out = text.encode("utf-8")
        dst.write(out)
        written += len(out)
        if final:
            return written


PLACEHOLDERS = {"_", "*"}


def read_conllu_plus(source: Source, spec: ColumnSpec = ColumnSpec(),
                     scheme: Scheme = Scheme.BIO,
                     label_fn: LabelFn | None = None) -> list[TaggedSentence]:
    """Read CoNLL-U Plus; tokens without an NER value are outside."""
    columns: list[str] | None = None
    ner_idx = form_idx = -1
    sentences = []
    tokens: list[str] = []
    labels: list[Label] = []
    meta: dict[str, str] = {}

    def flush():
        nonlocal tokens, labels, meta
        if tokens:
            sentences.append(TaggedSentence(tokens, labels, meta))
        tokens, labels, meta = [], [], {}

    for lineno, line in enumerate(iter_lines(source), 1):
        if columns is None:
            if not line.strip():
                continue
            if not line.startswith("# global.columns"):
                raise MissingGlobalColumns("first line must be '# global.columns = ...'", lineno)
            _, _, value = line.partition("=")
            columns = value.split()
            if spec.ner_column_name not in columns:
                raise UnknownNerColumn(
                    f"column {spec.ner_column_name!r} not in {columns}", lineno
                )
            if spec.form_column_name not in columns:
                raise MissingColumn(f"column {spec.form_column_name!r} not in {columns}", lineno)
            ner_idx = columns.index(spec.ner_column_name)
            form_idx = columns.index(spec.form_column_name)
            continue
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() in ("sent_id", "text"):
                meta[key.strip()] = value.strip()
            continue
        fields = line.split("\t")
        token_id = fields[0]
        if "-" in token_id or "." in token_id:
            continue
        if form_idx >= len(fields):
            raise ColumnOutOfRange(f"row has {len(fields)} columns, no {spec.form_column_name}",
                                   lineno)
        raw = fields[ner_idx].strip() if ner_idx < len(fields) else ""
        tokens.append(fields[form_idx])
        if not raw or raw in PLACEHOLDERS:
            labels.append(OUTSIDE)
        else:
            labels.append(_parse(raw, scheme, label_fn, lineno))
    if columns is None:
        raise MissingGlobalColumns("no '# global.columns' header")
    flush()
    return sentences


def _json_records(text: str) -> Iterator[tuple[int, object]]:
    stripped = text.lstrip()
    if not stripped:
        return
    if stripped.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        yield from enumerate(data)
        return
    index = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            yield index, json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON record: {exc.msg}", lineno) from None
        index += 1


def read_json_records(source: Source, spec: JsonRecordSpec = JsonRecordSpec(),
                      scheme: Scheme = Scheme.BIO,
                      label_fn: LabelFn | None = None) -> list[TaggedSentence]:
    """Read a JSON array of records or newline-delimited JSON records."""
    sentences = []
    for index, record in _json_records(_read_text(source)):
        if not isinstance(record, dict):
            raise FormatError(f"record {index} is not an object")
        for name in (spec.tokens_field, spec.labels_field):
            if name not in record:
                raise FieldMissing(f"record {index} has no field {name!r}")
        tokens, raw_labels = record[spec.tokens_field], record[spec.labels_field]
        if len(tokens) != len(raw_labels):
            raise LengthMismatch(
                f"record {index}: {len(tokens)} tokens but {len(raw_labels)} labels"
            )
        try:
            labels = [_parse(str(l), scheme, label_fn, None) for l in raw_labels]
        except MalformedLabel as exc:
            raise MalformedLabel(exc.raw, f"{exc.reason} (record {index})") from None
        if tokens:
            sentences.append(TaggedSentence(tokens, labels, {"record": str(index)}))
    return sentences


def read_sentence_id_delimited(source: Source, cfg: SentIdConfig = SentIdConfig(),
                               scheme: Scheme = Scheme.BIO) -> list[TaggedSentence]:
    """Read rows of (sentence id, token, label); a sentence ends when the id changes.

    Labels always pass through :func:`normalize_label` (``BLOC`` -> ``B-LOC``).
    """
    sentences = []
    tokens: list[str] = []
    labels: list[Label] = []
    current_id: str | None = None
    needed = max(cfg.id_column, cfg.token_column, cfg.label_column) + 1
    fn = lambda raw: normalize_label(raw, scheme)  # noqa: E731
    for lineno, line in enumerate(iter_lines(source), 1):
        if cfg.skip_header and lineno == 1:
            continue
        if not line.strip():
            continue
        fields = line.split(cfg.delimiter) if cfg.delimiter else line.split()
        if len(fields) < needed:
            raise MissingColumn(f"expected {needed} columns, got {len(fields)}", lineno)
        sid = fields[cfg.id_column].strip()
        if current_id is not None and sid != current_id and tokens:
            sentences.append(TaggedSentence(tokens, labels, {"sentence_id": current_id}))
            tokens, labels = [], []
        current_id = sid
        tokens.append(fields[cfg.token_column].strip())
        labels.append(_parse(fields[cfg.label_column].strip(), scheme, fn, lineno))
    if tokens:
        sentences.append(TaggedSentence(tokens, labels, {"sentence_id": current_id}))
    return sentences


def _is_bare_label(field: str) -> bool:
    try:
        parse_label(field, Scheme.BIOES)
    except MalformedLabel:
        return False
    return True


def drop_tokenless_lines(data: bytes) -> tuple[bytes, int]:
    """Remove lines holding a single label field and no token.

    All other bytes, including line terminators, are preserved.
    """
    kept = []
    removed = 0
    for line in data.splitlines(keepends=True):
        fields = line.split()
        if len(fields) == 1:
            try:
                field = fields[0].decode("utf-8")
            except UnicodeDecodeError:
                field = None
            if field is not None and _is_bare_label(field):
                removed += 1
                continue
        kept.append(line)
    return b"".join(kept), removed
