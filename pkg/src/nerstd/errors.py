"""Exception types raised across the package.

Every error carries enough location information (line, sentence, record) to
point a user at the offending input. All derive from :class:`NerStdError` so
the CLI can turn them into exit code 2 in one place.
"""

from __future__ import annotations


class NerStdError(Exception):
    """Base class for all errors raised by nerstd."""


class MalformedLabel(NerStdError, ValueError):
    def __init__(self, raw: str, reason: str, line: int | None = None):
        self.raw = raw
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}malformed label {raw!r}: {reason}")


class InvalidSequence(NerStdError, ValueError):
    """A label sequence is not a legal encoding under its scheme."""


class UnrepairedViolations(NerStdError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            f"{len(self.violations)} label transition violation(s) and no repair strategy"
        )


class OverlappingMentions(NerStdError, ValueError):
    pass


class OutOfRange(NerStdError, ValueError):
    pass


class RaggedLayers(NerStdError, ValueError):
    pass


class LayerOutOfRange(NerStdError, IndexError):
    pass


class FormatError(NerStdError, ValueError):
    """Structural problem in an input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class EmptyTokenLine(FormatError):
    pass


class ColumnOutOfRange(FormatError):
    pass


class MissingColumn(FormatError):
    pass


class MissingGlobalColumns(FormatError):
    pass


class UnknownNerColumn(FormatError):
    pass


class FieldMissing(FormatError):
    pass


class LengthMismatch(FormatError):
    pass


class InvalidUtf8(FormatError):
    pass


class UnwritableToken(FormatError):
    pass


class TypeMapError(NerStdError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class DuplicateSource(TypeMapError):
    pass


class RenameChain(TypeMapError):
    pass


class TypeMapParseError(TypeMapError):
    pass


class UnknownType(NerStdError, KeyError):
    def __init__(self, entity_type: str, sentence_index: int | None = None):
        self.entity_type = entity_type
        self.sentence_index = sentence_index
        super().__init__(entity_type)

    def __str__(self) -> str:
        where = f" in sentence {self.sentence_index}" if self.sentence_index is not None else ""
        return f"entity type {self.entity_type!r} not covered by the type map{where}"


class SentenceCountMismatch(NerStdError, ValueError):
    pass


class TokenCountMismatch(NerStdError, ValueError):
    def __init__(self, sentence_index: int, gold: int, predicted: int):
        self.sentence_index = sentence_index
        super().__init__(
            f"sentence {sentence_index}: gold has {gold} tokens, predicted has {predicted}"
        )


class BadRatios(NerStdError, ValueError):
    pass


class EmptyInput(NerStdError, ValueError):
    pass


class ManifestError(NerStdError, ValueError):
    pass


class StageError(NerStdError):
    """A pipeline stage failed; wraps the underlying error with its context."""

    def __init__(self, stage: str, path: str, cause: Exception):
        self.stage = stage
        self.path = path
        self.cause = cause
        super().__init__(f"stage {stage!r} failed on {path}: {cause}")
