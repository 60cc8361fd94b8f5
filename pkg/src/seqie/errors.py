"""Exception types shared across the pipeline."""


class SeqIEError(Exception):
    """Base class for all pipeline errors."""


class SchemaError(SeqIEError):
    """Invalid schema file: parse failure, duplicate clue, dangling reference."""


class EmptyDocumentError(SeqIEError):
    """Document contains no non-whitespace character."""


class OversizeSentenceError(SeqIEError):
    """A single sentence plus the question exceeds the token budget."""


class MalformedAnswer(SeqIEError):
    """Generated answer does not conform to the bracketed answer grammar."""

    def __init__(self, reason: str, position: int = 0):
        super().__init__(f"{reason} (at position {position})")
        self.reason = reason
        self.position = position


class VariantMismatchError(SeqIEError):
    """Answer record carries components inconsistent with the format variant."""


class UnnormalizableValue(SeqIEError):
    """Raw value cannot be converted to the canonical syntax of its type."""


class SentIdOutOfRange(SeqIEError):
    """Referenced sentence ID does not exist in the document."""


class RawTextNotFound(SeqIEError):
    """Raw text is absent from the sentence named by the answer."""


class MissingAnnotationError(SeqIEError):
    """Gold annotation lacks a component (sent id / raw span) the variant requires."""


class TransportError(SeqIEError):
    """Backend unreachable after the configured retries."""


class ProtocolError(SeqIEError):
    """Backend response violates the wire contract (count mismatch, NaN score)."""
