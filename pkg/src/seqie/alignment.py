"""Resolve answers to character spans in the source document.

Matching is whitespace-collapsed (OCR text has erratic spacing), first
occurrence wins, and an explicit ambiguity flag marks multiple occurrences
within the sentence. When only a canonical value is available and it does
not appear verbatim, provenance degrades to the whole sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .answer_codec import AnswerItem
from .errors import RawTextNotFound
from .segmentation import SegmentedDocument


@dataclass(frozen=True)
class SourceSpan:
    sent_id: int
    char_start: int
    char_end: int  # exclusive
    ambiguous: bool = False


def _key_pattern(key: str) -> re.Pattern:
    parts = key.split()
    if not parts:
        raise ValueError("empty search key")
    return re.compile(r"\s+".join(re.escape(p) for p in parts))


def _find_all(pattern: re.Pattern, text: str) -> list[re.Match]:
    return list(pattern.finditer(text))


def locate(
    item: AnswerItem,
    doc: SegmentedDocument,
    case_insensitive_fallback: bool = True,
) -> SourceSpan:
    """Span of the item's raw text (or its value, if raw is absent) inside the
    sentence named by its sent_id. Raises SentIdOutOfRange / RawTextNotFound."""
    if item.sent_id is None:
        raise ValueError(f"item {item.clue!r} has no sent_id to locate")
    sentence = doc.sentence(item.sent_id)
    key = item.raw_text if item.raw_text is not None else item.value
    pattern = _key_pattern(key)
    matches = _find_all(pattern, sentence.text)
    if not matches and case_insensitive_fallback:
        matches = _find_all(re.compile(pattern.pattern, re.IGNORECASE), sentence.text)
    if not matches:
        raise RawTextNotFound(
            f"{doc.doc_id}: {key!r} not found in sentence {item.sent_id}"
        )
    first = matches[0]
    return SourceSpan(
        sent_id=item.sent_id,
        char_start=sentence.char_start + first.start(),
        char_end=sentence.char_start + first.end(),
        ambiguous=len(matches) > 1,
    )


def locate_without_raw(item: AnswerItem, doc: SegmentedDocument) -> SourceSpan:
    """Search for the canonical value verbatim; when absent, fall back to the
    whole sentence with ambiguous=True (sentence-level provenance only)."""
    if item.sent_id is None:
        raise ValueError(f"item {item.clue!r} has no sent_id to locate")
    sentence = doc.sentence(item.sent_id)
    if item.value.split():
        matches = _find_all(_key_pattern(item.value), sentence.text)
        if matches:
            first = matches[0]
            return SourceSpan(
                sent_id=item.sent_id,
                char_start=sentence.char_start + first.start(),
                char_end=sentence.char_start + first.end(),
                ambiguous=len(matches) > 1,
            )
    return SourceSpan(
        sent_id=item.sent_id,
        char_start=sentence.char_start,
        char_end=sentence.char_end,
        ambiguous=True,
    )
