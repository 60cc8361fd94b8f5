"""Combine per-window answers for one question into final extractions.

Selection rule: among windows whose output parses to a non-N/A record, take
the highest score; ties go to the earliest window. The result is empty only
when every window said N/A. Malformed outputs are excluded from the argmax
(a garbage string must never beat a clean answer from another window) but
tracked separately so audits can tell silence from noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .alignment import SourceSpan, locate, locate_without_raw
from .answer_codec import AnswerRecord, Variant, parse, split_compound
from .errors import MalformedAnswer, RawTextNotFound, SentIdOutOfRange
from .schema import CompoundGroup, QuestionUnit, members_of
from .segmentation import SegmentedDocument


class ExtractionStatus(str, Enum):
    EXTRACTED = "extracted"
    EMPTY = "empty"
    MALFORMED_ALL = "malformed_all"


@dataclass(frozen=True)
class WindowAnswer:
    window_index: int
    raw_output: str
    score: float  # log-probability, higher is better
    parsed: Optional[AnswerRecord] = None
    parse_error: Optional[str] = None

    @classmethod
    def from_output(
        cls,
        window_index: int,
        raw_output: str,
        score: float,
        expected_clues: Iterable[str],
        variant: Variant,
    ) -> "WindowAnswer":
        try:
            record = parse(raw_output, expected_clues, variant)
        except MalformedAnswer as exc:
            return cls(window_index, raw_output, score, parsed=None,
                       parse_error=str(exc))
        return cls(window_index, raw_output, score, parsed=record)

    @property
    def is_malformed(self) -> bool:
        return self.parsed is None

    @property
    def is_na(self) -> bool:
        return self.parsed is not None and self.parsed.is_na


@dataclass(frozen=True)
class Extraction:
    field: str
    value: Optional[str]
    status: ExtractionStatus
    sent_id: Optional[int] = None
    raw_text: Optional[str] = None
    source_span: Optional[SourceSpan] = None
    score: Optional[float] = None
    window_index: Optional[int] = None
    notes: tuple[str, ...] = ()


def aggregate(
    answers: list[WindowAnswer],
) -> tuple[Optional[WindowAnswer], ExtractionStatus]:
    """Select the winning window answer, or none with the reason why."""
    if not answers:
        raise ValueError("no window answers to aggregate")
    valid = [a for a in answers if a.parsed is not None and not a.parsed.is_na]
    if valid:
        best = min(valid, key=lambda a: (-a.score, a.window_index))
        return best, ExtractionStatus.EXTRACTED
    if any(a.is_malformed for a in answers):
        return None, ExtractionStatus.MALFORMED_ALL
    return None, ExtractionStatus.EMPTY


def _resolve_span(item, doc: SegmentedDocument) -> tuple[Optional[SourceSpan], list[str]]:
    if item.sent_id is None:
        return None, []
    try:
        if item.raw_text is not None:
            return locate(item, doc), []
        return locate_without_raw(item, doc), []
    except (SentIdOutOfRange, RawTextNotFound) as exc:
        return None, [f"alignment failed: {exc}"]


def finalize(
    selected: Optional[WindowAnswer],
    status: ExtractionStatus,
    unit: QuestionUnit,
    doc: SegmentedDocument,
) -> list[Extraction]:
    """One Extraction per member field of the unit. Alignment failures are
    recorded on the extraction, never raised."""
    members = members_of(unit)
    if selected is None:
        return [Extraction(field=m.name, value=None, status=status) for m in members]

    record = selected.parsed
    assert record is not None and not record.is_na
    if isinstance(unit, CompoundGroup):
        mapping, duplicates = split_compound(record, unit)
    else:
        item = record.items[0]
        mapping = {unit.name: item if item.clue == unit.clue else None}
        duplicates = []

    extractions = []
    for member in members:
        item = mapping.get(member.name)
        if item is None:
            extractions.append(
                Extraction(field=member.name, value=None,
                           status=ExtractionStatus.EMPTY,
                           score=selected.score,
                           window_index=selected.window_index)
            )
            continue
        span, notes = _resolve_span(item, doc)
        if item.clue in duplicates:
            notes = notes + [f"duplicate clue {item.clue!r} in compound answer; kept first"]
        extractions.append(
            Extraction(
                field=member.name,
                value=item.value,
                status=ExtractionStatus.EXTRACTED,
                sent_id=item.sent_id,
                raw_text=item.raw_text,
                source_span=span,
                score=selected.score,
                window_index=selected.window_index,
                notes=tuple(notes),
            )
        )
    return extractions
