"""Build (question, context) model inputs per window, and gold target answers
for training-data generation.

A "question unit" is either a standalone field or a compound group; each unit
gets one prompt per window, with the question repeated across windows. The
gold target for a window is the encoded answer restricted to the members whose
evidence sentence falls inside the window, or the literal "N/A" when none does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .answer_codec import AnswerItem, AnswerRecord, Variant, encode
from .corpus import Annotation
from .errors import MissingAnnotationError
from .schema import CompoundGroup, DocumentTypeSchema, QuestionUnit, members_of
from .segmentation import SegmentedDocument, build_windows


@dataclass(frozen=True)
class PromptInstance:
    doc_id: str
    unit_name: str  # field or compound-group name
    window_index: int
    question: str
    context: str
    variant: Variant
    first_sent_id: int
    last_sent_id: int
    target_answer: Optional[str] = None  # training-generation mode only


def unit_variant(
    unit: QuestionUnit,
    use_sent: Optional[bool] = None,
    use_raw: Optional[bool] = None,
) -> Variant:
    """Variant flags for a unit; None keeps the schema's flags, a bool forces."""
    return Variant(
        compound=isinstance(unit, CompoundGroup),
        sent=unit.use_sent_ids if use_sent is None else use_sent,
        raw=unit.use_raw_text if use_raw is None else use_raw,
    )


def build_prompts(
    doc: SegmentedDocument,
    schema: DocumentTypeSchema,
    budget: int,
    counter,
    use_compound: Optional[bool] = None,
    use_sent: Optional[bool] = None,
    use_raw: Optional[bool] = None,
    oversize_policy: str = "truncate",
) -> list[PromptInstance]:
    """One PromptInstance per (question unit, window). The tri-state use_*
    arguments override the schema's per-unit flags when not None."""
    instances = []
    compound = True if use_compound is None else use_compound
    for unit in schema.question_units(use_compound=compound):
        variant = unit_variant(unit, use_sent=use_sent, use_raw=use_raw)
        question = schema.question_for(unit, raw=variant.raw)
        windows = build_windows(
            doc, question, budget, counter,
            with_sentinels=variant.sent, oversize_policy=oversize_policy,
        )
        for window in windows:
            instances.append(
                PromptInstance(
                    doc_id=doc.doc_id,
                    unit_name=unit.name,
                    window_index=window.window_index,
                    question=question,
                    context=window.rendered_context,
                    variant=variant,
                    first_sent_id=window.first_sent_id,
                    last_sent_id=window.last_sent_id,
                )
            )
    return instances


def evidence_sent_id(ann: Annotation, doc: SegmentedDocument) -> Optional[int]:
    """Sentence holding the annotation's evidence: explicit sent_id first,
    else derived from the raw span's offsets, else None (no location, e.g.
    classification fields)."""
    if ann.sent_id is not None:
        return ann.sent_id
    if ann.raw is not None:
        return doc.sent_id_at(ann.raw.char_start)
    return None


def gold_answer(
    unit: QuestionUnit,
    variant: Variant,
    annotations: dict[str, Annotation],
    doc: SegmentedDocument,
    first_sent_id: int,
    last_sent_id: int,
) -> str:
    """Encoded gold answer for one window, or "N/A" when no member's evidence
    lies inside [first_sent_id, last_sent_id]. Members without a located
    evidence sentence are treated as present in every window."""
    items = []
    for member in members_of(unit):
        ann = annotations.get(member.name)
        if ann is None:
            continue
        sent_id = evidence_sent_id(ann, doc)
        if variant.sent and sent_id is None:
            raise MissingAnnotationError(
                f"{doc.doc_id}/{member.name}: sent-variant target needs a "
                "sentence id or raw span"
            )
        if variant.raw and ann.raw is None:
            raise MissingAnnotationError(
                f"{doc.doc_id}/{member.name}: raw-variant target needs a raw span"
            )
        if sent_id is not None and not first_sent_id <= sent_id <= last_sent_id:
            continue
        items.append(
            AnswerItem(
                clue=member.clue,
                value=ann.value_canonical,
                sent_id=sent_id if variant.sent else None,
                raw_text=ann.raw.text if variant.raw else None,
            )
        )
    if not items:
        return "N/A"
    return encode(AnswerRecord.of(items), variant)


def build_training_target(
    instance: PromptInstance,
    unit: QuestionUnit,
    annotations: dict[str, Annotation],
    doc: SegmentedDocument,
) -> str:
    return gold_answer(
        unit, instance.variant, annotations, doc,
        instance.first_sent_id, instance.last_sent_id,
    )
