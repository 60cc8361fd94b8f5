"""Reduce a QA-annotated corpus to a NER-compatible one and emit BIO tags.

NER models need every output tied to non-overlapping input spans, so the
reduction drops span-less (classification) fields, drops field classes that
commonly overlap other classes, and finally removes whole documents that
still contain overlapping entities. Export is CoNLL-style columns:
token, char_start, char_end, tag; blank line between sentences;
"-DOCSTART-" between documents.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .corpus import DocumentRecord
from .segmentation import segment

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

DEFAULT_OVERLAP_THRESHOLD = 0.01


@dataclass(frozen=True)
class LabeledSpan:
    label: str
    char_start: int
    char_end: int  # exclusive


@dataclass(frozen=True)
class TaggedToken:
    text: str
    char_start: int
    char_end: int
    tag: str  # "B-<field>", "I-<field>" or "O"


@dataclass(frozen=True)
class ReductionReport:
    total_documents: int
    kept_documents: int
    total_fields: int
    kept_fields: int
    dropped_spanless_fields: tuple[str, ...]
    dropped_overlapping_fields: tuple[str, ...]

    @property
    def document_retention(self) -> float:
        return self.kept_documents / self.total_documents if self.total_documents else 1.0

    def to_dict(self) -> dict:
        return {
            "total_documents": self.total_documents,
            "kept_documents": self.kept_documents,
            "document_retention": self.document_retention,
            "total_fields": self.total_fields,
            "kept_fields": self.kept_fields,
            "dropped_spanless_fields": list(self.dropped_spanless_fields),
            "dropped_overlapping_fields": list(self.dropped_overlapping_fields),
        }


def _spans_of(doc: DocumentRecord, fields: Optional[set] = None) -> list[LabeledSpan]:
    return [
        LabeledSpan(a.field, a.raw.char_start, a.raw.char_end)
        for a in doc.annotations
        if a.raw is not None and (fields is None or a.field in fields)
    ]


def _overlapping_pairs(spans: Sequence[LabeledSpan]) -> list[tuple[LabeledSpan, LabeledSpan]]:
    ordered = sorted(spans, key=lambda s: (s.char_start, s.char_end))
    pairs = []
    for i, cur in enumerate(ordered[1:], start=1):
        prev = ordered[i - 1]
        if cur.char_start < prev.char_end:
            pairs.append((prev, cur))
    return pairs


def has_overlaps(spans: Sequence[LabeledSpan]) -> bool:
    return bool(_overlapping_pairs(spans))


def reduce_corpus(
    docs: Sequence[DocumentRecord],
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> tuple[list[DocumentRecord], ReductionReport]:
    """Three-stage reduction; returns kept documents (with only the kept,
    span-carrying annotations) and retention statistics.

    A field class is "commonly overlapping" when the fraction of documents
    (among those containing the class) where one of its spans overlaps a span
    of another class exceeds overlap_threshold.
    """
    all_fields = sorted({a.field for d in docs for a in d.annotations})
    span_fields = sorted({a.field for d in docs for a in d.annotations if a.raw is not None})
    spanless = tuple(f for f in all_fields if f not in span_fields)

    docs_with: dict[str, int] = defaultdict(int)
    docs_overlapping: dict[str, int] = defaultdict(int)
    for doc in docs:
        spans = _spans_of(doc, set(span_fields))
        present = {s.label for s in spans}
        for f in present:
            docs_with[f] += 1
        crossed = set()
        for a, b in _overlapping_pairs(spans):
            if a.label != b.label:
                crossed.update((a.label, b.label))
        for f in crossed:
            docs_overlapping[f] += 1

    dropped_overlapping = tuple(
        f for f in span_fields
        if docs_with[f] and docs_overlapping[f] / docs_with[f] > overlap_threshold
    )
    kept_fields = {f for f in span_fields if f not in dropped_overlapping}

    reduced = []
    for doc in docs:
        kept_annotations = tuple(
            a for a in doc.annotations if a.raw is not None and a.field in kept_fields
        )
        spans = [LabeledSpan(a.field, a.raw.char_start, a.raw.char_end)
                 for a in kept_annotations]
        if has_overlaps(spans):
            continue
        reduced.append(replace(doc, annotations=kept_annotations))

    report = ReductionReport(
        total_documents=len(docs),
        kept_documents=len(reduced),
        total_fields=len(all_fields),
        kept_fields=len(kept_fields),
        dropped_spanless_fields=spanless,
        dropped_overlapping_fields=dropped_overlapping,
    )
    return reduced, report


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def to_bio(text: str, spans: Sequence[LabeledSpan]) -> list[TaggedToken]:
    """Tag each token with B-/I-/O. A token belongs to a span when it lies
    fully inside it. Overlapping spans are rejected."""
    if has_overlaps(spans):
        raise ValueError("overlapping spans cannot be BIO-encoded")
    ordered = sorted(spans, key=lambda s: s.char_start)
    tokens = []
    span_idx = 0
    prev_span: Optional[LabeledSpan] = None
    for tok_text, start, end in tokenize_with_offsets(text):
        while span_idx < len(ordered) and ordered[span_idx].char_end <= start:
            span_idx += 1
        span = ordered[span_idx] if span_idx < len(ordered) else None
        if span is not None and start >= span.char_start and end <= span.char_end:
            tag = ("I-" if span is prev_span else "B-") + span.label
            prev_span = span
        else:
            tag = "O"
            prev_span = None
        tokens.append(TaggedToken(tok_text, start, end, tag))
    return tokens


def bio_to_spans(tokens: Sequence[TaggedToken]) -> list[LabeledSpan]:
    """Decode BIO tags back to spans; raises on invalid sequences
    (an I-x not preceded by B-x or I-x)."""
    spans = []
    current: Optional[tuple[str, int, int]] = None
    for token in tokens:
        if token.tag == "O":
            if current:
                spans.append(LabeledSpan(*current))
                current = None
        elif token.tag.startswith("B-"):
            if current:
                spans.append(LabeledSpan(*current))
            current = (token.tag[2:], token.char_start, token.char_end)
        elif token.tag.startswith("I-"):
            if current is None or current[0] != token.tag[2:]:
                raise ValueError(f"invalid BIO sequence at {token.tag!r} ({token.text!r})")
            current = (current[0], current[1], token.char_end)
        else:
            raise ValueError(f"unknown tag {token.tag!r}")
    if current:
        spans.append(LabeledSpan(*current))
    return spans


def write_conll(path, docs: Iterable[DocumentRecord]) -> int:
    """CoNLL column export, sentence-per-block, documents separated by
    -DOCSTART-. Offsets stay document-global so spans can be reconstructed."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write("-DOCSTART-\n\n")
            segmented = segment(doc.doc_id, doc.text)
            spans = _spans_of(doc)
            for sentence in segmented.sentences:
                in_sentence = [
                    s for s in spans
                    if sentence.char_start <= s.char_start < sentence.char_end
                ]
                local = to_bio(sentence.text, [
                    LabeledSpan(s.label, s.char_start - sentence.char_start,
                                s.char_end - sentence.char_start)
                    for s in in_sentence
                ])
                for token in local:
                    fh.write(
                        f"{token.text}\t{token.char_start + sentence.char_start}\t"
                        f"{token.char_end + sentence.char_start}\t{token.tag}\n"
                    )
                fh.write("\n")
            count += 1
    return count
