"""Sentence segmentation on line breaks, sentinel rendering, and sliding windows.

Sentences carry character offsets into the original text so every downstream
span can be traced back to the source document. Windows are built greedily:
each window takes the longest run of sentences that fits the token budget
together with the question, and consecutive windows overlap by 50% (the next
window starts ceil(k/2) sentences after the previous one of k sentences).
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass

from .errors import EmptyDocumentError, OversizeSentenceError, SentIdOutOfRange

logger = logging.getLogger(__name__)

_LINE_RE = re.compile(r"[^\n]+")


@dataclass(frozen=True)
class Sentence:
    sent_id: int  # 1-based, consecutive
    char_start: int
    char_end: int  # exclusive
    text: str

    def sentinel(self) -> str:
        return f"[SENT{self.sent_id}]"


@dataclass(frozen=True)
class SegmentedDocument:
    doc_id: str
    original_text: str
    sentences: tuple[Sentence, ...]

    def sentence(self, sent_id: int) -> Sentence:
        if not 1 <= sent_id <= len(self.sentences):
            raise SentIdOutOfRange(
                f"{self.doc_id}: sentence {sent_id} not in 1..{len(self.sentences)}"
            )
        return self.sentences[sent_id - 1]

    def sent_id_at(self, char_offset: int) -> int | None:
        """Sentence containing the given character offset, if any."""
        for s in self.sentences:
            if s.char_start <= char_offset < s.char_end:
                return s.sent_id
        return None


@dataclass(frozen=True)
class Window:
    window_index: int
    first_sent_id: int
    last_sent_id: int  # inclusive
    rendered_context: str
    token_count: int
    truncated: bool = False

    @property
    def sentence_range(self) -> tuple[int, int]:
        return (self.first_sent_id, self.last_sent_id)

    def contains(self, sent_id: int) -> bool:
        return self.first_sent_id <= sent_id <= self.last_sent_id


def segment(doc_id: str, text: str) -> SegmentedDocument:
    """Split on line breaks; blank lines produce no sentence. Surrounding
    whitespace is excluded from each sentence's offsets, so
    text[char_start:char_end] == sentence.text always holds."""
    if not text.strip():
        raise EmptyDocumentError(f"{doc_id}: document has no content")
    sentences = []
    for match in _LINE_RE.finditer(text):
        line = match.group()
        stripped = line.strip()
        if not stripped:
            continue
        start = match.start() + (len(line) - len(line.lstrip()))
        sentences.append(
            Sentence(
                sent_id=len(sentences) + 1,
                char_start=start,
                char_end=start + len(stripped),
                text=stripped,
            )
        )
    return SegmentedDocument(doc_id=doc_id, original_text=text, sentences=tuple(sentences))


def render_context(
    doc: SegmentedDocument,
    first_sent_id: int,
    last_sent_id: int,
    with_sentinels: bool,
) -> str:
    if first_sent_id > last_sent_id:
        raise SentIdOutOfRange(
            f"{doc.doc_id}: empty range [{first_sent_id}, {last_sent_id}]"
        )
    selected = [doc.sentence(i) for i in range(first_sent_id, last_sent_id + 1)]
    if with_sentinels:
        return " ".join(f"{s.sentinel()} {s.text}" for s in selected)
    return " ".join(s.text for s in selected)


def _truncate_to_budget(text: str, counter, budget: int) -> str:
    """Longest prefix of text whose token count fits the budget (binary search;
    assumes the counter is monotone in text length)."""
    if counter.count(text) <= budget:
        return text
    lo, hi = 0, len(text)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if counter.count(text[:mid]) <= budget:
            lo = mid
        else:
            hi = mid - 1
    return text[:lo]


def build_windows(
    doc: SegmentedDocument,
    question: str,
    budget: int,
    counter,
    with_sentinels: bool,
    oversize_policy: str = "truncate",
) -> list[Window]:
    """Greedy fit-to-budget windows with ceil(k/2)-sentence stride.

    ``counter`` is any object with a ``count(text) -> int`` method. Sentinel
    tokens count toward the budget. ``oversize_policy`` controls what happens
    when one sentence plus the question alone exceeds the budget:
    "truncate" (default) hard-truncates the rendered context and logs a
    warning, "error" raises OversizeSentenceError.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if not doc.sentences:
        raise EmptyDocumentError(f"{doc.doc_id}: no sentences to window")
    if oversize_policy not in ("truncate", "error"):
        raise ValueError(f"unknown oversize policy {oversize_policy!r}")

    available = budget - counter.count(question)
    n = len(doc.sentences)
    windows: list[Window] = []
    start = 1
    while True:
        rendered = render_context(doc, start, start, with_sentinels)
        truncated = False
        if counter.count(rendered) > available:
            if oversize_policy == "error" or available <= 0:
                raise OversizeSentenceError(
                    f"{doc.doc_id}: sentence {start} plus question exceeds "
                    f"budget {budget}"
                )
            rendered = _truncate_to_budget(rendered, counter, available)
            truncated = True
            logger.warning(
                "%s: sentence %d truncated to fit token budget %d",
                doc.doc_id, start, budget,
            )
            end = start
        else:
            end = start
            while end < n:
                candidate = render_context(doc, start, end + 1, with_sentinels)
                if counter.count(candidate) > available:
                    break
                rendered = candidate
                end += 1
        windows.append(
            Window(
                window_index=len(windows),
                first_sent_id=start,
                last_sent_id=end,
                rendered_context=rendered,
                token_count=counter.count(rendered),
                truncated=truncated,
            )
        )
        if end >= n:
            break
        k = end - start + 1
        start += math.ceil(k / 2)
    return windows
