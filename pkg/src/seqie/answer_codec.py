"""Encoder and strict parser for the bracketed answer grammar.

Grammar (all eight format variants):

    answer   := "N/A" | item (" " item)*
    item     := [sent " "] clue ":" " " value [" " rawpart]
    sent     := "[SENT" digits "]"
    clue     := "[" cluename "]"
    rawpart  := "[text] " rawtext

Values and raw texts run greedily up to the next "[SENTx]", "[cluename]:" or
"[text]" token. The grammar is delimiter-based with no escaping, so the
encoder rejects payloads containing those token shapes. The parser is strict:
anything a correct encoder could not have produced raises MalformedAnswer.
Parsing is whitespace-tolerant (runs of spaces collapse, ends are trimmed).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import MalformedAnswer, VariantMismatchError
from .schema import CompoundGroup

NA = "N/A"

# Payloads containing these shapes would be re-tokenized on parse.
_FORBIDDEN_RE = re.compile(r"\[SENT\d+\]|\[text\]|\[[a-z0-9_]+\]:")

_TOKEN_RE = re.compile(r"\[SENT(\d+)\]|\[text\]|\[([A-Za-z0-9_]+)\](:?)")

# Visually similar full-width brackets, used by the optional escape hatch.
_BRACKET_MAP = str.maketrans({"[": "［", "]": "］"})


@dataclass(frozen=True)
class Variant:
    """Answer format flags: compound grouping, sentence IDs, raw-text suffix."""
    compound: bool = False
    sent: bool = False
    raw: bool = False

    def label(self) -> str:
        flags = [n for n in ("compound", "sent", "raw") if getattr(self, n)]
        return "+".join(flags) or "plain"


@dataclass(frozen=True)
class AnswerItem:
    clue: str
    value: str
    sent_id: Optional[int] = None
    raw_text: Optional[str] = None


@dataclass(frozen=True)
class AnswerRecord:
    items: tuple[AnswerItem, ...] = ()
    is_na: bool = False

    def __post_init__(self):
        if self.is_na == bool(self.items):
            raise ValueError("record must be N/A xor carry items")

    @classmethod
    def na(cls) -> "AnswerRecord":
        return cls(items=(), is_na=True)

    @classmethod
    def of(cls, items: Iterable[AnswerItem]) -> "AnswerRecord":
        return cls(items=tuple(items), is_na=False)


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _check_payload(payload: str, what: str, clue: str, escape_brackets: bool) -> str:
    payload = _collapse(payload)
    if not payload:
        raise VariantMismatchError(f"item {clue!r}: empty {what}")
    if _FORBIDDEN_RE.search(payload):
        if escape_brackets:
            return payload.translate(_BRACKET_MAP)
        raise VariantMismatchError(
            f"item {clue!r}: {what} contains a reserved token shape: {payload!r}"
        )
    return payload


def encode(record: AnswerRecord, variant: Variant, escape_brackets: bool = False) -> str:
    """Render a record in the given variant. Raises VariantMismatchError when
    an item lacks (or carries) a component the variant forbids (or requires),
    or when a payload embeds a reserved token and escaping is off."""
    if record.is_na:
        return NA
    if not variant.compound and len(record.items) > 1:
        raise VariantMismatchError(
            f"{len(record.items)} items in a non-compound answer"
        )
    parts = []
    for item in record.items:
        if variant.sent != (item.sent_id is not None):
            raise VariantMismatchError(
                f"item {item.clue!r}: sent_id {'required' if variant.sent else 'forbidden'}"
                f" by variant {variant.label()}"
            )
        if variant.raw != (item.raw_text is not None):
            raise VariantMismatchError(
                f"item {item.clue!r}: raw text {'required' if variant.raw else 'forbidden'}"
                f" by variant {variant.label()}"
            )
        piece = f"[{item.clue}]: " + _check_payload(
            item.value, "value", item.clue, escape_brackets
        )
        if item.sent_id is not None:
            if item.sent_id < 1:
                raise VariantMismatchError(f"item {item.clue!r}: sent_id must be >= 1")
            piece = f"[SENT{item.sent_id}] " + piece
        if item.raw_text is not None:
            piece += " [text] " + _check_payload(
                item.raw_text, "raw text", item.clue, escape_brackets
            )
        parts.append(piece)
    return " ".join(parts)


def parse(answer: str, expected_clues: Iterable[str], variant: Variant) -> AnswerRecord:
    """Inverse of encode on its image; raises MalformedAnswer otherwise."""
    expected = set(expected_clues)
    text = _collapse(answer)
    if text == NA:
        return AnswerRecord.na()
    if not text:
        raise MalformedAnswer("empty answer")

    tokens = list(_TOKEN_RE.finditer(text))
    if not tokens:
        raise MalformedAnswer("no clue found", 0)
    if text[: tokens[0].start()].strip():
        raise MalformedAnswer("text before first clue", 0)

    # (kind, payload, position) where payload is sent id or clue name
    items: list[dict] = []
    pending_sent: Optional[int] = None
    # gap after token i runs to the start of token i+1
    for i, tok in enumerate(tokens):
        gap_start = tok.end()
        gap_end = tokens[i + 1].start() if i + 1 < len(tokens) else len(text)
        gap = text[gap_start:gap_end].strip()
        pos = tok.start()

        if tok.group(1) is not None:  # [SENTx]
            if not variant.sent:
                raise MalformedAnswer("sentence token in a non-sent answer", pos)
            if pending_sent is not None:
                raise MalformedAnswer("consecutive sentence tokens", pos)
            if gap:
                raise MalformedAnswer("text between sentence token and clue", gap_start)
            pending_sent = int(tok.group(1))
        elif tok.group(0) == "[text]":
            if not variant.raw:
                raise MalformedAnswer("raw text in a non-raw answer", pos)
            if pending_sent is not None:
                raise MalformedAnswer("sentence token before [text]", pos)
            if not items or items[-1]["raw"] is not None:
                raise MalformedAnswer("[text] with no preceding answer item", pos)
            if not gap:
                raise MalformedAnswer("dangling [text]", pos)
            items[-1]["raw"] = gap
        else:  # clue candidate
            clue = tok.group(2)
            if clue not in expected:
                raise MalformedAnswer(f"unknown clue {clue!r}", pos)
            if not tok.group(3):
                raise MalformedAnswer(f"missing colon after clue {clue!r}", pos)
            if variant.sent and pending_sent is None:
                raise MalformedAnswer(f"missing sentence token before clue {clue!r}", pos)
            if items and variant.raw and items[-1]["raw"] is None:
                raise MalformedAnswer(
                    f"missing raw text before clue {clue!r}", pos
                )
            if not gap:
                raise MalformedAnswer(f"empty value for clue {clue!r}", gap_start)
            items.append({"clue": clue, "value": gap, "sent": pending_sent, "raw": None})
            pending_sent = None

    if pending_sent is not None:
        raise MalformedAnswer("dangling sentence token", len(text))
    if variant.raw and items and items[-1]["raw"] is None:
        raise MalformedAnswer("missing raw text on last item", len(text))
    if not items:
        raise MalformedAnswer("no answer items", 0)
    if not variant.compound and len(items) > 1:
        raise MalformedAnswer("multiple items in a non-compound answer", 0)
    return AnswerRecord.of(
        AnswerItem(clue=d["clue"], value=d["value"], sent_id=d["sent"], raw_text=d["raw"])
        for d in items
    )


def split_compound(
    record: AnswerRecord, group: CompoundGroup
) -> tuple[dict[str, Optional[AnswerItem]], list[str]]:
    """Assign each item to the group member whose clue matches.

    Returns (field name -> item or None, duplicate clue names). On a repeated
    clue the first occurrence wins and the clue is flagged.
    """
    by_clue = {m.clue: m.name for m in group.members}
    mapping: dict[str, Optional[AnswerItem]] = {m.name: None for m in group.members}
    duplicates: list[str] = []
    for item in record.items if not record.is_na else ():
        name = by_clue.get(item.clue)
        if name is None:
            continue  # parse() already restricted clues; be safe anyway
        if mapping[name] is None:
            mapping[name] = item
        else:
            duplicates.append(item.clue)
    return mapping, duplicates
