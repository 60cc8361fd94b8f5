"""Corpus file formats: document/annotation JSONL and the run manifest.

All offsets are character offsets into the decoded (unicode) text, never
byte offsets. One JSON object per line throughout.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from . import __version__
from .errors import SeqIEError


class CorpusError(SeqIEError):
    """Malformed corpus record."""


@dataclass(frozen=True)
class RawSpan:
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class Annotation:
    field: str
    value_canonical: str
    raw: Optional[RawSpan] = None
    sent_id: Optional[int] = None


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    doc_type: str
    text: str
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self):
        for ann in self.annotations:
            if ann.raw is None:
                continue
            snippet = self.text[ann.raw.char_start:ann.raw.char_end]
            if snippet != ann.raw.text:
                raise CorpusError(
                    f"{self.doc_id}/{ann.field}: raw span [{ann.raw.char_start}, "
                    f"{ann.raw.char_end}) reads {snippet!r}, not {ann.raw.text!r}"
                )

    def annotation_map(self) -> dict[str, Annotation]:
        return {a.field: a for a in self.annotations}


def _annotation_from_dict(doc_id: str, raw: dict) -> Annotation:
    span = None
    if raw.get("raw") is not None:
        r = raw["raw"]
        span = RawSpan(text=r["text"], char_start=int(r["char_start"]),
                       char_end=int(r["char_end"]))
    return Annotation(
        field=raw["field"],
        value_canonical=raw["value_canonical"],
        raw=span,
        sent_id=int(raw["sent_id"]) if raw.get("sent_id") is not None else None,
    )


def document_from_dict(data: dict) -> DocumentRecord:
    try:
        return DocumentRecord(
            doc_id=data["doc_id"],
            doc_type=data["doc_type"],
            text=data["text"],
            annotations=tuple(
                _annotation_from_dict(data["doc_id"], a)
                for a in data.get("annotations", [])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"bad document record: {exc}") from exc


def document_to_dict(doc: DocumentRecord) -> dict:
    return {
        "doc_id": doc.doc_id,
        "doc_type": doc.doc_type,
        "text": doc.text,
        "annotations": [
            {
                "field": a.field,
                "value_canonical": a.value_canonical,
                "raw": (
                    {"text": a.raw.text, "char_start": a.raw.char_start,
                     "char_end": a.raw.char_end}
                    if a.raw else None
                ),
                "sent_id": a.sent_id,
            }
            for a in doc.annotations
        ],
    }


def read_jsonl(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc


def write_jsonl(path, records: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def read_documents(path) -> list[DocumentRecord]:
    return [document_from_dict(d) for d in read_jsonl(path)]


def write_documents(path, docs: Iterable[DocumentRecord]) -> int:
    return write_jsonl(path, (document_to_dict(d) for d in docs))


@dataclass(frozen=True)
class RunManifest:
    """Everything that affected an extraction run, for audit and re-runs."""
    schema_sha256: str
    backend: str
    num_beams: int
    max_new_tokens: int
    budget: int
    budget_safety: float
    overlap_rule: str = "next window starts ceil(k/2) sentences after a k-sentence window"
    score_semantics: str = "backend-reported log-probability of the best beam"
    tool_version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat()
    )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def hash_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, manifest: RunManifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
