"""Orchestration: run extraction over a corpus, and score predictions.

Documents are processed by a bounded worker pool; per-document failures are
isolated and reported, never fatal to the batch. Output rows are ordered by
doc_id then field for determinism.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .aggregation import Extraction, WindowAnswer, aggregate, finalize
from .backend import GenerationItem
from .corpus import DocumentRecord, read_jsonl
from .metrics import corpus_report, score_pair
from .prompting import build_prompts
from .schema import DocumentTypeSchema, members_of, schema_index
from .segmentation import segment

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 512
DEFAULT_BUDGET_SAFETY = 0.8


@dataclass(frozen=True)
class DocumentFailure:
    doc_id: str
    error: str


def effective_budget(budget: int, safety: float) -> int:
    """Approximate token counts under-estimate the model tokenizer, so the
    working budget is shrunk by a safety factor (1.0 disables it)."""
    return max(1, int(budget * safety))


def extraction_to_dict(doc_id: str, ext: Extraction) -> dict:
    row = {
        "doc_id": doc_id,
        "field": ext.field,
        "value": ext.value,
        "status": ext.status.value,
        "score": ext.score,
        "window": ext.window_index,
    }
    if ext.sent_id is not None:
        row["sent_id"] = ext.sent_id
    if ext.raw_text is not None:
        row["raw"] = ext.raw_text
    if ext.source_span is not None:
        row["span"] = {
            "sent_id": ext.source_span.sent_id,
            "char_start": ext.source_span.char_start,
            "char_end": ext.source_span.char_end,
            "ambiguous": ext.source_span.ambiguous,
        }
    if ext.notes:
        row["notes"] = list(ext.notes)
    return row


def extract_document(
    doc: DocumentRecord,
    schema: DocumentTypeSchema,
    backend,
    counter,
    budget: int,
    use_compound: Optional[bool] = None,
    use_sent: Optional[bool] = None,
    use_raw: Optional[bool] = None,
) -> list[dict]:
    segmented = segment(doc.doc_id, doc.text)
    instances = build_prompts(
        segmented, schema, budget, counter,
        use_compound=use_compound, use_sent=use_sent, use_raw=use_raw,
    )
    answers = backend.generate(
        [GenerationItem(question=i.question, context=i.context) for i in instances]
    )

    compound = True if use_compound is None else use_compound
    units = {u.name: u for u in schema.question_units(use_compound=compound)}
    per_unit: dict[str, list[WindowAnswer]] = {name: [] for name in units}
    for instance, answer in zip(instances, answers):
        unit = units[instance.unit_name]
        per_unit[instance.unit_name].append(
            WindowAnswer.from_output(
                instance.window_index, answer.text, answer.score,
                expected_clues=[m.clue for m in members_of(unit)],
                variant=instance.variant,
            )
        )

    rows = []
    for name, unit in units.items():
        selected, status = aggregate(per_unit[name])
        malformed = [a for a in per_unit[name] if a.is_malformed]
        for ext in finalize(selected, status, unit, segmented):
            row = extraction_to_dict(doc.doc_id, ext)
            if ext.status.value == "malformed_all" and malformed:
                row["notes"] = row.get("notes", []) + [
                    f"window {a.window_index} output: {a.raw_output!r} ({a.parse_error})"
                    for a in malformed
                ]
            rows.append(row)
    rows.sort(key=lambda r: r["field"])
    return rows


def run_extraction(
    docs: Sequence[DocumentRecord],
    schemas: Sequence[DocumentTypeSchema],
    backend,
    counter,
    budget: int = DEFAULT_BUDGET,
    workers: int = 4,
    use_compound: Optional[bool] = None,
    use_sent: Optional[bool] = None,
    use_raw: Optional[bool] = None,
) -> tuple[list[dict], list[DocumentFailure]]:
    index = schema_index(list(schemas))
    failures: list[DocumentFailure] = []
    rows: list[dict] = []

    def work(doc: DocumentRecord):
        schema = index.get(doc.doc_type)
        if schema is None:
            raise KeyError(f"no schema for doc type {doc.doc_type!r}")
        return extract_document(
            doc, schema, backend, counter, budget,
            use_compound=use_compound, use_sent=use_sent, use_raw=use_raw,
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for doc, outcome in zip(docs, pool.map(_safe(work), docs)):
            if isinstance(outcome, Exception):
                logger.error("document %s failed: %s", doc.doc_id, outcome)
                failures.append(DocumentFailure(doc.doc_id, str(outcome)))
            else:
                rows.extend(outcome)

    rows.sort(key=lambda r: (r["doc_id"], r["field"]))
    return rows, failures


def _safe(fn):
    def wrapper(arg):
        try:
            return fn(arg)
        except Exception as exc:  # noqa: BLE001 - isolate per-document failures
            return exc
    return wrapper


def evaluate_predictions(
    pred_path,
    gold_docs: Sequence[DocumentRecord],
    schemas: Sequence[DocumentTypeSchema],
) -> dict:
    """Score an extraction JSONL against gold documents. Per (document, field)
    instance: EM and token F1 on the canonical values, with absent treated as
    the empty string on both sides. Datasets are document types."""
    index = schema_index(list(schemas))
    preds: dict[tuple[str, str], str] = {}
    pred_doc_ids = set()
    for row in read_jsonl(pred_path):
        pred_doc_ids.add(row["doc_id"])
        preds[(row["doc_id"], row["field"])] = row.get("value") or ""

    pairs = []
    missing_docs = []
    for doc in gold_docs:
        if doc.doc_id not in pred_doc_ids:
            missing_docs.append(doc.doc_id)
            continue
        schema = index.get(doc.doc_type)
        if schema is None:
            raise KeyError(f"no schema for doc type {doc.doc_type!r}")
        gold = doc.annotation_map()
        for f in schema.fields:
            gold_value = gold[f.name].value_canonical if f.name in gold else ""
            pred_value = preds.get((doc.doc_id, f.name), "")
            pairs.append((doc.doc_type, score_pair(f.name, pred_value, gold_value)))

    report = corpus_report(pairs)
    report["missing_documents"] = sorted(missing_docs)
    return report
