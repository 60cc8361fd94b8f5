"""Evaluation: per-field exact match, bag-of-tokens F1, entity-level P/R/F1,
and the corpus report (per-field, per-dataset, overall averages).

EM and token F1 follow SQuAD v1.1 conventions: strings are trimmed,
whitespace-collapsed and case-folded before comparison; two empty strings
match (F1 = 1), one empty string scores 0. Entity scoring is exact-match at
the span level: a prediction counts only when label, start and end all equal
an unmatched gold entity; micro-averaged over the corpus.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class FieldScore:
    field: str
    em: int  # 0 or 1
    f1: float

    def __post_init__(self):
        if self.em == 1 and self.f1 != 1.0:
            raise ValueError("exact match implies F1 = 1")


@dataclass(frozen=True)
class EntityPrediction:
    label: str
    char_start: int
    char_end: int
    doc_id: str = ""

    def __post_init__(self):
        if self.char_start >= self.char_end:
            raise ValueError("entity span must be non-empty")

    @property
    def key(self) -> tuple:
        return (self.doc_id, self.label, self.char_start, self.char_end)


def normalize_text(text: str, casefold: bool = True) -> str:
    text = " ".join(text.split())
    return text.casefold() if casefold else text


def exact_match(pred: str, gold: str, casefold: bool = True) -> int:
    return int(normalize_text(pred, casefold) == normalize_text(gold, casefold))


def token_f1(pred: str, gold: str, casefold: bool = True) -> float:
    pred_tokens = normalize_text(pred, casefold).split()
    gold_tokens = normalize_text(gold, casefold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def score_pair(field: str, pred: str, gold: str, casefold: bool = True) -> FieldScore:
    em = exact_match(pred, gold, casefold)
    f1 = 1.0 if em else token_f1(pred, gold, casefold)
    return FieldScore(field=field, em=em, f1=f1)


def _check_no_overlaps(golds: Sequence[EntityPrediction]) -> None:
    by_doc: dict[str, list[EntityPrediction]] = defaultdict(list)
    for g in golds:
        by_doc[g.doc_id].append(g)
    for doc_id, entities in by_doc.items():
        ordered = sorted(entities, key=lambda e: (e.char_start, e.char_end))
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.char_start < prev.char_end:
                raise ValueError(
                    f"overlapping gold entities in {doc_id!r}: "
                    f"{prev.key} and {cur.key}"
                )


def entity_prf(
    preds: Sequence[EntityPrediction],
    golds: Sequence[EntityPrediction],
) -> dict:
    """Micro P/R/F1 with one-to-one exact (label, start, end) matching.
    Overlapping gold entities are rejected; the export protocol removes them."""
    _check_no_overlaps(golds)
    pred_keys = Counter(p.key for p in preds)
    gold_keys = Counter(g.key for g in golds)
    tp = sum((pred_keys & gold_keys).values())
    precision = tp / len(preds) if preds else (1.0 if not golds else 0.0)
    recall = tp / len(golds) if golds else (1.0 if not preds else 0.0)
    if not preds and not golds:
        f1 = 1.0
    else:
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "micro_f1": f1}


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def corpus_report(
    scores: Iterable[tuple[str, FieldScore]],
) -> dict:
    """Aggregate (dataset, FieldScore) pairs, one pair per evaluated instance.

    Per dataset: per-field mean EM/F1, a macro average over fields (the
    headline number), and a micro average over instances (emitted for
    transparency since the two weightings differ when field counts do).
    The overall average is the arithmetic mean over dataset macro scores.
    All numbers are percentages.
    """
    per_dataset: dict[str, dict[str, list[FieldScore]]] = defaultdict(lambda: defaultdict(list))
    for dataset, score in scores:
        per_dataset[dataset][score.field].append(score)

    datasets = {}
    for dataset in sorted(per_dataset):
        fields = {}
        all_scores = []
        for fname in sorted(per_dataset[dataset]):
            fscores = per_dataset[dataset][fname]
            all_scores.extend(fscores)
            fields[fname] = {
                "em": 100.0 * _mean(s.em for s in fscores),
                "f1": 100.0 * _mean(s.f1 for s in fscores),
                "count": len(fscores),
            }
        datasets[dataset] = {
            "fields": fields,
            "em": _mean(f["em"] for f in fields.values()),
            "f1": _mean(f["f1"] for f in fields.values()),
            "em_micro": 100.0 * _mean(s.em for s in all_scores),
            "f1_micro": 100.0 * _mean(s.f1 for s in all_scores),
            "count": len(all_scores),
        }
    return {
        "datasets": datasets,
        "average": {
            "em": _mean(d["em"] for d in datasets.values()),
            "f1": _mean(d["f1"] for d in datasets.values()),
        },
    }
