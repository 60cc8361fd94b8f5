"""Answer-generation backends and token counting.

Two backends share one interface: an HTTP client for a remote seq2seq server
(wire protocol below) and an in-process oracle that answers from gold
annotations, used to verify the pipeline end to end without a neural model.

Wire protocol (JSON over HTTP, UTF-8):
    POST /v1/generate  {"items": [{"question": ..., "context": ...}],
                        "num_beams": 5, "max_new_tokens": 256}
                    -> {"items": [{"text": ..., "score": -1.234}]}
    POST /v1/tokenize  {"texts": [...]} -> {"counts": [...]}
    GET  /v1/health    -> {"status": "ok", "model": "<name>"}

Scores are natural-log probabilities of the selected beam; the aggregation
rule only needs them to be comparable across windows for one question.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import requests

from .errors import ProtocolError, TransportError
from .prompting import gold_answer, unit_variant
from .schema import DocumentTypeSchema, QuestionUnit
from .segmentation import segment

logger = logging.getLogger(__name__)

DEFAULT_NUM_BEAMS = 5
DEFAULT_MAX_NEW_TOKENS = 256
DEFAULT_CHARS_PER_TOKEN = 3.5

_SENTINEL_RE_STR = r"\[SENT(\d+)\] "


@dataclass(frozen=True)
class GenerationItem:
    question: str
    context: str


@dataclass(frozen=True)
class GeneratedAnswer:
    text: str
    score: float


class TokenCounter(Protocol):
    def count(self, text: str) -> int: ...


class ApproxTokenCounter:
    """ceil(chars / chars_per_token); the true count belongs to the model's
    tokenizer across the inference boundary, so callers should pair this with
    a budget safety factor."""

    def __init__(self, chars_per_token: float = DEFAULT_CHARS_PER_TOKEN):
        if chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")
        self.chars_per_token = chars_per_token

    def count(self, text: str) -> int:
        return math.ceil(len(text) / self.chars_per_token)


class WordTokenCounter:
    """Whitespace-token counter; handy for tests and rough budgeting."""

    def count(self, text: str) -> int:
        return len(text.split())


class RemoteTokenCounter:
    """Defers to the server's /v1/tokenize; falls back to the approximate
    counter (with a warning) when the server is unavailable."""

    def __init__(self, client: "RemoteBackend",
                 fallback: Optional[ApproxTokenCounter] = None):
        self.client = client
        self.fallback = fallback or ApproxTokenCounter()

    def count(self, text: str) -> int:
        try:
            return self.client.tokenize([text])[0]
        except TransportError as exc:
            logger.warning("tokenize endpoint unavailable (%s); using approximate count", exc)
            return self.fallback.count(text)


class RemoteBackend:
    """HTTP client for the generation protocol, with exponential-backoff
    retries on transport failures. Items are never reordered: response
    position i answers request position i."""

    def __init__(
        self,
        base_url: str,
        num_beams: int = DEFAULT_NUM_BEAMS,
        max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS,
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        session: Optional[requests.Session] = None,
    ):
        if num_beams < 1 or max_new_tokens < 1:
            raise ValueError("num_beams and max_new_tokens must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.num_beams = num_beams
        self.max_new_tokens = max_new_tokens
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.session = session or requests.Session()

    @property
    def identity(self) -> str:
        return f"remote:{self.base_url}"

    def _post(self, path: str, payload: dict) -> dict:
        last_error: Optional[Exception] = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self.session.post(
                    self.base_url + path, json=payload, timeout=self.timeout
                )
                if response.status_code >= 500:
                    last_error = TransportError(
                        f"{path}: server error {response.status_code}"
                    )
                    continue
                response.raise_for_status()
                return response.json()
            except requests.RequestException as exc:
                last_error = exc
        raise TransportError(
            f"{self.base_url}{path}: gave up after {self.max_attempts} attempts: {last_error}"
        )

    def generate(self, items: Sequence[GenerationItem]) -> list[GeneratedAnswer]:
        payload = {
            "items": [{"question": i.question, "context": i.context} for i in items],
            "num_beams": self.num_beams,
            "max_new_tokens": self.max_new_tokens,
        }
        data = self._post("/v1/generate", payload)
        try:
            answers = [
                GeneratedAnswer(text=str(item["text"]), score=float(item["score"]))
                for item in data["items"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed generate response: {exc}") from exc
        if len(answers) != len(items):
            raise ProtocolError(
                f"generate returned {len(answers)} items for {len(items)} requests"
            )
        for answer in answers:
            if not math.isfinite(answer.score):
                raise ProtocolError(f"non-finite score for answer {answer.text!r}")
        return answers

    def tokenize(self, texts: Sequence[str]) -> list[int]:
        data = self._post("/v1/tokenize", {"texts": list(texts)})
        try:
            counts = [int(c) for c in data["counts"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed tokenize response: {exc}") from exc
        if len(counts) != len(texts):
            raise ProtocolError("tokenize count mismatch")
        return counts

    def health(self) -> dict:
        try:
            response = self.session.get(
                self.base_url + "/v1/health", timeout=self.timeout
            )
            response.raise_for_status()
            return response.json()
        except requests.RequestException as exc:
            raise TransportError(f"health check failed: {exc}") from exc


class OracleBackend:
    """Deterministic backend that answers every prompt from gold annotations.

    The question is matched back to its schema unit, the context back to the
    originating document and sentence range, and the answer is the encoded
    gold record for that window (or "N/A"). Scores are always 0.0. Read-only
    after construction, safe for concurrent use.
    """

    def __init__(self, schemas: Sequence[DocumentTypeSchema], docs):
        import re as _re
        self._sentinel_re = _re.compile(_SENTINEL_RE_STR)
        # question text -> [(doc_type, unit, raw_flag)]
        self._questions: dict[str, list[tuple[str, QuestionUnit, bool]]] = {}
        for schema in schemas:
            for unit in schema.fields + schema.compound_groups:
                for raw in (False, True):
                    q = schema.question_for(unit, raw=raw)
                    self._questions.setdefault(q, []).append(
                        (schema.doc_type, unit, raw)
                    )
        # per document: segmented text, plain-joined context with offsets
        self._docs = []
        for doc in docs:
            segmented = segment(doc.doc_id, doc.text)
            starts = []
            pieces = []
            offset = 0
            for sentence in segmented.sentences:
                starts.append(offset)
                pieces.append(sentence.text)
                offset += len(sentence.text) + 1  # single-space joiner
            self._docs.append({
                "record": doc,
                "segmented": segmented,
                "joined": " ".join(pieces),
                "starts": starts,
                "annotations": doc.annotation_map(),
            })

    @property
    def identity(self) -> str:
        return "oracle"

    def _resolve_context(self, context: str):
        """(doc entry, first_sent_id, last_sent_id) for a rendered context."""
        ids = [int(m) for m in self._sentinel_re.findall(context)]
        plain = self._sentinel_re.sub("", context) if ids else context
        for entry in self._docs:
            pos = entry["joined"].find(plain)
            if pos < 0:
                continue
            if ids:
                first, last = min(ids), max(ids)
            else:
                starts = entry["starts"]
                first = last = None
                for sid, start in enumerate(starts, start=1):
                    if start <= pos:
                        first = sid
                    if start < pos + len(plain):
                        last = sid
                if first is None or last is None:
                    continue
            return entry, first, last
        return None, None, None

    def generate(self, items: Sequence[GenerationItem]) -> list[GeneratedAnswer]:
        answers = []
        for item in items:
            answers.append(GeneratedAnswer(text=self._answer(item), score=0.0))
        return answers

    def _answer(self, item: GenerationItem) -> str:
        entry, first, last = self._resolve_context(item.context)
        if entry is None:
            return "N/A"
        candidates = self._questions.get(item.question, [])
        doc_type = entry["record"].doc_type
        for cand_type, unit, raw in candidates:
            if cand_type == doc_type:
                # trust the context over the schema flag for sentinels
                variant = unit_variant(unit, use_sent="[SENT" in item.context, use_raw=raw)
                return gold_answer(
                    unit, variant, entry["annotations"], entry["segmented"],
                    first, last,
                )
        return "N/A"

    def health(self) -> dict:
        return {"status": "ok", "model": "oracle"}
