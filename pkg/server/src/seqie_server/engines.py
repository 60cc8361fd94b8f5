"""Generation engines behind the HTTP endpoints.

StubEngine needs no model artifacts and exists for integration tests: every
item generates "N/A" with score 0.0 and token counts are whitespace word
counts. T5Engine wraps any T5-family checkpoint via transformers; the import
is deferred so the stub works without torch installed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence


@dataclass(frozen=True)
class Generated:
    text: str
    score: float


class Engine(Protocol):
    name: str

    def generate(self, pairs: Sequence[tuple[str, str]], num_beams: int,
                 max_new_tokens: int) -> list[Generated]: ...

    def count_tokens(self, texts: Sequence[str]) -> list[int]: ...


class StubEngine:
    name = "stub"

    def generate(self, pairs, num_beams, max_new_tokens):
        return [Generated("N/A", 0.0) for _ in pairs]

    def count_tokens(self, texts):
        return [len(t.split()) for t in texts]


class T5Engine:
    """Beam-search generation; score is the log-probability of the returned
    sequence as reported by generate(sequences_scores)."""

    def __init__(self, checkpoint: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.name = checkpoint
        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint)
        self.model.to(device)
        self.model.eval()

    def _prompt(self, question: str, context: str) -> str:
        return f"question: {question} context: {context}"

    def generate(self, pairs, num_beams, max_new_tokens):
        prompts = [self._prompt(q, c) for q, c in pairs]
        batch = self.tokenizer(prompts, return_tensors="pt", padding=True,
                               truncation=True).to(self.device)
        with self._torch.no_grad():
            out = self.model.generate(
                **batch,
                num_beams=num_beams,
                max_new_tokens=max_new_tokens,
                output_scores=True,
                return_dict_in_generate=True,
                length_penalty=1.0,
            )
        texts = self.tokenizer.batch_decode(out.sequences, skip_special_tokens=True)
        if getattr(out, "sequences_scores", None) is not None:
            scores = [float(s) for s in out.sequences_scores]
        else:  # greedy path (num_beams == 1) reports no sequence score
            scores = [0.0] * len(texts)
        return [Generated(t, s) for t, s in zip(texts, scores)]

    def count_tokens(self, texts):
        return [len(self.tokenizer(t, add_special_tokens=False)["input_ids"])
                for t in texts]


def load_engine(model: str, device: str = "cpu") -> Engine:
    if model == "stub":
        return StubEngine()
    return T5Engine(model, device=device)
