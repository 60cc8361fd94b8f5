"""Shared fixtures: schema and a synthetic annotated corpus whose gold values
are derived with the real normalizers, so the oracle backend must reproduce
them exactly end to end."""

from __future__ import annotations

import random

import pytest

from seqie.corpus import Annotation, DocumentRecord, RawSpan
from seqie.normalization import normalize
from seqie.schema import CanonicalType, parse_schema

SCHEMA_YAML = """
raw_suffix: " and how does it appear in the text?"
doc_types:
  - doc_type: property
    fields:
      - name: area_value
        clue: value
        question: What is the value of the private area?
        canonical_type: decimal_area
        sent: true
        raw: true
      - name: area_unit
        clue: unit
        question: What is the unit of the private area?
        canonical_type: free_text
        sent: true
        raw: true
      - name: registration_date
        clue: date
        question: What is the registration date?
        canonical_type: date
        sent: true
        raw: true
      - name: registry_id
        clue: id
        question: What is the registry number?
        canonical_type: id_number
        sent: true
        raw: true
      - name: state
        clue: state
        question: In which state is the property?
        canonical_type: state_code
        sent: true
      - name: owner
        clue: owner
        question: Who owns the property?
        canonical_type: free_text
        sent: true
      - name: dup_code
        clue: code
        question: What is the duplicate code?
        canonical_type: id_number
        sent: true
        raw: true
      - name: status
        clue: status
        question: What is the debt status?
        canonical_type: categorical
        vocabulary: [clear, debts]
    compound_groups:
      - name: private_area
        question: What is the private area?
        members: [area_value, area_unit]
        sent: true
        raw: true
  - doc_type: certificate
    fields:
      - name: issue_date
        clue: date
        question: When was the certificate issued?
        canonical_type: date
        sent: true
        raw: true
      - name: cert_id
        clue: id
        question: What is the certificate number?
        canonical_type: id_number
        sent: true
        raw: true
      - name: result
        clue: result
        question: What is the certificate result?
        canonical_type: categorical
        vocabulary: [positive, negative]
"""

UNIT_WORDS = {"square meters": "m²", "hectares": "ha"}


class CorpusBuilder:
    """Accumulates one document line by line, tracking sentence ids and
    character offsets so annotations can carry exact raw spans."""

    def __init__(self, doc_id: str, doc_type: str):
        self.doc_id = doc_id
        self.doc_type = doc_type
        self.lines: list[str] = []
        self.offset = 0
        self.annotations: list[Annotation] = []

    def add_line(self, text: str) -> tuple[int, int]:
        """Returns (sent_id, char offset of the line start)."""
        start = self.offset
        self.lines.append(text)
        self.offset += len(text) + 1  # newline
        return len(self.lines), start

    def add_evidence(self, field: str, ctype: CanonicalType, raw_text: str,
                     template: str, canonical: str | None = None,
                     with_span: bool = True, vocabulary=()):
        line = template.format(raw=raw_text)
        sent_id, line_start = self.add_line(line)
        if canonical is None:
            canonical = normalize(raw_text, ctype, vocabulary=vocabulary).canonical
        span = None
        if with_span:
            local = line.index(raw_text)
            span = RawSpan(text=raw_text,
                           char_start=line_start + local,
                           char_end=line_start + local + len(raw_text))
        self.annotations.append(
            Annotation(field=field, value_canonical=canonical, raw=span,
                       sent_id=sent_id)
        )

    def add_locationless(self, field: str, canonical: str):
        self.annotations.append(Annotation(field=field, value_canonical=canonical))

    def build(self) -> DocumentRecord:
        return DocumentRecord(
            doc_id=self.doc_id,
            doc_type=self.doc_type,
            text="\n".join(self.lines) + "\n",
            annotations=tuple(self.annotations),
        )


def _random_date(rng: random.Random) -> str:
    day = rng.randint(1, 28)
    month = rng.randint(1, 12)
    year = rng.randint(1980, 2024)
    style = rng.choice(["slash", "dash", "long"])
    months = ["janeiro", "fevereiro", "março", "abril", "maio", "junho", "julho",
              "agosto", "setembro", "outubro", "novembro", "dezembro"]
    if style == "slash":
        return f"{day:02d}/{month:02d}/{year}"
    if style == "dash":
        return f"{day:02d}-{month:02d}-{year}"
    return f"{day} de {months[month - 1]} de {year}"


def make_property_doc(i: int, rng: random.Random) -> DocumentRecord:
    b = CorpusBuilder(f"prop-{i:04d}", "property")
    b.add_line(f"Property registry excerpt {i} of the municipal records.")

    def filler(n: int):
        for _ in range(n):
            b.add_line(
                f"Clause {rng.randint(100, 999)} of deed {i} refers to "
                f"book {rng.randint(1, 50)} page {rng.randint(1, 400)}."
            )

    filler(rng.randint(2, 4))
    area_raw = f"{rng.randint(10, 999)},{rng.randint(0, 999):03d}"
    unit_raw = rng.choice(list(UNIT_WORDS))
    # both compound members share one sentence so any window has all or none
    line = f"having a private covered built area of {area_raw} {unit_raw},"
    sent_id, line_start = b.add_line(line)
    for field, ctype, raw_text, canonical in [
        ("area_value", CanonicalType.DECIMAL_AREA, area_raw, None),
        ("area_unit", CanonicalType.FREE_TEXT, unit_raw, UNIT_WORDS[unit_raw]),
    ]:
        local = line.index(raw_text)
        if canonical is None:
            canonical = normalize(raw_text, ctype).canonical
        b.annotations.append(Annotation(
            field=field, value_canonical=canonical, sent_id=sent_id,
            raw=RawSpan(raw_text, line_start + local, line_start + local + len(raw_text)),
        ))

    filler(rng.randint(1, 3))
    b.add_evidence("registration_date", CanonicalType.DATE, _random_date(rng),
                   "registered on {raw} by the acting clerk.")
    filler(rng.randint(1, 3))
    if rng.random() < 0.9:  # leave some documents without a registry id
        rid = f"{rng.randint(10, 99)}.{rng.randint(100, 999)}-{rng.choice('ABCDEF')}"
        b.add_evidence("registry_id", CanonicalType.ID_NUMBER, rid,
                       "registry number {raw} duly filed.")
    filler(rng.randint(1, 2))
    b.add_evidence("state", CanonicalType.STATE_CODE, rng.choice(["SP", "RJ", "MG"]),
                   "located in the state of {raw} in this record.", with_span=False)
    owner = f"{rng.choice(['Maria', 'Joao', 'Ana'])} {rng.choice(['Silva', 'Souza'])} {i}"
    b.add_evidence("owner", CanonicalType.FREE_TEXT, owner,
                   "owned by {raw} as recorded.", with_span=False)
    if rng.random() < 0.3:
        code = str(rng.randint(10, 99))
        # the raw text occurs twice in the sentence: alignment must flag it
        b.add_evidence("dup_code", CanonicalType.ID_NUMBER, code,
                       "code {raw} repeated as " + code + " in the margin.")
    b.add_locationless("status", rng.choice(["clear", "debts"]))
    filler(rng.randint(1, 3))
    return b.build()


def make_certificate_doc(i: int, rng: random.Random) -> DocumentRecord:
    b = CorpusBuilder(f"cert-{i:04d}", "certificate")
    b.add_line(f"Tax office certificate {i} issued for verification purposes.")
    for _ in range(rng.randint(2, 5)):
        b.add_line(f"Paragraph {rng.randint(10, 99)} of certificate {i} about "
                   f"case {rng.randint(1000, 9999)}.")
    b.add_evidence("issue_date", CanonicalType.DATE, _random_date(rng),
                   "issued on {raw} at the registry desk.")
    cid = f"{rng.randint(1000, 9999)}/{rng.randint(10, 99)}"
    b.add_evidence("cert_id", CanonicalType.ID_NUMBER, cid,
                   "certificate number {raw} was assigned.")
    b.add_locationless("result", rng.choice(["positive", "negative"]))
    for _ in range(rng.randint(1, 3)):
        b.add_line(f"Closing remark {rng.randint(10, 99)} for certificate {i}.")
    return b.build()


def make_corpus(n_docs: int = 50, seed: int = 7) -> list[DocumentRecord]:
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        if i % 3 == 2:
            docs.append(make_certificate_doc(i, rng))
        else:
            docs.append(make_property_doc(i, rng))
    return docs


@pytest.fixture(scope="session")
def schemas():
    return parse_schema(SCHEMA_YAML, source="conftest")


@pytest.fixture(scope="session")
def corpus():
    return make_corpus(50)


@pytest.fixture()
def schema_file(tmp_path):
    path = tmp_path / "schema.yaml"
    path.write_text(SCHEMA_YAML, encoding="utf-8")
    return path
