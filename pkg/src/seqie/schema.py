"""Declarative field schemas: document types, fields, clues, questions, compound groups.

Schema files are YAML. Reference layout:

    raw_suffix: " and how does it appear in the text?"   # optional, global default
    doc_types:
      - doc_type: property
        raw_suffix: " and how does it appear in text?"   # optional override
        fields:
          - name: private_area_value
            clue: value
            question: What is the value of the private area?
            canonical_type: decimal_area
            sent: true
            raw: true
        compound_groups:
          - name: private_area
            question: What is the private area?
            members: [private_area_value, private_area_unit]
            sent: true
            raw: true

Schemas are immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import yaml

from .errors import SchemaError

DEFAULT_RAW_SUFFIX = " and how does it appear in the text?"

_CLUE_RE = re.compile(r"^[a-z0-9_]+$")


class CanonicalType(str, Enum):
    DATE = "date"
    DECIMAL_AREA = "decimal_area"
    ID_NUMBER = "id_number"
    STATE_CODE = "state_code"
    CATEGORICAL = "categorical"
    FREE_TEXT = "free_text"


@dataclass(frozen=True)
class FieldSchema:
    name: str
    clue: str
    question: str
    canonical_type: CanonicalType = CanonicalType.FREE_TEXT
    use_sent_ids: bool = False
    use_raw_text: bool = False
    vocabulary: tuple[str, ...] = ()  # for categorical fields

    def __post_init__(self):
        if not self.name:
            raise SchemaError("field name must be non-empty")
        if not _CLUE_RE.match(self.clue):
            raise SchemaError(
                f"field {self.name!r}: clue {self.clue!r} must match [a-z0-9_]+"
            )
        if not self.question.strip():
            raise SchemaError(f"field {self.name!r}: question must be non-empty")


@dataclass(frozen=True)
class CompoundGroup:
    name: str
    question: str
    members: tuple[FieldSchema, ...]
    use_sent_ids: bool = False
    use_raw_text: bool = False

    def __post_init__(self):
        if len(self.members) < 2:
            raise SchemaError(f"compound group {self.name!r} needs >= 2 members")
        if not self.question.strip():
            raise SchemaError(f"compound group {self.name!r}: question must be non-empty")

    @property
    def member_clues(self) -> tuple[str, ...]:
        return tuple(m.clue for m in self.members)


QuestionUnit = Union[FieldSchema, CompoundGroup]


@dataclass(frozen=True)
class DocumentTypeSchema:
    doc_type: str
    fields: tuple[FieldSchema, ...]
    compound_groups: tuple[CompoundGroup, ...] = ()
    raw_suffix: str = DEFAULT_RAW_SUFFIX

    def __post_init__(self):
        clues = [f.clue for f in self.fields]
        for clue in clues:
            if clues.count(clue) > 1:
                raise SchemaError(
                    f"doc type {self.doc_type!r}: duplicate clue {clue!r}"
                )
        names = {f.name for f in self.fields}
        seen: set[str] = set()
        for group in self.compound_groups:
            for member in group.members:
                if member.name not in names:
                    raise SchemaError(
                        f"doc type {self.doc_type!r}: compound group {group.name!r} "
                        f"references unknown field {member.name!r}"
                    )
                if member.name in seen:
                    raise SchemaError(
                        f"doc type {self.doc_type!r}: field {member.name!r} "
                        f"appears in more than one compound group"
                    )
                seen.add(member.name)

    def field_by_name(self, name: str) -> FieldSchema:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def grouped_field_names(self) -> set[str]:
        return {m.name for g in self.compound_groups for m in g.members}

    def standalone_fields(self) -> tuple[FieldSchema, ...]:
        grouped = self.grouped_field_names()
        return tuple(f for f in self.fields if f.name not in grouped)

    def question_units(self, use_compound: bool = True) -> tuple[QuestionUnit, ...]:
        """Questions actually asked: groups plus ungrouped fields, or every
        field individually when compound mode is off."""
        if not use_compound:
            return self.fields
        return self.compound_groups + self.standalone_fields()

    def question_for(self, unit: QuestionUnit, raw: bool) -> str:
        return question_for(unit, raw, raw_suffix=self.raw_suffix)


def question_for(unit: QuestionUnit, raw: bool, raw_suffix: str = DEFAULT_RAW_SUFFIX) -> str:
    """The question sent to the model; the raw-format suffix is appended
    exactly once when the raw variant is requested. A trailing question mark
    on the base question is dropped so the suffix carries the only one."""
    if raw and raw_suffix:
        return unit.question.rstrip("?") + raw_suffix
    return unit.question


def members_of(unit: QuestionUnit) -> tuple[FieldSchema, ...]:
    if isinstance(unit, CompoundGroup):
        return unit.members
    return (unit,)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise SchemaError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _parse_field(raw: dict, context: str) -> FieldSchema:
    if not isinstance(raw, dict):
        raise SchemaError(f"{context}: field entry must be a mapping")
    name = str(_require(raw, "name", context))
    type_name = str(raw.get("canonical_type", "free_text"))
    try:
        ctype = CanonicalType(type_name)
    except ValueError:
        raise SchemaError(
            f"{context}: field {name!r} has unknown canonical_type {type_name!r}"
        ) from None
    return FieldSchema(
        name=name,
        clue=str(_require(raw, "clue", context)),
        question=str(_require(raw, "question", context)),
        canonical_type=ctype,
        use_sent_ids=bool(raw.get("sent", False)),
        use_raw_text=bool(raw.get("raw", False)),
        vocabulary=tuple(str(v) for v in raw.get("vocabulary", [])),
    )


def parse_schema(text: str, source: str = "<string>") -> list[DocumentTypeSchema]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise SchemaError(f"{source}: parse error{where}: {exc}") from exc
    if not isinstance(data, dict) or "doc_types" not in data:
        raise SchemaError(f"{source}: top level must be a mapping with 'doc_types'")
    global_suffix = data.get("raw_suffix", DEFAULT_RAW_SUFFIX)

    schemas = []
    for entry in data["doc_types"]:
        doc_type = str(_require(entry, "doc_type", source))
        context = f"{source}: doc type {doc_type!r}"
        fields = tuple(_parse_field(f, context) for f in entry.get("fields", []))
        by_name = {f.name: f for f in fields}
        groups = []
        for graw in entry.get("compound_groups", []):
            gname = str(_require(graw, "name", context))
            members = []
            for member_name in _require(graw, "members", context):
                if member_name not in by_name:
                    raise SchemaError(
                        f"{context}: compound group {gname!r} references "
                        f"unknown field {member_name!r}"
                    )
                members.append(by_name[member_name])
            groups.append(
                CompoundGroup(
                    name=gname,
                    question=str(_require(graw, "question", context)),
                    members=tuple(members),
                    use_sent_ids=bool(graw.get("sent", False)),
                    use_raw_text=bool(graw.get("raw", False)),
                )
            )
        schemas.append(
            DocumentTypeSchema(
                doc_type=doc_type,
                fields=fields,
                compound_groups=tuple(groups),
                raw_suffix=str(entry.get("raw_suffix", global_suffix)),
            )
        )
    if not schemas:
        raise SchemaError(f"{source}: no document types declared")
    dupes = [s.doc_type for s in schemas if [x.doc_type for x in schemas].count(s.doc_type) > 1]
    if dupes:
        raise SchemaError(f"{source}: duplicate doc type {dupes[0]!r}")
    return schemas


def load_schema(path) -> list[DocumentTypeSchema]:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read(), source=str(path))


def schema_index(schemas: list[DocumentTypeSchema]) -> dict[str, DocumentTypeSchema]:
    return {s.doc_type: s for s in schemas}
