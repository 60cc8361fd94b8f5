import pytest

from seqie.errors import SchemaError
from seqie.schema import (
    CanonicalType,
    CompoundGroup,
    DocumentTypeSchema,
    FieldSchema,
    load_schema,
    parse_schema,
    question_for,
)

MINIMAL = """
doc_types:
  - doc_type: memo
    fields:
      - name: subject
        clue: subject
        question: What is the subject?
"""


def test_minimal_schema():
    (schema,) = parse_schema(MINIMAL)
    assert schema.doc_type == "memo"
    assert len(schema.fields) == 1
    field = schema.fields[0]
    assert field.clue == "subject"
    assert field.canonical_type == CanonicalType.FREE_TEXT
    assert not field.use_sent_ids and not field.use_raw_text


def test_load_schema_roundtrip(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_schema(path) == parse_schema(MINIMAL)
    # determinism: same bytes, structurally identical schemas
    assert load_schema(path) == load_schema(path)


def test_address_group_order():
    members = ["street", "number", "complement", "district", "city", "state", "zip_code"]
    yaml_text = "doc_types:\n  - doc_type: form\n    fields:\n"
    for m in members:
        yaml_text += (
            f"      - name: {m}\n        clue: {m}\n"
            f"        question: What is the {m}?\n"
        )
    yaml_text += (
        "    compound_groups:\n"
        "      - name: address\n"
        "        question: What is the address?\n"
        f"        members: [{', '.join(members)}]\n"
    )
    (schema,) = parse_schema(yaml_text)
    group = schema.compound_groups[0]
    assert [m.name for m in group.members] == members


def test_duplicate_clue_rejected():
    bad = """
doc_types:
  - doc_type: memo
    fields:
      - {name: a, clue: value, question: "Q1?"}
      - {name: b, clue: value, question: "Q2?"}
"""
    with pytest.raises(SchemaError, match="duplicate clue"):
        parse_schema(bad)


def test_dangling_member_rejected():
    bad = """
doc_types:
  - doc_type: memo
    fields:
      - {name: a, clue: a, question: "Q?"}
      - {name: b, clue: b, question: "Q?"}
    compound_groups:
      - {name: g, question: "Q?", members: [a, nope]}
"""
    with pytest.raises(SchemaError, match="unknown field"):
        parse_schema(bad)


def test_parse_error_reports_position():
    with pytest.raises(SchemaError, match="line"):
        parse_schema("doc_types:\n  - doc_type: x\n   bad_indent: [")


def test_invalid_clue_characters():
    with pytest.raises(SchemaError, match="clue"):
        FieldSchema(name="a", clue="Va[lue", question="Q?")


def test_group_needs_two_members():
    f = FieldSchema(name="a", clue="a", question="Q?")
    with pytest.raises(SchemaError, match=">= 2"):
        CompoundGroup(name="g", question="Q?", members=(f,))


def test_field_in_two_groups_rejected():
    fields = tuple(
        FieldSchema(name=n, clue=n, question="Q?") for n in ("a", "b", "c")
    )
    g1 = CompoundGroup(name="g1", question="Q?", members=fields[:2])
    g2 = CompoundGroup(name="g2", question="Q?", members=fields[1:])
    with pytest.raises(SchemaError, match="more than one"):
        DocumentTypeSchema(doc_type="t", fields=fields, compound_groups=(g1, g2))


class TestQuestionFor:
    group = CompoundGroup(
        name="private_area",
        question="What is the private area?",
        members=(
            FieldSchema(name="v", clue="value", question="What is the value of the private area?"),
            FieldSchema(name="u", clue="unit", question="What is the unit of the private area?"),
        ),
        use_raw_text=True,
    )

    def test_plain(self):
        assert question_for(self.group, raw=False) == "What is the private area?"

    def test_raw_suffix_appended_once(self):
        q = question_for(self.group, raw=True, raw_suffix=" and how does it appear in text?")
        assert q == "What is the private area and how does it appear in text?"

    def test_empty_suffix_leaves_question_unchanged(self):
        assert question_for(self.group, raw=True, raw_suffix="") == self.group.question

    def test_plain_question_is_strict_prefix_of_raw(self):
        plain = question_for(self.group, raw=False)
        raw = question_for(self.group, raw=True)
        assert raw.startswith(plain.rstrip("?")) and len(raw) > len(plain)
        assert raw.count("?") == 1
