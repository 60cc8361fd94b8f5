import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqie.answer_codec import (
    NA,
    AnswerItem,
    AnswerRecord,
    Variant,
    encode,
    parse,
    split_compound,
)
from seqie.errors import MalformedAnswer, VariantMismatchError
from seqie.schema import CompoundGroup, FieldSchema

AREA_GROUP = CompoundGroup(
    name="private_area",
    question="What is the private area?",
    members=(
        FieldSchema(name="area_value", clue="value", question="Q?"),
        FieldSchema(name="area_unit", clue="unit", question="Q?"),
    ),
)

CLUES = {"value", "unit"}


def area_record(sent=False, raw=False, compound=True):
    items = [
        AnswerItem("value", "64.02", 4 if sent else None, "64,020" if raw else None),
        AnswerItem("unit", "m²", 4 if sent else None, "square meters" if raw else None),
    ]
    return AnswerRecord.of(items if compound else items[:1])


class TestEncode:
    def test_sent_single(self):
        record = AnswerRecord.of([AnswerItem("value", "64.02", sent_id=4)])
        assert encode(record, Variant(sent=True)) == "[SENT4] [value]: 64.02"

    def test_compound(self):
        assert encode(area_record(), Variant(compound=True)) == "[value]: 64.02 [unit]: m²"

    def test_na(self):
        assert encode(AnswerRecord.na(), Variant()) == "N/A"

    def test_full_variant(self):
        out = encode(area_record(sent=True, raw=True), Variant(True, True, True))
        assert out == ("[SENT4] [value]: 64.02 [text] 64,020 "
                       "[SENT4] [unit]: m² [text] square meters")

    def test_missing_sent_id_rejected(self):
        record = AnswerRecord.of([AnswerItem("value", "64.02")])
        with pytest.raises(VariantMismatchError):
            encode(record, Variant(sent=True))

    def test_unexpected_raw_rejected(self):
        record = AnswerRecord.of([AnswerItem("value", "64.02", raw_text="x")])
        with pytest.raises(VariantMismatchError):
            encode(record, Variant())

    def test_reserved_tokens_in_value_rejected(self):
        for bad in ("a [SENT3] b", "a [text] b", "a [value]: b"):
            record = AnswerRecord.of([AnswerItem("value", bad)])
            with pytest.raises(VariantMismatchError):
                encode(record, Variant())

    def test_bracket_escape_hatch(self):
        record = AnswerRecord.of([AnswerItem("value", "a [text] b")])
        out = encode(record, Variant(), escape_brackets=True)
        assert out == "[value]: a ［text］ b"
        parsed = parse(out, CLUES, Variant())
        assert parsed.items[0].value == "a ［text］ b"

    def test_no_double_spaces_or_trailing_whitespace(self):
        record = AnswerRecord.of([AnswerItem("value", "  spaced   out  ")])
        out = encode(record, Variant())
        assert "  " not in out and out == out.strip()

    def test_multiple_items_in_non_compound_rejected(self):
        with pytest.raises(VariantMismatchError):
            encode(area_record(), Variant(compound=False))


class TestParse:
    def test_table_row8(self):
        text = ("[SENT4] [value]: 64.02 [text] 64,020 "
                "[SENT4] [unit]: m² [text] square meters")
        record = parse(text, CLUES, Variant(True, True, True))
        assert record == area_record(sent=True, raw=True)

    def test_na(self):
        record = parse("N/A", CLUES, Variant())
        assert record.is_na and not record.items

    def test_missing_colon(self):
        with pytest.raises(MalformedAnswer, match="missing colon"):
            parse("[value] 64.02", CLUES, Variant())

    def test_unknown_clue(self):
        with pytest.raises(MalformedAnswer, match="unknown clue"):
            parse("[bogus]: 64.02", CLUES, Variant())

    def test_empty_value(self):
        with pytest.raises(MalformedAnswer, match="empty value"):
            parse("[value]: [unit]: m²", CLUES, Variant(compound=True))

    def test_rawpart_without_item(self):
        with pytest.raises(MalformedAnswer, match="no preceding"):
            parse("[text] 64,020", CLUES, Variant(raw=True))

    def test_sent_token_in_non_sent_variant(self):
        with pytest.raises(MalformedAnswer, match="non-sent"):
            parse("[SENT4] [value]: 64.02", CLUES, Variant())

    def test_dangling_text_token(self):
        with pytest.raises(MalformedAnswer, match="dangling"):
            parse("[value]: 64.02 [text]", CLUES, Variant(raw=True))

    def test_whitespace_tolerance(self):
        record = parse("  [value]:   64.02   [unit]:  m²  ", CLUES, Variant(compound=True))
        assert [i.value for i in record.items] == ["64.02", "m²"]

    def test_garbage_total(self):
        for garbage in ("", "complete nonsense", "[", "]:"):
            with pytest.raises(MalformedAnswer):
                parse(garbage, CLUES, Variant())

    def test_surface_order_preserved(self):
        record = parse("[unit]: m² [value]: 64.02", CLUES, Variant(compound=True))
        assert [i.clue for i in record.items] == ["unit", "value"]


class TestSplitCompound:
    def test_both_mapped(self):
        mapping, dups = split_compound(area_record(), AREA_GROUP)
        assert mapping["area_value"].value == "64.02"
        assert mapping["area_unit"].value == "m²"
        assert not dups

    def test_missing_member_absent(self):
        record = AnswerRecord.of([AnswerItem("value", "64.02")])
        mapping, dups = split_compound(record, AREA_GROUP)
        assert mapping["area_value"] is not None and mapping["area_unit"] is None
        assert not dups

    def test_duplicate_keeps_first_and_flags(self):
        record = AnswerRecord.of([AnswerItem("value", "1"), AnswerItem("value", "2")])
        mapping, dups = split_compound(record, AREA_GROUP)
        assert mapping["area_value"].value == "1"
        assert dups == ["value"]


# ---- round-trip property ----

clue_names = st.sampled_from(["value", "unit", "date", "street", "zip_code", "id0"])
payloads = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp")),
    min_size=1, max_size=30,
).map(lambda s: " ".join(s.split())).filter(
    lambda s: s and "[" not in s and "]" not in s and s != NA
)
variants = st.builds(Variant, compound=st.booleans(), sent=st.booleans(), raw=st.booleans())


@st.composite
def record_and_variant(draw):
    variant = draw(variants)
    n = draw(st.integers(min_value=1, max_value=4)) if variant.compound else 1
    clues = draw(st.lists(clue_names, min_size=n, max_size=n, unique=True))
    if draw(st.booleans()):
        return AnswerRecord.na(), variant, set(clues)
    items = [
        AnswerItem(
            clue=clue,
            value=draw(payloads),
            sent_id=draw(st.integers(min_value=1, max_value=999)) if variant.sent else None,
            raw_text=draw(payloads) if variant.raw else None,
        )
        for clue in clues
    ]
    return AnswerRecord.of(items), variant, set(clues)


@given(record_and_variant())
@settings(max_examples=400, deadline=None)
def test_roundtrip_property(case):
    record, variant, clues = case
    encoded = encode(record, variant)
    assert "  " not in encoded and encoded == encoded.strip()
    assert parse(encoded, clues, variant) == record
