"""Canonical formatters and validators per field type.

Canonical syntaxes:
  date          ISO 8601, YYYY-MM-DD
  decimal_area  decimal with "." separator, trailing zeros trimmed
  id_number     digits and uppercase letters only, punctuation stripped
  state_code    two uppercase letters
  categorical   a token from the field's schema vocabulary
  free_text     trimmed, internal whitespace collapsed

Input dates are read day-first (Brazilian convention); the month-name table
defaults to Portuguese and is configurable. Decimal comma is read as the
decimal separator; thousand-separator stripping is off by default.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional, Sequence

from .errors import UnnormalizableValue
from .schema import CanonicalType

PT_MONTHS = {
    "janeiro": 1, "fevereiro": 2, "marco": 3, "março": 3, "abril": 4,
    "maio": 5, "junho": 6, "julho": 7, "agosto": 8, "setembro": 9,
    "outubro": 10, "novembro": 11, "dezembro": 12,
}

EN_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5,
    "june": 6, "july": 7, "august": 8, "september": 9, "october": 10,
    "november": 11, "december": 12,
}


@dataclass(frozen=True)
class NormalizationConfig:
    months: dict = field(default_factory=lambda: dict(PT_MONTHS))
    strip_thousand_separators: bool = False


DEFAULT_CONFIG = NormalizationConfig()


@dataclass(frozen=True)
class CanonicalValue:
    canonical: str
    type: CanonicalType
    raw: Optional[str] = None


_ISO_RE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_DMY_RE = re.compile(r"^(\d{1,2})[/.\-](\d{1,2})[/.\-](\d{2,4})$")
_LONG_RE = re.compile(
    r"^(\d{1,2})(?:º|o)?(?:\s+de)?\s+([^\s\d]+)(?:\s+de|,)?\s+(\d{2,4})$",
    re.IGNORECASE,
)
_DECIMAL_RE = re.compile(r"^\d+(\.\d+)?$")
_THOUSANDS_RE = re.compile(r"^\d{1,3}(\.\d{3})+(,\d+)?$")


def _make_date(day: int, month: int, year: int, raw: str) -> str:
    if year < 100:
        raise UnnormalizableValue(f"two-digit year in date {raw!r}")
    try:
        return datetime.date(year, month, day).isoformat()
    except ValueError as exc:
        raise UnnormalizableValue(f"impossible date {raw!r}: {exc}") from None


def _normalize_date(raw: str, config: NormalizationConfig) -> str:
    text = " ".join(raw.split())
    if m := _ISO_RE.match(text):
        return _make_date(int(m.group(3)), int(m.group(2)), int(m.group(1)), raw)
    if m := _DMY_RE.match(text):
        return _make_date(int(m.group(1)), int(m.group(2)), int(m.group(3)), raw)
    if m := _LONG_RE.match(text):
        month = config.months.get(m.group(2).lower())
        if month is None:
            raise UnnormalizableValue(f"unknown month name in date {raw!r}")
        return _make_date(int(m.group(1)), month, int(m.group(3)), raw)
    raise UnnormalizableValue(f"unrecognized date format {raw!r}")


def _normalize_decimal(raw: str, config: NormalizationConfig) -> str:
    text = raw.strip().replace(" ", "")
    if config.strip_thousand_separators and _THOUSANDS_RE.match(text):
        text = text.replace(".", "")
    if "," in text:
        if "." in text:
            raise UnnormalizableValue(
                f"mixed decimal separators in {raw!r} "
                "(thousand-separator stripping is disabled)"
            )
        if text.count(",") > 1:
            raise UnnormalizableValue(f"multiple decimal commas in {raw!r}")
        text = text.replace(",", ".")
    if not _DECIMAL_RE.match(text):
        raise UnnormalizableValue(f"not a decimal number: {raw!r}")
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise UnnormalizableValue(f"not a decimal number: {raw!r}") from None
    return format(value.normalize(), "f")


def _normalize_id_number(raw: str) -> str:
    kept = "".join(ch for ch in raw if ch.isalnum()).upper()
    if not kept or not kept.isascii():
        raise UnnormalizableValue(f"no usable characters in id {raw!r}")
    return kept


def _normalize_state_code(raw: str) -> str:
    kept = "".join(ch for ch in raw if ch.isalpha())
    if len(kept) != 2 or not kept.isascii():
        raise UnnormalizableValue(f"not a two-letter state code: {raw!r}")
    return kept.upper()


def _normalize_categorical(raw: str, vocabulary: Sequence[str]) -> str:
    text = " ".join(raw.split())
    if not vocabulary:
        return text
    for token in vocabulary:
        if token.casefold() == text.casefold():
            return token
    raise UnnormalizableValue(
        f"{raw!r} not in vocabulary {sorted(vocabulary)}"
    )


def normalize(
    raw: str,
    ctype: CanonicalType,
    config: NormalizationConfig = DEFAULT_CONFIG,
    vocabulary: Sequence[str] = (),
) -> CanonicalValue:
    if not raw or not raw.strip():
        raise UnnormalizableValue("empty value")
    if ctype == CanonicalType.DATE:
        canonical = _normalize_date(raw, config)
    elif ctype == CanonicalType.DECIMAL_AREA:
        canonical = _normalize_decimal(raw, config)
    elif ctype == CanonicalType.ID_NUMBER:
        canonical = _normalize_id_number(raw)
    elif ctype == CanonicalType.STATE_CODE:
        canonical = _normalize_state_code(raw)
    elif ctype == CanonicalType.CATEGORICAL:
        canonical = _normalize_categorical(raw, vocabulary)
    elif ctype == CanonicalType.FREE_TEXT:
        canonical = " ".join(raw.split())
    else:  # pragma: no cover
        raise ValueError(f"unknown canonical type {ctype!r}")
    return CanonicalValue(canonical=canonical, type=ctype, raw=raw)


def validate(
    canonical: str,
    ctype: CanonicalType,
    config: NormalizationConfig = DEFAULT_CONFIG,
    vocabulary: Sequence[str] = (),
) -> bool:
    """True iff the string is already in canonical syntax, i.e. it is a fixed
    point of normalize(). Used to lint model outputs before aggregation."""
    try:
        result = normalize(canonical, ctype, config=config, vocabulary=vocabulary)
    except UnnormalizableValue:
        return False
    return result.canonical == canonical
