"""Rule-based date tagging normalized to ISO-8601 partial dates.

Recognized forms: ISO dates (2006-04-04), numeric dates with
per-language day/month order (04.04.2006, 4/4/2006), month-name dates
from per-language lexicons (4. April 2006, April 4, 2006, abril de
2006), and bare years 1900-2099. The norm carries exactly the precision
found: YYYY, YYYY-MM or YYYY-MM-DD.

A numeric date that is calendar-valid under both orders while the
language is unknown is ambiguous: it degrades to the year alone rather
than guessing a possibly wrong day.
"""

from __future__ import annotations

import datetime
import logging
import os
import re
from functools import lru_cache

from textsleuth.preprocess import TokenizedUnit

from .annotation import Annotation

log = logging.getLogger(__name__)

# day-before-month languages; everything else known defaults here too,
# only "und"/unknown triggers the ambiguity rule
_MONTH_FIRST_LANGS = {"en"}
_DAY_FIRST_LANGS = {"de", "es", "fr"}

_ISO_RE = re.compile(r"(?<![\d.\-/])(\d{4})-(\d{2})-(\d{2})(?![\d.\-/])")
_NUMERIC_RE = re.compile(r"(?<![\d.\-/])(\d{1,4})([./-])(\d{1,2})\2(\d{1,4})(?![\d.\-/])")
_BARE_YEAR_RE = re.compile(r"(?<![\d.\-/])(19\d{2}|20\d{2})(?![\d.\-/])")


def _resource_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "..", "resources", "temporal")


@lru_cache(maxsize=None)
def _month_lexicon(lang: str) -> dict:
    path = os.path.join(_resource_dir(), f"{lang}.months.tsv")
    lexicon: dict = {}
    if not os.path.exists(path):
        return lexicon
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, number = line.split("\t")
            lexicon[name] = int(number)
    return lexicon


@lru_cache(maxsize=None)
def _all_month_lexicons() -> dict:
    merged: dict = {}
    for name in sorted(os.listdir(_resource_dir())):
        if name.endswith(".months.tsv"):
            for key, value in _month_lexicon(name.split(".")[0]).items():
                merged.setdefault(key, value)
    return merged


@lru_cache(maxsize=None)
def _month_patterns(lang: str):
    lexicon = _month_lexicon(lang) or _all_month_lexicons()
    if not lexicon:
        return None, lexicon
    names = sorted(lexicon, key=len, reverse=True)
    alternation = "|".join(re.escape(n) for n in names)
    month = rf"(?P<month>(?:{alternation}))\.?"
    day = r"(?P<day>\d{1,2})(?:st|nd|rd|th)?\.?"
    year = r"(?P<year>\d{4})"
    dmy = re.compile(
        rf"\b{day}\s*(?:de\s+|of\s+)?{month}\s+(?:de[lr]?\s+)?{year}\b", re.IGNORECASE
    )
    mdy = re.compile(rf"\b{month}\s+{day},?\s+{year}\b", re.IGNORECASE)
    my = re.compile(rf"\b{month}\s+(?:de[lr]?\s+)?{year}\b", re.IGNORECASE)
    return (dmy, mdy, my), lexicon


def _valid_date(year: int, month: int, day: int) -> bool:
    if not 1000 <= year <= 2999:
        return False
    try:
        datetime.date(year, month, day)
        return True
    except ValueError:
        return False


def _resolve_numeric(first: int, second: int, year: int, lang: str):
    """Map two numeric components onto (month, day) per language order."""
    day_first_ok = _valid_date(year, second, first)
    month_first_ok = _valid_date(year, first, second)
    if lang in _DAY_FIRST_LANGS:
        if day_first_ok:
            return second, first
        if month_first_ok:
            return first, second
        return None
    if lang in _MONTH_FIRST_LANGS:
        if month_first_ok:
            return first, second
        if day_first_ok:
            return second, first
        return None
    # unknown language
    if day_first_ok and month_first_ok:
        if first == second:
            return first, second
        return "ambiguous"
    if day_first_ok:
        return second, first
    if month_first_ok:
        return first, second
    return None


def _candidates(text: str, lang: str):
    out = []  # (start, end, norm)

    for m in _ISO_RE.finditer(text):
        year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if _valid_date(year, month, day):
            out.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))

    for m in _NUMERIC_RE.finditer(text):
        a, b = m.group(1), m.group(3)
        c = m.group(4)
        if len(m.group(1)) == 4 and len(c) == 4:
            continue
        if len(m.group(1)) == 4:
            # year-first numeric form, e.g. 2006.04.04
            year, month, day = int(a), int(b), int(c)
            if _valid_date(year, month, day):
                out.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
            continue
        if len(c) != 4:
            continue  # two-digit years are out of scope
        year = int(c)
        resolved = _resolve_numeric(int(a), int(b), year, lang)
        if resolved == "ambiguous":
            log.debug("ambiguous numeric date %r (lang=%s): keeping year only", m.group(), lang)
            if 1900 <= year <= 2099:
                out.append((m.start(), m.end(), f"{year:04d}"))
        elif resolved is not None:
            month, day = resolved
            out.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))

    patterns, lexicon = _month_patterns(lang)
    if patterns:
        dmy, mdy, my = patterns
        for m in dmy.finditer(text):
            month = lexicon.get(m.group("month").lower())
            year, day = int(m.group("year")), int(m.group("day"))
            if month and _valid_date(year, month, day):
                out.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
        for m in mdy.finditer(text):
            month = lexicon.get(m.group("month").lower())
            year, day = int(m.group("year")), int(m.group("day"))
            if month and _valid_date(year, month, day):
                out.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
        for m in my.finditer(text):
            month = lexicon.get(m.group("month").lower())
            year = int(m.group("year"))
            if month and 1000 <= year <= 2999:
                out.append((m.start(), m.end(), f"{year:04d}-{month:02d}"))

    for m in _BARE_YEAR_RE.finditer(text):
        out.append((m.start(), m.end(), m.group(1)))

    return out


def tag_temporal(unit_text: str, unit: TokenizedUnit, lang: str = "") -> list:
    """Temporal annotations for one unit; leftmost-longest on overlap."""
    lang = lang or unit.lang
    accepted: list = []
    for start, end, norm in sorted(
        _candidates(unit_text, lang), key=lambda c: (c[0], -(c[1] - c[0]), -len(c[2]))
    ):
        if all(end <= s or start >= e for s, e, _ in accepted):
            accepted.append((start, end, norm))
    accepted.sort()
    return [
        Annotation(
            unit_id=unit.unit_id,
            start=start,
            end=end,
            a_type="TIME",
            surface=unit_text[start:end],
            norm=norm,
            provenance="temporal",
        )
        for start, end, norm in accepted
    ]
