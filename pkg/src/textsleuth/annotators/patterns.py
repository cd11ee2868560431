"""Regex pattern annotations: email addresses, URLs, phone numbers.

The grammars are fixed (documented in the README) rather than
user-configurable. On overlapping candidates the priority is
EMAIL > URL > PHONE, and within one pattern kind matching is
leftmost-longest and non-overlapping.
"""

from __future__ import annotations

import re

from textsleuth.preprocess import TokenizedUnit

from .annotation import Annotation

# local@domain.tld, ASCII subset
EMAIL_RE = re.compile(
    r"[A-Za-z0-9._%+-]+@[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?"
    r"(?:\.[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?)*\.[A-Za-z]{2,}"
)

# scheme://rest or www.rest; trailing sentence punctuation is trimmed
URL_RE = re.compile(r"(?:[A-Za-z][A-Za-z0-9+.-]*://|www\.)[^\s<>\"]+")
_URL_TRIM = ".,;:!?'\")]}»’”"

# "+"-prefixed or separator-grouped digit runs, 7-15 digits total
PHONE_CANDIDATE_RE = re.compile(r"\+?\d(?:[\d ().\/-]{4,23})\d")
_PHONE_SEPARATORS = set(" ()./-")

# date-shaped digit groups are excluded from phone matching
_DATE_SHAPE_RE = re.compile(
    r"\d{1,2}([./-])\d{1,2}\1\d{4}$|\d{4}([./-])\d{1,2}\2\d{1,2}$"
)


def _email_candidates(text):
    for m in EMAIL_RE.finditer(text):
        yield m.start(), m.end(), "EMAIL", m.group().lower()


def _url_candidates(text):
    for m in URL_RE.finditer(text):
        end = m.end()
        while end > m.start() and text[end - 1] in _URL_TRIM:
            end -= 1
        if end - m.start() < 8:  # too short to be a real locator
            continue
        yield m.start(), end, "URL", text[m.start() : end]


def _phone_candidates(text):
    for m in PHONE_CANDIDATE_RE.finditer(text):
        start, end = m.start(), m.end()
        # never inside a longer digit run
        if start > 0 and (text[start - 1].isdigit() or text[start - 1] == "+"):
            continue
        if end < len(text) and text[end].isdigit():
            continue
        surface = m.group()
        digits = [c for c in surface if c.isdigit()]
        if not 7 <= len(digits) <= 15:
            continue
        # without "+" the grouping must use a visible separator; bare
        # space-separated number pairs (e.g. two years) do not qualify
        if not surface.startswith("+") and not any(c in "()./-" for c in surface):
            continue
        if _DATE_SHAPE_RE.fullmatch(surface):
            continue
        norm = ("+" if surface.startswith("+") else "") + "".join(digits)
        yield start, end, "PHONE", norm


def match_patterns(unit_text: str, unit: TokenizedUnit) -> list:
    """All pattern annotations for one unit, non-overlapping."""
    accepted: list = []

    def free(start, end):
        return all(end <= s or start >= e for s, e, *_ in accepted)

    for candidates in (_email_candidates, _url_candidates, _phone_candidates):
        for start, end, a_type, norm in sorted(
            candidates(unit_text), key=lambda c: (c[0], -(c[1] - c[0]))
        ):
            if free(start, end):
                accepted.append((start, end, a_type, norm))

    accepted.sort()
    return [
        Annotation(
            unit_id=unit.unit_id,
            start=start,
            end=end,
            a_type=a_type,
            surface=unit_text[start:end],
            norm=norm,
            provenance="pattern",
        )
        for start, end, a_type, norm in accepted
    ]
