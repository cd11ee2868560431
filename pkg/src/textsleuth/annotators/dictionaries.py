"""Dictionary-list and gazetteer matching over normalized tokens.

Both annotators share one matching policy: leftmost-longest,
non-overlapping, case-insensitive via token normalization. A candidate
sequence only matches consecutive word tokens inside one sentence with
no punctuation token in between, so "New, York" never matches the term
"new york".
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

from textsleuth.errors import InvalidDictionary
from textsleuth.preprocess import TokenizedUnit, normalize_token, segment

from .annotation import Annotation

log = logging.getLogger(__name__)

ENTITY_TYPES = ("PER", "ORG", "LOC")


@dataclass
class Dictionary:
    list_name: str
    lang_scope: str  # ISO code or "*"
    terms: set  # of tuples of normalized tokens

    def applies_to(self, lang: str) -> bool:
        return self.lang_scope == "*" or self.lang_scope == lang


@dataclass
class Gazetteer:
    # normalized token tuple -> (canonical, a_type)
    entries: dict = field(default_factory=dict)

    def add(self, tokens: tuple, canonical: str, a_type: str) -> None:
        existing = self.entries.get(tokens)
        if existing is not None and existing != (canonical, a_type):
            # deterministic collision rule: longest canonical wins
            winner = max([existing, (canonical, a_type)], key=lambda e: (len(e[0]), e[0]))
            log.warning(
                "gazetteer collision on %r: keeping %s/%s", " ".join(tokens), winner[1], winner[0]
            )
            self.entries[tokens] = winner
        else:
            self.entries[tokens] = (canonical, a_type)


def term_tokens(text: str) -> tuple:
    """Normalize a dictionary/gazetteer term into its token sequence."""
    return tuple(normalize_token(t.surface) for t in segment(text).word_tokens())


def load_dictionary(path: str) -> Dictionary:
    """Read a `<list_name>.<lang|all>.dict` file, one term per line."""
    base = os.path.basename(path)
    parts = base.split(".")
    if len(parts) >= 3 and parts[-1] == "dict":
        list_name = ".".join(parts[:-2])
        lang_scope = "*" if parts[-2] == "all" else parts[-2]
    else:
        list_name = parts[0]
        lang_scope = "*"
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = term_tokens(line.strip())
            if tokens:
                terms.add(tokens)
    if not terms:
        raise InvalidDictionary(f"dictionary {path} contains no terms")
    return Dictionary(list_name=list_name, lang_scope=lang_scope, terms=terms)


def load_gazetteer(path: str) -> Gazetteer:
    """Read a TSV gazetteer with columns term, type, canonical."""
    gazetteer = Gazetteer()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                log.warning("%s:%d: expected 3 tab-separated columns", path, lineno)
                continue
            term, a_type, canonical = cols
            a_type = a_type.strip().upper()
            if a_type not in ENTITY_TYPES:
                log.warning("%s:%d: unknown entity type %r", path, lineno, a_type)
                continue
            tokens = term_tokens(term)
            if tokens:
                gazetteer.add(tokens, canonical.strip(), a_type)
    return gazetteer


# ---------------------------------------------------------------------------
# matching engine


def token_runs(unit: TokenizedUnit) -> list:
    """Maximal runs of word tokens uninterrupted by punctuation or
    sentence boundaries; matching and adjacency both use these."""
    runs: list = []
    current: list = []
    sent = 0
    sentences = unit.sentences
    for tok in unit.tokens:
        while sent < len(sentences) and tok.start >= sentences[sent][1]:
            sent += 1
            if current:
                runs.append(current)
                current = []
        if tok.is_word:
            current.append(tok)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def _match_sequences(unit_text, unit, lookup, max_len):
    """Leftmost-longest matching of normalized token sequences.

    `lookup` maps token tuples to a payload; returns (start_tok,
    end_tok, tokens, payload) for every accepted match.
    """
    matches = []
    for run in token_runs(unit):
        norm = [normalize_token(t.surface) for t in run]
        i = 0
        while i < len(run):
            found = None
            for length in range(min(max_len, len(run) - i), 0, -1):
                candidate = tuple(norm[i : i + length])
                if candidate in lookup:
                    found = (length, candidate)
                    break
            if found:
                length, candidate = found
                matches.append((run[i], run[i + length - 1], candidate, lookup[candidate]))
                i += length
            else:
                i += 1
    return matches


def match_dictionary(unit_text: str, unit: TokenizedUnit, dictionary: Dictionary) -> list:
    """Annotate every dictionary-term mention with its list type."""
    if not dictionary.terms:
        return []
    if not dictionary.applies_to(unit.lang):
        return []
    lookup = {t: t for t in dictionary.terms}
    max_len = max(len(t) for t in dictionary.terms)
    annotations = []
    for first, last, tokens, _ in _match_sequences(unit_text, unit, lookup, max_len):
        annotations.append(
            Annotation(
                unit_id=unit.unit_id,
                start=first.start,
                end=last.end,
                a_type=f"DICT:{dictionary.list_name}",
                surface=unit_text[first.start : last.end],
                norm=" ".join(tokens),
                provenance="dictionary",
            )
        )
    return annotations


def tag_entities(unit_text: str, unit: TokenizedUnit, gazetteer: Gazetteer) -> list:
    """Gazetteer named-entity annotations (PER/ORG/LOC)."""
    if not gazetteer.entries:
        return []
    max_len = max(len(t) for t in gazetteer.entries)
    annotations = []
    for first, last, _tokens, (canonical, a_type) in _match_sequences(
        unit_text, unit, gazetteer.entries, max_len
    ):
        annotations.append(
            Annotation(
                unit_id=unit.unit_id,
                start=first.start,
                end=last.end,
                a_type=a_type,
                surface=unit_text[first.start : last.end],
                norm=canonical,
                provenance="gazetteer",
            )
        )
    return annotations
