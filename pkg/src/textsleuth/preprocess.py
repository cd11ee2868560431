"""Language identification and Unicode-aware segmentation.

Language ID uses character n-gram rank profiles (n = 1..3, top 300)
built from bundled per-language sample texts and compared with the
classic out-of-place rank distance. Adding a language means dropping a
`<code>.sample.txt` file into the resource directory.

Segmentation produces sentence spans and word/punctuation tokens with
exact character offsets, with an abbreviation-aware sentence rule set.
"""

from __future__ import annotations

import logging
import os
import re
import unicodedata
from dataclasses import dataclass
from typing import Optional

log = logging.getLogger(__name__)

PROFILE_SIZE = 300
MIN_DETECT_CHARS = 20
UNDETERMINED = "und"


# ---------------------------------------------------------------------------
# normalization


def normalize_token(surface: str, lang_code: str = UNDETERMINED) -> str:
    """NFKC-normalize and lowercase; no stemming, no casefold expansion."""
    return unicodedata.normalize("NFKC", surface).lower()


# ---------------------------------------------------------------------------
# language identification


@dataclass
class LanguageProfile:
    lang_code: str
    ngram_ranks: dict  # n-gram -> rank, 1 = most frequent


@dataclass
class LangGuess:
    lang_code: str
    confidence: float


def _ngram_counts(text: str) -> dict:
    cleaned = []
    for ch in unicodedata.normalize("NFKC", text).lower():
        cleaned.append(ch if ch.isalpha() else " ")
    collapsed = re.sub(r" +", " ", "".join(cleaned)).strip()
    if not collapsed:
        return {}
    padded = f" {collapsed} "
    counts: dict = {}
    for n in (1, 2, 3):
        for i in range(len(padded) - n + 1):
            gram = padded[i : i + n]
            counts[gram] = counts.get(gram, 0) + 1
    return counts


def build_profile(lang_code: str, sample_text: str, size: int = PROFILE_SIZE) -> LanguageProfile:
    counts = _ngram_counts(sample_text)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return LanguageProfile(
        lang_code=lang_code,
        ngram_ranks={gram: rank for rank, (gram, _) in enumerate(ranked, start=1)},
    )


def _rank_distance(text_ranks: dict, profile: LanguageProfile) -> int:
    penalty = max(len(profile.ngram_ranks), len(text_ranks))
    dist = 0
    for gram, rank in text_ranks.items():
        other = profile.ngram_ranks.get(gram)
        dist += abs(rank - other) if other is not None else penalty
    return dist


def detect_language(text: str, profiles: dict) -> LangGuess:
    """Best-matching language by out-of-place n-gram rank distance.

    Texts with fewer than MIN_DETECT_CHARS word characters (or an empty
    profile set) come back as "und" with confidence 0.
    """
    word_chars = sum(1 for ch in text if ch.isalnum())
    if word_chars < MIN_DETECT_CHARS or not profiles:
        return LangGuess(UNDETERMINED, 0.0)
    text_profile = build_profile("", text)
    text_ranks = text_profile.ngram_ranks
    if not text_ranks:
        return LangGuess(UNDETERMINED, 0.0)
    best_lang, best_dist, worst = None, None, 1
    for lang_code in sorted(profiles):
        profile = profiles[lang_code]
        dist = _rank_distance(text_ranks, profile)
        if best_dist is None or dist < best_dist:
            best_lang, best_dist = lang_code, dist
            worst = len(text_ranks) * max(len(profile.ngram_ranks), len(text_ranks))
    return LangGuess(best_lang, 1.0 - best_dist / worst)


def load_profiles(resource_dir: Optional[str] = None) -> dict:
    """Build profiles from `<code>.sample.txt` files in a directory."""
    resource_dir = resource_dir or default_language_resource_dir()
    profiles: dict = {}
    for name in sorted(os.listdir(resource_dir)):
        if not name.endswith(".sample.txt"):
            continue
        lang_code = name[: -len(".sample.txt")]
        with open(os.path.join(resource_dir, name), encoding="utf-8") as fh:
            profiles[lang_code] = build_profile(lang_code, fh.read())
    return profiles


def default_language_resource_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "resources", "lang")


# ---------------------------------------------------------------------------
# segmentation


@dataclass
class Token:
    start: int
    end: int
    surface: str
    is_word: bool


@dataclass
class TokenizedUnit:
    unit_id: str
    sentences: list  # [start, end) spans partitioning the text
    tokens: list  # Token, ordered
    lang: str = UNDETERMINED

    def word_tokens(self) -> list:
        return [t for t in self.tokens if t.is_word]


# Abbreviations whose trailing period neither ends a sentence nor splits
# off as a punctuation token. Lowercased, period-free.
_ABBREVIATIONS = {
    "en": {"mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc",
           "inc", "ltd", "co", "fig", "no", "dept", "approx", "gen", "col",
           "sgt", "capt", "jan", "feb", "mar", "apr", "jun", "jul", "aug",
           "sep", "sept", "oct", "nov", "dec"},
    "de": {"dr", "prof", "nr", "str", "bzw", "ca", "evtl", "ggf", "usw",
           "vgl", "hr", "fr", "abs", "abt", "betr", "inkl", "insb", "jan",
           "feb", "mrz", "apr", "jun", "jul", "aug", "sep", "sept", "okt",
           "nov", "dez", "zb", "ua", "og"},
    "es": {"sr", "sra", "srta", "dr", "dra", "etc", "ud", "uds", "av",
           "núm", "num", "tel", "ene", "feb", "mar", "abr", "jun", "jul",
           "ago", "sep", "sept", "oct", "nov", "dic"},
    "fr": {"m", "mme", "mlle", "dr", "etc", "av", "bd", "tél", "tel",
           "janv", "févr", "fevr", "avr", "juil", "sept", "oct", "nov",
           "déc", "dec"},
}

_WORD_RE = re.compile(
    r"\d+(?:[.,:]\d+)+"          # numbers with internal . , : (kept whole)
    r"|\w+(?:[’']\w+)*",    # letter/digit runs with internal apostrophes
    re.UNICODE,
)

_CLOSERS = "\"'’”»)]}"


def _abbreviations(lang_code: str) -> set:
    return _ABBREVIATIONS.get(lang_code, _ABBREVIATIONS["en"])


def segment(text: str, lang_code: str = UNDETERMINED) -> TokenizedUnit:
    """Sentence and token spans over `text`; deterministic, offset-exact."""
    tokens = _tokenize(text, lang_code)
    sentences = _sentence_spans(text, tokens, lang_code)
    return TokenizedUnit(unit_id="", sentences=sentences, tokens=tokens, lang=lang_code)


def _tokenize(text: str, lang_code: str) -> list:
    abbrevs = _abbreviations(lang_code)
    tokens: list = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        match = _WORD_RE.match(text, pos)
        if match:
            start, end = match.start(), match.end()
            surface = match.group()
            # attach the period of known abbreviations and single initials
            if end < n and text[end] == ".":
                low = surface.lower()
                if low in abbrevs or (len(surface) == 1 and surface.isalpha() and surface.isupper()):
                    end += 1
                    surface = text[start:end]
            tokens.append(Token(start, end, surface, True))
            pos = end
        else:
            tokens.append(Token(pos, pos + 1, ch, False))
            pos += 1
    return tokens


_TERMINALS = {".", "!", "?", "…"}


def _sentence_spans(text: str, tokens: list, lang_code: str) -> list:
    if not text:
        return []
    boundaries = [0]
    for i, tok in enumerate(tokens):
        if not tok.is_word and tok.surface in _TERMINALS:
            # skip closing quotes/brackets directly after the terminal
            j = i + 1
            while j < len(tokens) and not tokens[j].is_word and tokens[j].surface in _CLOSERS and tokens[j].start == tokens[j - 1].end:
                j += 1
            if j >= len(tokens):
                continue
            nxt = tokens[j]
            gap = text[tokens[j - 1].end : nxt.start]
            lead = nxt.surface[0]
            if (gap and (lead.isupper() or lead.isdigit() or lead in "\"'“«([{")) or "\n" in gap:
                boundaries.append(nxt.start)
    # paragraph breaks are always boundaries
    for match in re.finditer(r"\n[ \t]*\n+", text):
        if 0 < match.end() < len(text):
            boundaries.append(match.end())
    boundaries = sorted(set(boundaries))
    # spans cover the text contiguously so every token falls in exactly one
    spans = []
    for k, start in enumerate(boundaries):
        end = boundaries[k + 1] if k + 1 < len(boundaries) else len(text)
        if start < end:
            spans.append((start, end))
    if spans and not tokens:
        return []
    return spans


# ---------------------------------------------------------------------------
# bundled default profiles (built once per process)

_default_profiles: Optional[dict] = None


def default_profiles() -> dict:
    global _default_profiles
    if _default_profiles is None:
        _default_profiles = load_profiles()
        log.info("loaded %d language profiles", len(_default_profiles))
    return _default_profiles
