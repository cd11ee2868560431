"""Corpus-statistical keyterm extraction.

Terms that are overused in a target scope (unit, document or the
current selection) relative to a per-language reference corpus are
scored with the two-corpus log-likelihood statistic. Adjacent keyterms
that collocate regularly (Dice) merge into key phrases, and keyterms
that duplicate named entities are dropped so entities and keywords can
be displayed separately.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache

from textsleuth import _kernels
from textsleuth.errors import DomainError, MissingReference

log = logging.getLogger(__name__)

DEFAULT_LL_THRESHOLD = 10.83  # chi-squared, 1 df, p < 0.001
DEFAULT_DICE_THRESHOLD = 0.4
DEFAULT_TOP_K = 10


@dataclass
class ReferenceCorpusStats:
    lang_code: str
    total_tokens: int  # d
    term_freq: dict  # term -> b

    def freq(self, term: str) -> int:
        return self.term_freq.get(term, 0)


class TargetStats:
    """Token statistics for one scope.

    `sequences` holds the word-token runs the scope consists of (used
    for n-gram counts during phrase merging); it may be passed as a
    callable producing an iterable so large selections can defer it.
    """

    def __init__(self, scope: str, total_tokens: int, term_freq: dict,
                 adjacency_freq: dict, sequences=()):
        self.scope = scope
        self.total_tokens = total_tokens  # c
        self.term_freq = term_freq  # term -> a
        self.adjacency_freq = adjacency_freq  # (x, y) -> adjacent count
        self._sequences = sequences
        self._materialized = None

    @classmethod
    def from_runs(cls, runs, scope: str = "unit") -> "TargetStats":
        term_freq: dict = {}
        adjacency: dict = {}
        total = 0
        for run in runs:
            total += len(run)
            for token in run:
                term_freq[token] = term_freq.get(token, 0) + 1
            for x, y in zip(run, run[1:]):
                adjacency[(x, y)] = adjacency.get((x, y), 0) + 1
        return cls(scope, total, term_freq, adjacency, [tuple(r) for r in runs])

    @property
    def sequences(self):
        if self._materialized is None:
            seqs = self._sequences() if callable(self._sequences) else self._sequences
            self._materialized = list(seqs)
        return self._materialized

    def freq(self, term: str) -> int:
        return self.term_freq.get(term, 0)

    def ngram_freq(self, tokens: tuple) -> int:
        if len(tokens) == 1:
            return self.freq(tokens[0])
        if len(tokens) == 2:
            return self.adjacency_freq.get((tokens[0], tokens[1]), 0)
        count = 0
        n = len(tokens)
        for seq in self.sequences:
            for i in range(len(seq) - n + 1):
                if seq[i : i + n] == tokens:
                    count += 1
        return count

    def first_occurrence(self, tokens: tuple):
        """Position of the first occurrence, as (sequence idx, offset)."""
        n = len(tokens)
        for idx, seq in enumerate(self.sequences):
            for i in range(len(seq) - n + 1):
                if seq[i : i + n] == tokens:
                    return (idx, i)
        return None


@dataclass
class Keyterm:
    tokens: tuple  # normalized token sequence, length >= 1
    score: float  # log-likelihood, >= threshold
    freq: int  # occurrences in scope

    @property
    def term(self) -> str:
        return " ".join(self.tokens)


def log_likelihood(a: int, b: int, c: int, d: int) -> float:
    """Two-corpus log-likelihood for observed counts a (target, size c)
    and b (reference, size d), with 0*ln(0/E) taken as 0."""
    if c <= 0 or d <= 0:
        raise DomainError("corpus sizes must be positive")
    if not (0 <= a <= c and 0 <= b <= d):
        raise DomainError("counts must lie within their corpus sizes")
    if a + b <= 0:
        raise DomainError("a + b must be positive")
    total = c + d
    e1 = c * (a + b) / total
    e2 = d * (a + b) / total
    ll = 0.0
    if a > 0:
        ll += a * math.log(a / e1)
    if b > 0:
        ll += b * math.log(b / e2)
    return 2.0 * ll


def dice(x: str, y: str, target: TargetStats) -> float:
    """Adjacency-based collocation strength, 2*f(xy) / (f(x)+f(y))."""
    fx, fy = target.freq(x), target.freq(y)
    if fx <= 0 or fy <= 0:
        raise DomainError("dice requires both terms to occur in scope")
    return 2.0 * target.adjacency_freq.get((x, y), 0) / (fx + fy)


def rank_key(kt: Keyterm):
    return (-kt.score, -kt.freq, kt.tokens)


def extract_keyterms(
    target: TargetStats,
    ref: ReferenceCorpusStats,
    threshold: float = DEFAULT_LL_THRESHOLD,
    top_k: int = DEFAULT_TOP_K,
    stopwords=frozenset(),
) -> list:
    """Overused non-stopword terms ranked by log-likelihood keyness."""
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    if top_k < 1:
        raise DomainError("top_k must be >= 1")
    if ref is None:
        raise MissingReference(target.scope)
    c, d = target.total_tokens, ref.total_tokens
    if c <= 0:
        return []
    candidates = [t for t in target.term_freq if t not in stopwords]
    a_values = [target.term_freq[t] for t in candidates]
    b_values = [ref.freq(t) for t in candidates]
    scores = _kernels.ll_scores(_as_array(a_values), _as_array(b_values), c, d)
    kept = [
        Keyterm(tokens=(t,), score=ll, freq=a)
        for t, a, b, ll in zip(candidates, a_values, b_values, scores)
        if a * d > b * c and ll >= threshold  # overuse only
    ]
    kept.sort(key=rank_key)
    return kept[:top_k]


def _as_array(values):
    from array import array

    return array("q", values)


def merge_phrases(
    keyterms: list,
    target: TargetStats,
    dice_threshold: float = DEFAULT_DICE_THRESHOLD,
) -> list:
    """Merge adjacent keyterms into phrases until fixpoint.

    Each round merges the pair with the highest Dice value (ties:
    earliest first occurrence in scope); the merged phrase inherits the
    adjacency count as frequency and the max of the part scores.
    """
    if not 0 < dice_threshold <= 1:
        raise DomainError("dice_threshold must be in (0, 1]")
    items = list(keyterms)
    while True:
        best = None
        for xi, x in enumerate(items):
            for yi, y in enumerate(items):
                joint = target.ngram_freq(x.tokens + y.tokens)
                if joint == 0:
                    continue
                d_val = 2.0 * joint / (x.freq + y.freq)
                if d_val < dice_threshold:
                    continue
                position = target.first_occurrence(x.tokens + y.tokens)
                key = (-d_val, position, x.tokens, y.tokens)
                if best is None or key < best[0]:
                    best = (key, xi, yi, joint, d_val)
        if best is None:
            break
        _, xi, yi, joint, _ = best
        x, y = items[xi], items[yi]
        phrase = Keyterm(tokens=x.tokens + y.tokens, score=max(x.score, y.score), freq=joint)
        items = [it for i, it in enumerate(items) if i not in (xi, yi)]
        items.append(phrase)
    items.sort(key=rank_key)
    return items


def dedup_entities(keyterms: list, entity_token_sequences) -> list:
    """Drop keyterms equal to or contained in an entity token sequence."""
    sequences = [tuple(seq) for seq in entity_token_sequences if seq]
    if not sequences:
        return list(keyterms)

    def shadowed(tokens: tuple) -> bool:
        n = len(tokens)
        for seq in sequences:
            for i in range(len(seq) - n + 1):
                if seq[i : i + n] == tokens:
                    return True
        return False

    return [kt for kt in keyterms if not shadowed(kt.tokens)]


# ---------------------------------------------------------------------------
# resources


def load_reference(path: str, lang_code: str = "") -> ReferenceCorpusStats:
    """Read a `<lang>.ref.tsv` file: `#total<TAB>N` header, then
    term<TAB>count lines."""
    term_freq: dict = {}
    total = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition("\t")
            if lineno == 0 and key == "#total":
                total = int(value)
                continue
            term_freq[key] = term_freq.get(key, 0) + int(value)
    if total <= 0:
        total = sum(term_freq.values())
    if total <= 0:
        raise MissingReference(f"reference {path} is empty")
    if not lang_code:
        lang_code = os.path.basename(path).split(".")[0]
    return ReferenceCorpusStats(lang_code=lang_code, total_tokens=total, term_freq=term_freq)


def write_reference(stats: ReferenceCorpusStats, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#total\t{stats.total_tokens}\n")
        for term in sorted(stats.term_freq):
            fh.write(f"{term}\t{stats.term_freq[term]}\n")


@lru_cache(maxsize=64)
def load_stopwords(lang_code: str, directory=None) -> frozenset:
    directory = directory or default_stopword_dir()
    path = os.path.join(directory, f"{lang_code}.stop.txt")
    if not os.path.exists(path):
        return frozenset()
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def default_stopword_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "resources", "stopwords")


def default_reference_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "resources", "reference")


def load_references(directory=None) -> dict:
    """All `<lang>.ref.tsv` files in a directory, keyed by language."""
    directory = directory or default_reference_dir()
    refs: dict = {}
    if not os.path.isdir(directory):
        return refs
    for name in sorted(os.listdir(directory)):
        if name.endswith(".ref.tsv"):
            lang = name[: -len(".ref.tsv")]
            refs[lang] = load_reference(os.path.join(directory, name), lang)
    return refs
