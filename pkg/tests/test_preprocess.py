import os

import pytest
from hypothesis import given, strategies as st

from textsleuth import preprocess
from textsleuth.preprocess import (
    default_profiles,
    detect_language,
    normalize_token,
    segment,
)

from conftest import fixture_path


def heldout_sentences():
    cases = []
    langid_dir = fixture_path("langid")
    for name in sorted(os.listdir(langid_dir)):
        lang = name.split(".")[0]
        with open(os.path.join(langid_dir, name), encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    cases.append((lang, line))
    return cases


class TestDetectLanguage:
    def test_empty_input_is_undetermined(self):
        guess = detect_language("", default_profiles())
        assert guess.lang_code == "und"
        assert guess.confidence == 0.0

    def test_short_input_is_undetermined(self):
        guess = detect_language("ok bye", default_profiles())
        assert guess.lang_code == "und"

    @pytest.mark.parametrize("lang", ["en", "de", "es", "fr"])
    def test_sample_self_classification(self, lang):
        path = os.path.join(preprocess.default_language_resource_dir(), f"{lang}.sample.txt")
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        guess = detect_language(text, default_profiles())
        assert guess.lang_code == lang
        assert guess.confidence >= 0.99

    def test_heldout_accuracy(self):
        cases = heldout_sentences()
        assert len(cases) >= 40
        correct = sum(
            1
            for lang, sentence in cases
            if detect_language(sentence, default_profiles()).lang_code == lang
        )
        assert correct / len(cases) >= 0.95

    def test_duplication_invariance(self):
        for _, sentence in heldout_sentences()[:8]:
            once = detect_language(sentence, default_profiles()).lang_code
            twice = detect_language(sentence + " " + sentence, default_profiles()).lang_code
            assert once == twice


class TestSegment:
    def test_abbreviation_aware_sentences(self):
        unit = segment("Dr. Smith arrived. He left.", "en")
        assert len(unit.sentences) == 2
        surfaces = [t.surface for t in unit.tokens]
        assert "Dr." in surfaces
        assert "Smith" in surfaces

    def test_empty_text(self):
        unit = segment("", "en")
        assert unit.sentences == []
        assert unit.tokens == []

    def test_cyrillic_word_tokens(self):
        unit = segment("стол стул", "und")
        words = unit.word_tokens()
        assert [t.surface for t in words] == ["стол", "стул"]

    def test_spans_match_surfaces(self):
        text = "Ms. Weber (born 1955) said: \"Wait!\" Then silence."
        unit = segment(text, "en")
        for tok in unit.tokens:
            assert text[tok.start : tok.end] == tok.surface

    def test_sentences_partition_and_cover_tokens(self):
        text = "First one. Second one! Third?  End."
        unit = segment(text, "en")
        spans = unit.sentences
        assert spans[0][0] == 0
        assert spans[-1][1] == len(text)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 == s2
        for tok in unit.tokens:
            assert sum(1 for s, e in spans if s <= tok.start and tok.end <= e) == 1

    def test_punctuation_tokens_not_words(self):
        unit = segment("Stop, now.", "en")
        punct = [t for t in unit.tokens if not t.is_word]
        assert {t.surface for t in punct} == {",", "."}

    def test_numeric_date_stays_single_token(self):
        unit = segment("Am 04.04.2006 geschah es.", "de")
        assert "04.04.2006" in [t.surface for t in unit.tokens]

    @given(st.text(max_size=120))
    def test_token_spans_sound(self, text):
        unit = segment(text, "en")
        prev_end = -1
        for tok in unit.tokens:
            assert 0 <= tok.start < tok.end <= len(text)
            assert tok.start >= prev_end
            assert text[tok.start : tok.end] == tok.surface
            prev_end = tok.end


class TestNormalize:
    def test_lowercase(self):
        assert normalize_token("ABC") == "abc"

    def test_ligature_nfkc(self):
        assert normalize_token("ﬁle") == "file"

    def test_eszett_not_expanded(self):
        assert normalize_token("Straße", "de") == "straße"

    @given(st.text(max_size=60))
    def test_idempotent(self, s):
        once = normalize_token(s)
        assert normalize_token(once) == once
