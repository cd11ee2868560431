import random

import pytest
from hypothesis import given, settings, strategies as st

from textsleuth.errors import DomainError, MissingReference
from textsleuth.keyterms import (
    Keyterm,
    ReferenceCorpusStats,
    TargetStats,
    dedup_entities,
    dice,
    extract_keyterms,
    load_reference,
    load_stopwords,
    log_likelihood,
    merge_phrases,
    write_reference,
)

from reference_impl import brute_force_pipeline, oracle_ll


def make_ref(counts, total=None, lang="en"):
    return ReferenceCorpusStats(
        lang_code=lang, total_tokens=total or sum(counts.values()), term_freq=counts
    )


class TestLogLikelihood:
    def test_equal_relative_frequency_is_zero(self):
        assert log_likelihood(5, 500, 100, 10000) == 0.0

    def test_derived_value(self):
        assert log_likelihood(10, 10, 100, 10000) == pytest.approx(64.7755297, abs=1e-6)

    def test_reference_only_term_positive(self):
        assert log_likelihood(0, 10, 100, 10000) > 0.0

    def test_matches_direct_formula_on_random_tuples(self):
        rng = random.Random(7)
        for _ in range(500):
            c = rng.randint(1, 10**6)
            d = rng.randint(1, 10**6)
            a = rng.randint(0, c)
            b = rng.randint(0, d)
            if a + b == 0:
                continue
            got = log_likelihood(a, b, c, d)
            want = oracle_ll(a, b, c, d)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_symmetry_under_corpus_swap(self):
        rng = random.Random(11)
        for _ in range(200):
            c, d = rng.randint(1, 9999), rng.randint(1, 9999)
            a, b = rng.randint(0, c), rng.randint(0, d)
            if a + b == 0:
                continue
            assert log_likelihood(a, b, c, d) == pytest.approx(
                log_likelihood(b, a, d, c), rel=1e-12, abs=1e-12
            )

    def test_zero_iff_equal_ratios(self):
        rng = random.Random(13)
        for _ in range(300):
            c, d = rng.randint(1, 999), rng.randint(1, 999)
            a, b = rng.randint(0, c), rng.randint(0, d)
            if a + b == 0:
                continue
            ll = log_likelihood(a, b, c, d)
            if a * d == b * c:
                assert ll == 0.0
            else:
                assert ll > 0.0

    def test_integer_scaling_is_exact_multiplication(self):
        for a, b, c, d in [(3, 17, 40, 900), (0, 5, 10, 100), (7, 0, 21, 50)]:
            base = log_likelihood(a, b, c, d)
            for k in (2, 5, 13):
                scaled = log_likelihood(k * a, k * b, k * c, k * d)
                assert scaled == pytest.approx(k * base, rel=1e-9)

    @pytest.mark.parametrize("a,b,c,d", [(1, 1, 0, 5), (1, 1, 5, 0), (6, 0, 5, 5), (0, 0, 5, 5)])
    def test_precondition_violations(self, a, b, c, d):
        with pytest.raises(DomainError):
            log_likelihood(a, b, c, d)


class TestDice:
    def test_perfect_collocation(self):
        target = TargetStats.from_runs([["stock", "market"]])
        assert dice("stock", "market", target) == 1.0

    def test_derived_value(self):
        # f(x)=4, f(y)=2, f(xy)=2 -> 2*2/(4+2)
        runs = [["x", "y", "x", "y", "x", "z", "x"]]
        target = TargetStats.from_runs(runs)
        assert target.freq("x") == 4 and target.freq("y") == 2
        assert target.adjacency_freq[("x", "y")] == 2
        assert dice("x", "y", target) == pytest.approx(2 / 3, abs=1e-9)

    def test_never_adjacent(self):
        target = TargetStats.from_runs([["x", "z", "y"]])
        assert dice("x", "y", target) == 0.0

    def test_requires_positive_frequencies(self):
        target = TargetStats.from_runs([["x"]])
        with pytest.raises(DomainError):
            dice("x", "missing", target)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcd"), max_size=12), min_size=1, max_size=4))
    def test_bounds_property(self, runs):
        target = TargetStats.from_runs(runs)
        terms = sorted(target.term_freq)
        for x in terms:
            for y in terms:
                value = dice(x, y, target)
                assert 0.0 <= value <= 1.0


class TestExtract:
    def test_equal_ratios_yield_nothing(self):
        target = TargetStats.from_runs([["alpha", "beta"] * 5])
        ref = make_ref({"alpha": 50, "beta": 50})
        assert extract_keyterms(target, ref, threshold=1.0, top_k=10) == []

    def test_domain_terms_rank_above_function_words(self):
        runs = [
            ["nordstern", "akte", "nordstern", "bericht", "der", "vorgang"],
            ["nordstern", "akte", "der", "bericht", "nordstern", "und"],
        ]
        target = TargetStats.from_runs(runs)
        ref = make_ref({"der": 4000, "und": 3000, "bericht": 40, "vorgang": 20}, total=10000)
        stop = {"der", "und"}
        result = extract_keyterms(target, ref, threshold=3.0, top_k=5, stopwords=stop)
        terms = [kt.term for kt in result]
        assert terms[0] == "nordstern"
        assert "der" not in terms and "und" not in terms

    def test_underuse_excluded(self):
        # "rare" is heavily underused in the target
        target = TargetStats.from_runs([["rare"] + ["filler"] * 99])
        ref = make_ref({"rare": 9000, "filler": 10}, total=10000)
        result = extract_keyterms(target, ref, threshold=0.5, top_k=10)
        assert all(kt.term != "rare" for kt in result)

    def test_top_k_cut(self):
        runs = [[f"term{i}" for i in range(20)] * 3]
        target = TargetStats.from_runs(runs)
        ref = make_ref({"other": 10000}, total=10000)
        result = extract_keyterms(target, ref, threshold=1.0, top_k=7)
        assert len(result) == 7

    def test_missing_reference(self):
        target = TargetStats.from_runs([["a"]])
        with pytest.raises(MissingReference):
            extract_keyterms(target, None)


class TestMergePhrases:
    def test_always_adjacent_pair_merges(self):
        runs = [["the", "stock", "market", "fell"], ["stock", "market", "up"]]
        target = TargetStats.from_runs(runs)
        kts = [Keyterm(("stock",), 20.0, 2), Keyterm(("market",), 18.0, 2)]
        merged = merge_phrases(kts, target, 0.4)
        assert [kt.term for kt in merged] == ["stock market"]
        assert merged[0].score == 20.0
        assert merged[0].freq == 2

    def test_no_pair_above_threshold_unchanged(self):
        runs = [["a", "x", "b"], ["b", "y", "a"]]
        target = TargetStats.from_runs(runs)
        kts = [Keyterm(("a",), 15.0, 2), Keyterm(("b",), 12.0, 2)]
        merged = merge_phrases(kts, target, 0.4)
        assert {kt.term for kt in merged} == {"a", "b"}

    def test_three_term_chain_merges_in_two_rounds(self):
        runs = [["machine", "learning", "course"]] * 3
        target = TargetStats.from_runs(runs)
        kts = [
            Keyterm(("machine",), 30.0, 3),
            Keyterm(("learning",), 28.0, 3),
            Keyterm(("course",), 25.0, 3),
        ]
        merged = merge_phrases(kts, target, 0.4)
        assert [kt.term for kt in merged] == ["machine learning course"]
        assert merged[0].freq == 3
        assert merged[0].score == 30.0


class TestDedup:
    def test_containment_drop(self):
        kts = [Keyterm(("merkel",), 30.0, 3)]
        assert dedup_entities(kts, [("angela", "merkel")]) == []

    def test_novel_term_survives(self):
        kts = [Keyterm(("blutzeugentheorie",), 40.0, 5)]
        kept = dedup_entities(kts, [("angela", "merkel")])
        assert [kt.term for kt in kept] == ["blutzeugentheorie"]

    def test_empty_entity_set(self):
        kts = [Keyterm(("alpha",), 20.0, 2)]
        assert dedup_entities(kts, []) == kts

    def test_output_is_subset(self):
        kts = [Keyterm((t,), 20.0, 2) for t in ("a", "b", "c")]
        kept = dedup_entities(kts, [("b",), ("x", "c")])
        assert [kt.term for kt in kept] == ["a"]


class TestPipelineOracle:
    def run_both(self, runs, ref_counts, ref_total, stop, threshold, top_k, dice_t, entities):
        target = TargetStats.from_runs(runs)
        ref = make_ref(dict(ref_counts), total=ref_total)
        kts = extract_keyterms(target, ref, threshold, top_k, frozenset(stop))
        kts = merge_phrases(kts, target, dice_t)
        kts = dedup_entities(kts, entities)
        got = [(kt.tokens, kt.score, kt.freq) for kt in kts]
        want = brute_force_pipeline(
            runs, dict(ref_counts), ref_total, set(stop), threshold, top_k, dice_t, entities
        )
        return got, want

    def test_fixture_matches_brute_force(self):
        runs = [
            ["akte", "nordstern", "bericht", "der", "vorgang", "akte", "nordstern"],
            ["zeuge", "bericht", "akte", "nordstern", "und", "zeuge"],
            ["blutzeugentheorie", "im", "bericht", "akte", "nordstern"],
        ]
        ref_counts = {"der": 3000, "und": 2000, "im": 1000, "bericht": 60, "zeuge": 25}
        got, want = self.run_both(
            runs, ref_counts, 10000, {"der", "und", "im"}, 5.0, 8, 0.4,
            [("nordstern", "gmbh")],
        )
        assert [g[0] for g in got] == [w[0] for w in want]
        for g, w in zip(got, want):
            assert g[1] == pytest.approx(w[1], rel=1e-9)
            assert g[2] == w[2]

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_random_corpora_match_brute_force(self, data):
        vocab = ["blau", "rot", "akte", "zeuge", "plan", "und", "der"]
        runs = data.draw(
            st.lists(st.lists(st.sampled_from(vocab), max_size=25), min_size=1, max_size=6)
        )
        total_tokens = sum(len(r) for r in runs)
        if total_tokens == 0:
            return
        ref_counts = {"und": 2000, "der": 3000, "plan": data.draw(st.integers(0, 50))}
        threshold = data.draw(st.sampled_from([0.5, 3.0, 10.83]))
        dice_t = data.draw(st.sampled_from([0.3, 0.4, 0.9]))
        got, want = self.run_both(
            runs, ref_counts, 8000, {"und", "der"}, threshold, 6, dice_t, [("akte", "plan")]
        )
        assert [g[0] for g in got] == [w[0] for w in want]
        for g, w in zip(got, want):
            assert g[1] == pytest.approx(w[1], rel=1e-9)
            assert g[2] == w[2]


class TestResources:
    def test_reference_round_trip(self, tmp_path):
        ref = make_ref({"apfel": 10, "birne": 5}, total=100, lang="de")
        path = tmp_path / "de.ref.tsv"
        write_reference(ref, str(path))
        loaded = load_reference(str(path))
        assert loaded.lang_code == "de"
        assert loaded.total_tokens == 100
        assert loaded.term_freq == {"apfel": 10, "birne": 5}

    def test_bundled_stopwords(self):
        stop = load_stopwords("de")
        assert "und" in stop and "der" in stop

    def test_missing_stopword_language_is_empty(self):
        assert load_stopwords("zz") == frozenset()
