"""Recommender tests.

The expected confidences for the shared fixture were derived by hand before
the engine was written: f_noun values come from counting which objects
contain each noun, proxy cosines are exact dot products of the unit
vectors, and every expected confidence is (pe + ps + ph) / 3 with absent
slots contributing 0.
"""

import math
import random

import pytest

from tracerec.annotation_store import Requirement
from tracerec.recommender import (
    SUPPRESSED,
    FeedbackEvent,
    HistoryStore,
    PersistenceError,
    RecommenderConfig,
    RecommenderError,
    combine_confidence,
    p_exact,
    p_history,
    p_similarity,
    record_feedback,
    suggest,
)
from tracerec.taxonomy import Taxonomy, TaxonomyObject, build_noun_index
from tracerec.textproc import AnalyzerConfig

IDENTITY = AnalyzerConfig(language="en", stemmer="identity")


def event(stem, code, action, ts=0.0, participant="P1", requirement="R1"):
    return FeedbackEvent(ts, participant, requirement, stem, code, action)


def history_with_accepts(*counts):
    """A store whose pairs have the given accept counts (distinct nouns)."""
    events = []
    for i, count in enumerate(counts):
        for _ in range(count):
            events.append(event(f"noun{i}", f"code{i}", "accept"))
    return HistoryStore.replay(events)


class TestPredictors:
    def test_p_exact_unique_noun(self):
        assert p_exact(1) == 1.0

    def test_p_exact_formula(self):
        assert p_exact(4) == pytest.approx(0.25, abs=1e-9)

    def test_p_exact_requires_indexed_stem(self):
        with pytest.raises(RecommenderError):
            p_exact(0)

    def test_p_similarity_prose_mode(self):
        assert p_similarity(1.0, 1) == pytest.approx(1.0, abs=1e-9)
        assert p_similarity(0.8, 4) == pytest.approx(0.2, abs=1e-9)

    def test_p_similarity_literal_mode_exits_unit_range(self):
        value = p_similarity(0.5, 1, mode="literal")
        assert value == pytest.approx(2.0, abs=1e-9)
        assert value > 1.0  # the literal equation leaves (0, 1]

    def test_p_similarity_rejects_non_positive_cosine(self):
        with pytest.raises(RecommenderError):
            p_similarity(0.0, 1)
        with pytest.raises(RecommenderError):
            p_similarity(-0.5, 1, mode="literal")

    def test_p_history_scaling(self):
        store = history_with_accepts(1, 3, 5)
        value = p_history(("noun1", "code1"), store, f_noun=2)
        assert value == pytest.approx(0.25, abs=1e-9)  # ((3-1)/(5-1))/2

    def test_p_history_suppression_at_default_threshold(self):
        events = [event("bro", "O1", "reject", ts=float(i)) for i in range(5)]
        store = HistoryStore.replay(events)
        assert p_history(("bro", "O1"), store, f_noun=1) is SUPPRESSED

    def test_p_history_degenerate_bounds(self):
        store = history_with_accepts(2)
        assert p_history(("noun0", "code0"), store, f_noun=1) == pytest.approx(1.0)

    def test_p_history_empty_store(self):
        assert p_history(("bro", "O1"), HistoryStore(), f_noun=1) == 0.0

    def test_p_history_unknown_pair_scores_zero(self):
        store = history_with_accepts(1, 5)
        assert p_history(("other", "pair"), store, f_noun=1) == 0.0

    def test_combine_all_ones(self):
        assert combine_confidence(1.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_combine_hand_value(self):
        assert combine_confidence(0.25, 0.2, 0.0) == pytest.approx(0.15, abs=1e-9)

    def test_combine_suppression_dominates(self):
        assert combine_confidence(0.9, 0.9, SUPPRESSED) is SUPPRESSED

    def test_combine_absent_contributes_zero(self):
        assert combine_confidence(0.6, None, None) == pytest.approx(0.2, abs=1e-9)

    def test_combine_all_absent_rejected(self):
        with pytest.raises(RecommenderError):
            combine_confidence(None, None, None)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(RecommenderError):
            RecommenderConfig(weights=(0.5, 0.5, 0.5))


class TestHistoryStore:
    def test_accept_on_fresh_pair(self):
        store = HistoryStore()
        record_feedback(store, event("bro", "O1", "accept"))
        assert store.accepts("bro", "O1") == 1
        assert store.rejects("bro", "O1") == 0

    def test_reject_on_unknown_pair_creates_entry(self):
        store = HistoryStore()
        record_feedback(store, event("bro", "O1", "reject"))
        assert store.rejects("bro", "O1") == 1

    def test_log_replay_is_exact(self, tmp_path):
        log = tmp_path / "events.jsonl"
        store = HistoryStore(log_path=log)
        for i in range(4):
            record_feedback(store, event("bro", "O1", "accept" if i % 2 else "reject", ts=float(i)))
        record_feedback(store, event("väg", "O2", "accept", ts=9.0))
        rebuilt = HistoryStore.load(log)
        assert dict(rebuilt.pairs()) == dict(store.pairs())

    def test_persistence_failure_leaves_memory_unchanged(self, tmp_path):
        store = HistoryStore(log_path=tmp_path)  # a directory: append must fail
        with pytest.raises(PersistenceError):
            record_feedback(store, event("bro", "O1", "accept"))
        assert store.accepts("bro", "O1") == 0

    def test_timestamps_monotone_per_participant(self):
        store = HistoryStore()
        record_feedback(store, event("bro", "O1", "accept", ts=5.0))
        with pytest.raises(RecommenderError):
            record_feedback(store, event("bro", "O1", "accept", ts=4.0))
        # an earlier timestamp from a different participant is fine
        record_feedback(store, event("bro", "O1", "accept", ts=1.0, participant="P2"))

    def test_replay_twice_equals_sequential_replay(self):
        events = [
            event("bro", "O1", "accept"),
            event("bro", "O1", "reject"),
            event("väg", "O2", "accept"),
        ]
        doubled = HistoryStore.replay(events + events)
        sequential = HistoryStore.replay(events)
        for e in events:
            sequential.record(e)
        assert dict(doubled.pairs()) == dict(sequential.pairs())


class TestSuggestToyFixture:
    """Spec-style toy: three objects, no embeddings, empty history."""

    @pytest.fixture()
    def toy(self):
        taxonomy = Taxonomy(
            [
                TaxonomyObject("O1", "bridge"),
                TaxonomyObject("O2", "road bridge"),
                TaxonomyObject("O3", "tunnel"),
            ]
        )
        index = build_noun_index(taxonomy, IDENTITY)
        return taxonomy, index

    def test_two_suggestions_ranked_by_code(self, toy):
        _, index = toy
        requirement = Requirement("R1", "The bridge shall be lit")
        ranked = suggest(requirement, index, None, None, analyzer=IDENTITY)
        assert [(s.occurrence.stem, s.code) for s in ranked] == [
            ("bridge", "O1"),
            ("bridge", "O2"),
        ]
        for s in ranked:
            assert s.p_exact == pytest.approx(0.5, abs=1e-9)  # f_noun = 2
            assert s.p_similarity is None
            assert s.p_history is None
            assert s.confidence == pytest.approx(0.5 / 3, abs=1e-9)

    def test_no_vocabulary_nouns(self, toy):
        _, index = toy
        requirement = Requirement("R9", "unrelated words entirely")
        assert suggest(requirement, index, None, None, analyzer=IDENTITY) == []

    def test_deterministic(self, toy):
        _, index = toy
        requirement = Requirement("R1", "A bridge and a tunnel")
        first = suggest(requirement, index, None, None, analyzer=IDENTITY)
        second = suggest(requirement, index, None, None, analyzer=IDENTITY)
        assert first == second


from conftest import FIXTURE_ORACLE, oracle_confidence  # noqa: E402


class TestSuggestFixtureOracle:
    def test_all_requirements_match_hand_computation(
        self, noun_index, embeddings, requirements, analyzer
    ):
        for requirement in requirements:
            ranked = suggest(
                requirement, noun_index, embeddings, None, analyzer=analyzer
            )
            expected = FIXTURE_ORACLE[requirement.id]
            assert [(s.occurrence.stem, s.code) for s in ranked] == [
                (stem, code) for stem, code, *_ in expected
            ], requirement.id
            for s, (stem, code, pe, ps, ph) in zip(ranked, expected):
                assert s.p_exact == (pytest.approx(pe, abs=1e-9) if pe is not None else None)
                assert s.p_similarity == (
                    pytest.approx(ps, abs=1e-9) if ps is not None else None
                )
                assert s.p_history is None
                assert s.confidence == pytest.approx(oracle_confidence(pe, ps, ph), abs=1e-9)

    def test_compound_part_provenance(self, noun_index, embeddings, requirements, analyzer):
        ranked = suggest(requirements[2], noun_index, embeddings, None, analyzer=analyzer)
        part_suggestions = [s for s in ranked if s.occurrence.source == "compound-part"]
        assert {s.occurrence.stem for s in part_suggestions} == {"road", "bridge"}
        assert all(s.occurrence.surface == "roadbridge" for s in part_suggestions)

    def test_proxy_provenance(self, noun_index, embeddings, requirements, analyzer):
        ranked = suggest(requirements[0], noun_index, embeddings, None, analyzer=analyzer)
        top = ranked[0]
        assert top.code == "B01"
        assert top.proxy == "overpass"
        assert top.fired == ("exact", "similarity")


class TestSuppression:
    def test_five_rejects_remove_pair(self, noun_index, embeddings, requirements, analyzer):
        events = [
            event("bridge", "B01", "reject", ts=float(i)) for i in range(5)
        ]
        history = HistoryStore.replay(events)
        ranked = suggest(requirements[0], noun_index, embeddings, history, analyzer=analyzer)
        assert ("bridge", "B01") not in {(s.occurrence.stem, s.code) for s in ranked}
        assert ("bridge", "B02") in {(s.occurrence.stem, s.code) for s in ranked}

    def test_higher_threshold_survives_six_rejects(
        self, noun_index, embeddings, requirements, analyzer
    ):
        events = [event("bridge", "B01", "reject", ts=float(i)) for i in range(6)]
        history = HistoryStore.replay(events)
        config = RecommenderConfig(rejection_threshold=7)
        ranked = suggest(
            requirements[0], noun_index, embeddings, history, config, analyzer=analyzer
        )
        assert ("bridge", "B01") in {(s.occurrence.stem, s.code) for s in ranked}

    def test_suppression_permanent_despite_later_accepts(
        self, noun_index, embeddings, requirements, analyzer
    ):
        events = [event("bridge", "B01", "reject", ts=float(i)) for i in range(5)]
        events += [event("bridge", "B01", "accept", ts=float(5 + i)) for i in range(10)]
        history = HistoryStore.replay(events)
        ranked = suggest(requirements[0], noun_index, embeddings, history, analyzer=analyzer)
        assert ("bridge", "B01") not in {(s.occurrence.stem, s.code) for s in ranked}


class TestHistoryAffectsRanking:
    def test_accepts_lift_confidence(self, noun_index, embeddings, requirements, analyzer):
        baseline = suggest(requirements[1], noun_index, embeddings, None, analyzer=analyzer)
        # R2 ranks traffic->B02 first; boost road->R01 with accepted history
        events = [event("road", "R01", "accept", ts=float(i)) for i in range(3)]
        events += [event("road", "B01", "accept", ts=10.0)]
        history = HistoryStore.replay(events)
        ranked = suggest(requirements[1], noun_index, embeddings, history, analyzer=analyzer)
        by_pair = {(s.occurrence.stem, s.code): s for s in ranked}
        # f_assoc 3 at bounds (1, 3): scaled 1; f_noun(road) = 3 -> ph = 1/3
        assert by_pair[("road", "R01")].p_history == pytest.approx((1 / 3), abs=1e-9)
        assert by_pair[("road", "R01")].confidence == pytest.approx(
            (1 / 3 + 1 / 3) / 3, abs=1e-9
        )
        # the boosted pair now outranks the exact-only road suggestions
        codes = [(s.occurrence.stem, s.code) for s in ranked]
        assert codes.index(("road", "R01")) < codes.index(("road", "B02"))
        assert len(ranked) == len(baseline)


from conftest import random_scene  # noqa: E402


class TestRandomizedProperties:
    def test_range_and_ranking_sample(self):
        rng = random.Random(2024)
        for _ in range(150):
            requirement, index, store, history, config = random_scene(rng)
            ranked = suggest(requirement, index, store, history, config, analyzer=IDENTITY)
            confidences = [s.confidence for s in ranked]
            assert all(0.0 <= c <= 1.0 for c in confidences)
            assert confidences == sorted(confidences, reverse=True)

    def test_confidence_equals_stored_components(self):
        rng = random.Random(7)
        for _ in range(60):
            requirement, index, store, history, config = random_scene(rng)
            for s in suggest(requirement, index, store, history, config, analyzer=IDENTITY):
                recomputed = combine_confidence(
                    s.p_exact, s.p_similarity, s.p_history, config.weights
                )
                assert math.isclose(s.confidence, recomputed, abs_tol=1e-9)

    def test_weight_rescaling_preserves_ranking(
        self, noun_index, embeddings, requirements, analyzer
    ):
        base_weights = (0.5, 0.25, 0.25)
        base = suggest(
            requirements[2],
            noun_index,
            embeddings,
            None,
            RecommenderConfig(weights=base_weights),
            analyzer=analyzer,
        )
        for factor in (2.0, 3.0, 10.0):
            scaled = tuple(w * factor for w in base_weights)
            total = sum(scaled)
            config = RecommenderConfig(weights=tuple(w / total for w in scaled))
            again = suggest(
                requirements[2], noun_index, embeddings, None, config, analyzer=analyzer
            )
            assert [(s.occurrence.stem, s.code) for s in again] == [
                (s.occurrence.stem, s.code) for s in base
            ]
