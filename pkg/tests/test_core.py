import pytest
from hypothesis import given, strategies as st

from topiclabel.core import (
    CandidateSource,
    EmbeddingVector,
    LabelResult,
    ScoredCandidate,
    Topic,
    normalize_word,
)
from topiclabel.errors import EmptyTopic, EmptyWord


class TestNormalizeWord:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Obama ", "obama"),
            ("ice_hockey", "ice hockey"),
            ("  New   York ", "new york"),
            ("a_b_c", "a b c"),
            ("_edge_", "edge"),
            ("MiXeD", "mixed"),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_word(raw) == expected

    @pytest.mark.parametrize("raw", ["", "   ", "___", " _ _ "])
    def test_empty_rejected(self, raw):
        with pytest.raises(EmptyWord):
            normalize_word(raw)

    @given(st.text(alphabet="abcXYZ _\t", min_size=1))
    def test_idempotent(self, raw):
        try:
            once = normalize_word(raw)
        except EmptyWord:
            return
        assert normalize_word(once) == once


class TestTopic:
    def test_normalizes_words_and_keeps_order(self):
        topic = Topic(id="t", words=("Zebra", "apple_pie", " Zebra "))
        assert topic.words == ("zebra", "apple pie", "zebra")

    def test_duplicates_kept(self):
        assert Topic(id="t", words=("a", "a")).words == ("a", "a")

    def test_rejects_empty_word_list(self):
        with pytest.raises(EmptyTopic):
            Topic(id="t", words=())

    def test_rejects_empty_word(self):
        with pytest.raises(EmptyWord):
            Topic(id="t", words=("a", "  "))

    def test_rejects_empty_id(self):
        with pytest.raises(EmptyTopic):
            Topic(id="", words=("a",))


class TestEmbeddingVector:
    def test_dim_matches_values(self):
        assert EmbeddingVector((1.0, 2.0, 3.0), "m").dim == 3

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            EmbeddingVector((1.0, float("nan")), "m")

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            EmbeddingVector((float("inf"),), "m")

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            EmbeddingVector((), "m")


class TestScoredCandidate:
    def test_score_slack(self):
        ScoredCandidate("x", 1.0 + 5e-10, CandidateSource.TOPIC_WORD)

    def test_score_out_of_range(self):
        with pytest.raises(ValueError):
            ScoredCandidate("x", 1.1, CandidateSource.TOPIC_WORD)


class TestLabelResult:
    def _candidates(self):
        return (
            ScoredCandidate("best", 0.9, CandidateSource.TOPIC_WORD),
            ScoredCandidate("next", 0.1, CandidateSource.TOPIC_WORD),
        )

    def test_label_is_top_candidate(self):
        result = LabelResult.from_ranked("t", self._candidates())
        assert result.label == "best"
        assert result.score == 0.9

    def test_mismatched_label_rejected(self):
        with pytest.raises(ValueError):
            LabelResult(topic_id="t", label="next", score=0.1, candidates=self._candidates())

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            LabelResult.from_ranked("t", ())
